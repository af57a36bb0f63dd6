#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "tcm/tensor.hpp"

namespace tcm {

struct Parameter {
    std::string name;
    Tensor value;
    Tensor grad;  // same shape as value, zero between optimizer steps

    void zero_grad() { grad.fill(0.0); }
};

// Owns every trainable tensor. Iteration order is insertion order, which keeps
// checkpoints and optimizer updates deterministic.
class ParamStore {
  public:
    ParamStore() = default;
    ParamStore(const ParamStore&) = delete;
    ParamStore& operator=(const ParamStore&) = delete;
    ParamStore(ParamStore&&) = default;
    ParamStore& operator=(ParamStore&&) = default;

    // Weights ~ N(0, stddev), biases (is_bias) zero.
    Parameter& add(const std::string& name, std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                   Real stddev, bool is_bias = false);
    Parameter& add(const std::string& name, Tensor value);

    Parameter& at(const std::string& name);
    const Parameter& at(const std::string& name) const;
    bool contains(const std::string& name) const { return index_.count(name) != 0; }

    std::size_t size() const { return params_.size(); }
    std::size_t scalar_count() const;
    Parameter& operator[](std::size_t i) { return *params_[i]; }
    const Parameter& operator[](std::size_t i) const { return *params_[i]; }

    void zero_grad();
    Real grad_norm() const;
    // Rescales every gradient so the global L2 norm is at most max_norm. Returns the pre-clip norm.
    Real clip_grad_norm(Real max_norm);

    // Deep copy of values (grads zeroed).
    ParamStore clone() const;
    void copy_values_from(const ParamStore& other);

  private:
    std::vector<std::unique_ptr<Parameter>> params_;
    std::unordered_map<std::string, std::size_t> index_;
};

// Parameter section of a checkpoint. Format:
//   params <count>
//   <name> <rows> <cols>
//   <rows*cols hexfloat values, space separated>
// Hexfloat keeps the round trip bit-exact.
void write_params(std::ostream& out, const ParamStore& store);
// Loads into an existing store; every stored name must exist with a matching shape.
void read_params(std::istream& in, ParamStore& store);

}  // namespace tcm
