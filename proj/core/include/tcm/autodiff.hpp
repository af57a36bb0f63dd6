#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "tcm/params.hpp"
#include "tcm/tensor.hpp"

namespace tcm {

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
  public:
    Var() = default;

    const Tensor& value() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
    Real scalar() const { return value()[0]; }
    Tape* tape() const { return tape_; }
    int id() const { return id_; }
    bool valid() const { return tape_ != nullptr; }

  private:
    friend class Tape;
    Var(Tape* tape, int id) : tape_(tape), id_(id) {}
    Tape* tape_ = nullptr;
    int id_ = -1;
};

// Reverse-mode recorder. Nodes are appended in creation order, which is a
// topological order; backward() walks them in reverse exactly once.
class Tape {
  public:
    using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    Var constant(Tensor value);
    // Leaf bound to a trainable parameter. Repeated requests return the same node,
    // so multiple uses accumulate into one gradient.
    Var param(Parameter& p);

    // Appends an op node. fn receives the output gradient and must accumulate
    // into its inputs via grad(). Skipped when no input needs a gradient.
    Var record(Tensor value, std::initializer_list<Var> inputs, BackwardFn fn);
    Var record(Tensor value, std::span<const Var> inputs, BackwardFn fn);

    const Tensor& value(int id) const;
    bool needs_grad(int id) const { return nodes_[id].needs_grad; }
    bool needs_grad(Var v) const { return nodes_[v.id()].needs_grad; }
    // Gradient accumulator of a node, zero-initialised on first access.
    Tensor& grad(int id);
    Tensor& grad(Var v) { return grad(v.id()); }

    // Seeds d(loss)/d(loss) = 1 and propagates; parameter gradients are added
    // (not assigned) into Parameter::grad.
    void backward(Var loss);

    // When disabled, ops still compute values but record no backward closures.
    void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
    bool grad_enabled() const { return grad_enabled_; }

    std::size_t size() const { return nodes_.size(); }

  private:
    struct Node {
        Tensor value;
        const Tensor* external = nullptr;  // parameter leaves reference the store
        Tensor grad;
        BackwardFn backward;
        Parameter* param = nullptr;
        bool needs_grad = false;
    };

    std::deque<Node> nodes_;  // stable addresses while ops append
    std::unordered_map<const Parameter*, int> param_nodes_;
    bool grad_enabled_ = true;
    bool backward_done_ = false;
};

enum class Axis {
    kRows,  // every row is a distribution (normalise across columns)
    kCols,  // every column is a distribution (normalise across rows)
};

namespace ad {

Var matmul(Var a, Var b);
Var transpose(Var a);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, Real s);
// a * s where s is a 1x1 node.
Var scale_by(Var a, Var s);
// 1 - a, elementwise.
Var one_minus(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var softmax(Var a, Axis axis);
Var sum(Var a);
Var add_n(std::span<const Var> terms);

Var concat_rows(std::span<const Var> parts);
Var concat_cols(std::span<const Var> parts);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var column(Var a, std::size_t j);

// Row `index` of an embedding table (|V| x d) as a d x 1 column.
Var embedding(Var table, std::size_t index);
// out[index[i]] += v[i] for a column v; out has out_size rows.
Var scatter_add(Var v, std::span<const std::size_t> index, std::size_t out_size);

// probs: V x T, one distribution per column. Returns the mean of -log probs(target_t, t)
// over positions with mask_t != 0. Probabilities are floored at 1e-300 inside the log.
Var masked_nll(Var probs, std::span<const std::size_t> targets, std::span<const Real> mask);

// Inverted dropout; identity when rate == 0.
Var dropout(Var a, Real rate, std::mt19937_64& rng);

}  // namespace ad

}  // namespace tcm
