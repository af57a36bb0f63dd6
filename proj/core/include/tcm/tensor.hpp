#pragma once

#include <cstddef>
#include <initializer_list>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace tcm {

using Real = double;

// Dense row-major matrix. Vectors are stored as n x 1 columns.
class Tensor {
  public:
    Tensor() = default;
    Tensor(std::size_t rows, std::size_t cols, Real fill = 0.0);
    Tensor(std::size_t rows, std::size_t cols, std::vector<Real> data);

    static Tensor column(std::initializer_list<Real> values);
    static Tensor column(std::span<const Real> values);
    static Tensor from_rows(std::initializer_list<std::initializer_list<Real>> rows);
    static Tensor gaussian(std::size_t rows, std::size_t cols, Real stddev, std::mt19937_64& rng);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }
    std::vector<std::size_t> shape() const { return {rows_, cols_}; }
    bool same_shape(const Tensor& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

    Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    Real operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    Real& operator[](std::size_t i) { return data_[i]; }
    Real operator[](std::size_t i) const { return data_[i]; }

    std::span<Real> data() { return data_; }
    std::span<const Real> data() const { return data_; }
    const std::vector<Real>& values() const { return data_; }

    void fill(Real value);
    void add_inplace(const Tensor& other, Real scale = 1.0);
    Real sum() const;
    Real squared_norm() const;
    bool all_finite() const;

    std::string shape_string() const;

    friend bool operator==(const Tensor& a, const Tensor& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Real> data_;
};

// c = a * b (plain, no autodiff); used by ops and by test oracles.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

}  // namespace tcm
