#include "tcm/tensor.hpp"

#include <cmath>
#include <stdexcept>

namespace tcm {

Tensor::Tensor(std::size_t rows, std::size_t cols, Real fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Tensor::Tensor(std::size_t rows, std::size_t cols, std::vector<Real> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw std::invalid_argument("Tensor: data length " + std::to_string(data_.size()) +
                                    " does not match shape " + shape_string());
    }
}

Tensor Tensor::column(std::initializer_list<Real> values) {
    return Tensor(values.size(), 1, std::vector<Real>(values));
}

Tensor Tensor::column(std::span<const Real> values) {
    return Tensor(values.size(), 1, std::vector<Real>(values.begin(), values.end()));
}

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<Real>> rows) {
    const std::size_t n = rows.size();
    const std::size_t m = n == 0 ? 0 : rows.begin()->size();
    std::vector<Real> data;
    data.reserve(n * m);
    for (const auto& row : rows) {
        if (row.size() != m) throw std::invalid_argument("Tensor::from_rows: ragged rows");
        data.insert(data.end(), row.begin(), row.end());
    }
    return Tensor(n, m, std::move(data));
}

Tensor Tensor::gaussian(std::size_t rows, std::size_t cols, Real stddev, std::mt19937_64& rng) {
    std::normal_distribution<Real> dist(0.0, stddev);
    Tensor t(rows, cols);
    for (auto& v : t.data_) v = dist(rng);
    return t;
}

void Tensor::fill(Real value) {
    for (auto& v : data_) v = value;
}

void Tensor::add_inplace(const Tensor& other, Real scale) {
    if (!same_shape(other)) {
        throw std::invalid_argument("Tensor::add_inplace: shape " + shape_string() + " vs " +
                                    other.shape_string());
    }
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += scale * other.data_[i];
}

Real Tensor::sum() const {
    Real s = 0.0;
    for (Real v : data_) s += v;
    return s;
}

Real Tensor::squared_norm() const {
    Real s = 0.0;
    for (Real v : data_) s += v * v;
    return s;
}

bool Tensor::all_finite() const {
    for (Real v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::string Tensor::shape_string() const {
    return "(" + std::to_string(rows_) + "x" + std::to_string(cols_) + ")";
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.cols() != b.rows()) {
        throw std::invalid_argument("matmul: inner dimension mismatch " + a.shape_string() + " * " +
                                    b.shape_string());
    }
    Tensor c(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    auto cd = c.data();
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const Real aip = ad[i * k + p];
            if (aip == 0.0) continue;
            const Real* brow = &bd[p * m];
            Real* crow = &cd[i * m];
            for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
        }
    }
    return c;
}

Tensor transpose(const Tensor& a) {
    Tensor t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

}  // namespace tcm
