#include "tcm/params.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace tcm {

Parameter& ParamStore::add(const std::string& name, std::size_t rows, std::size_t cols,
                           std::mt19937_64& rng, Real stddev, bool is_bias) {
    Tensor value = is_bias ? Tensor(rows, cols) : Tensor::gaussian(rows, cols, stddev, rng);
    return add(name, std::move(value));
}

Parameter& ParamStore::add(const std::string& name, Tensor value) {
    if (contains(name)) throw std::invalid_argument("ParamStore: duplicate parameter '" + name + "'");
    auto p = std::make_unique<Parameter>();
    p->name = name;
    p->grad = Tensor(value.rows(), value.cols());
    p->value = std::move(value);
    index_.emplace(name, params_.size());
    params_.push_back(std::move(p));
    return *params_.back();
}

Parameter& ParamStore::at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParamStore: no parameter '" + name + "'");
    return *params_[it->second];
}

const Parameter& ParamStore::at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::out_of_range("ParamStore: no parameter '" + name + "'");
    return *params_[it->second];
}

std::size_t ParamStore::scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.size();
    return n;
}

void ParamStore::zero_grad() {
    for (auto& p : params_) p->zero_grad();
}

Real ParamStore::grad_norm() const {
    Real s = 0.0;
    for (const auto& p : params_) s += p->grad.squared_norm();
    return std::sqrt(s);
}

Real ParamStore::clip_grad_norm(Real max_norm) {
    const Real norm = grad_norm();
    if (norm > max_norm && norm > 0.0) {
        const Real scale = max_norm / norm;
        for (auto& p : params_)
            for (auto& g : p->grad.data()) g *= scale;
    }
    return norm;
}

ParamStore ParamStore::clone() const {
    ParamStore copy;
    for (const auto& p : params_) copy.add(p->name, p->value);
    return copy;
}

void ParamStore::copy_values_from(const ParamStore& other) {
    for (auto& p : params_) {
        const Parameter& src = other.at(p->name);
        if (!src.value.same_shape(p->value))
            throw std::invalid_argument("copy_values_from: shape mismatch for '" + p->name + "'");
        p->value = src.value;
    }
}

void write_params(std::ostream& out, const ParamStore& store) {
    out << "params " << store.size() << '\n';
    char buf[64];
    for (std::size_t i = 0; i < store.size(); ++i) {
        const Parameter& p = store[i];
        out << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << '\n';
        for (std::size_t k = 0; k < p.value.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%a", p.value[k]);
            if (k) out << ' ';
            out << buf;
        }
        out << '\n';
    }
}

void read_params(std::istream& in, ParamStore& store) {
    std::string tag;
    std::size_t count = 0;
    if (!(in >> tag >> count) || tag != "params")
        throw std::runtime_error("checkpoint: expected 'params <count>' section");
    if (count != store.size())
        throw std::runtime_error("checkpoint: parameter count " + std::to_string(count) +
                                 " does not match model (" + std::to_string(store.size()) + ")");
    for (std::size_t i = 0; i < count; ++i) {
        std::string name;
        std::size_t rows = 0, cols = 0;
        if (!(in >> name >> rows >> cols)) throw std::runtime_error("checkpoint: truncated parameter header");
        Parameter& p = store.at(name);
        if (p.value.rows() != rows || p.value.cols() != cols)
            throw std::runtime_error("checkpoint: shape mismatch for '" + name + "'");
        for (std::size_t k = 0; k < rows * cols; ++k) {
            std::string tok;
            if (!(in >> tok)) throw std::runtime_error("checkpoint: truncated values for '" + name + "'");
            p.value[k] = std::strtod(tok.c_str(), nullptr);
        }
    }
}

}  // namespace tcm
