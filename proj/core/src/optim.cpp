#include "tcm/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace tcm {

AdamState make_adam(const ParamStore& store, Real lr, Real lr_decay) {
    AdamState s;
    s.lr = lr;
    s.lr_decay = lr_decay;
    for (std::size_t i = 0; i < store.size(); ++i) {
        const Tensor& v = store[i].value;
        s.m.emplace_back(v.rows(), v.cols());
        s.v.emplace_back(v.rows(), v.cols());
    }
    return s;
}

void adam_step(ParamStore& store, AdamState& state) {
    if (state.m.size() != store.size() || state.v.size() != store.size())
        throw std::invalid_argument("adam_step: optimizer state does not match parameter store");
    for (std::size_t i = 0; i < store.size(); ++i) {
        const Parameter& p = store[i];
        if (!p.grad.same_shape(p.value) || !state.m[i].same_shape(p.value))
            throw std::invalid_argument("adam_step: shape mismatch for '" + p.name + "'");
        if (!p.grad.all_finite()) throw std::runtime_error("adam_step: non-finite gradient in '" + p.name + "'");
    }
    state.t += 1;
    const Real bc1 = 1.0 - std::pow(state.beta1, static_cast<Real>(state.t));
    const Real bc2 = 1.0 - std::pow(state.beta2, static_cast<Real>(state.t));
    for (std::size_t i = 0; i < store.size(); ++i) {
        Parameter& p = store[i];
        Tensor& m = state.m[i];
        Tensor& v = state.v[i];
        for (std::size_t k = 0; k < p.value.size(); ++k) {
            const Real g = p.grad[k];
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g;
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g * g;
            const Real mhat = m[k] / bc1;
            const Real vhat = v[k] / bc2;
            p.value[k] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

void decay_learning_rate(AdamState& state) { state.lr *= state.lr_decay; }

namespace {

Real evaluate(const LossFn& loss_fn) {
    Tape tape;
    tape.set_grad_enabled(false);
    Var loss = loss_fn(tape);
    if (loss.value().size() != 1) throw std::invalid_argument("grad_check: loss must be scalar");
    return loss.scalar();
}

}  // namespace

GradCheckResult grad_check(const LossFn& loss_fn, std::span<Parameter* const> params,
                           const GradCheckOptions& options) {
    for (Parameter* p : params) p->zero_grad();
    Real base = 0.0;
    {
        Tape tape;
        Var loss = loss_fn(tape);
        base = loss.scalar();
        tape.backward(loss);
    }
    if (evaluate(loss_fn) != base)
        throw std::runtime_error("grad_check: non-deterministic loss (two forward passes disagree)");

    std::mt19937_64 rng(options.seed);
    GradCheckResult result;
    for (Parameter* p : params) {
        std::vector<std::size_t> coords(p->value.size());
        std::iota(coords.begin(), coords.end(), std::size_t{0});
        if (coords.size() > options.max_coords_per_param) {
            std::shuffle(coords.begin(), coords.end(), rng);
            coords.resize(options.max_coords_per_param);
            std::sort(coords.begin(), coords.end());
        }
        for (std::size_t k : coords) {
            const Real saved = p->value[k];
            p->value[k] = saved + options.epsilon;
            const Real up = evaluate(loss_fn);
            p->value[k] = saved - options.epsilon;
            const Real down = evaluate(loss_fn);
            p->value[k] = saved;
            const Real numeric = (up - down) / (2.0 * options.epsilon);
            const Real analytic = p->grad[k];
            const Real denom = std::max({std::abs(numeric), std::abs(analytic), options.floor});
            const Real rel = std::abs(numeric - analytic) / denom;
            ++result.coords_checked;
            if (rel > result.max_relative_error) {
                result.max_relative_error = rel;
                result.worst_parameter = p->name + "[" + std::to_string(k) + "]";
            }
        }
    }
    for (Parameter* p : params) p->zero_grad();
    return result;
}

GradCheckResult grad_check(const LossFn& loss_fn, ParamStore& store, const GradCheckOptions& options) {
    std::vector<Parameter*> ps;
    for (std::size_t i = 0; i < store.size(); ++i) ps.push_back(&store[i]);
    return grad_check(loss_fn, ps, options);
}

}  // namespace tcm
