#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "tcm/autodiff.hpp"
#include "tcm/params.hpp"

namespace tcm {

struct AdamState {
    std::vector<Tensor> m;  // first moments, one per parameter in store order
    std::vector<Tensor> v;  // second moments
    std::uint64_t t = 0;
    Real beta1 = 0.9;
    Real beta2 = 0.999;
    Real eps = 1e-8;
    Real lr = 1e-3;
    Real lr_decay = 0.97;
};

AdamState make_adam(const ParamStore& store, Real lr = 1e-3, Real lr_decay = 0.97);

// Bias-corrected Adam update from the gradients currently held in the store.
// Throws (naming the parameter) if any gradient is non-finite; nothing is updated then.
void adam_step(ParamStore& store, AdamState& state);

// lr <- lr * lr_decay
void decay_learning_rate(AdamState& state);

struct GradCheckOptions {
    Real epsilon = 1e-5;
    // Parameters with more scalars than this are checked on a random subsample of this size.
    std::size_t max_coords_per_param = 64;
    // Denominator floor of the relative error |a - n| / max(|a|, |n|, floor).
    Real floor = 1e-6;
    std::uint64_t seed = 1234;
};

struct GradCheckResult {
    Real max_relative_error = 0.0;
    std::string worst_parameter;
    std::size_t coords_checked = 0;
};

using LossFn = std::function<Var(Tape&)>;

// Central-difference check of backprop gradients for the given parameters.
// Throws if two forward passes at the same point disagree (non-deterministic loss).
GradCheckResult grad_check(const LossFn& loss_fn, std::span<Parameter* const> params,
                           const GradCheckOptions& options = {});
GradCheckResult grad_check(const LossFn& loss_fn, ParamStore& store, const GradCheckOptions& options = {});

}  // namespace tcm
