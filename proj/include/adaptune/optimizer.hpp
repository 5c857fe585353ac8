#pragma once

#include "adaptune/adaptors.hpp"

#include <cstdint>
#include <span>

namespace adaptune {

struct AdamHyper {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct AdamState {
    AdamHyper hyper;
    std::int64_t step_count = 0;
    ParamList first_moment;
    ParamList second_moment;

    /// Fresh state with zero moments shaped like `params`.
    static AdamState zeros_like(const ParamList& params, AdamHyper hyper = {});
};

/// One bias-corrected Adam update, in place. Throws NonFiniteGradient
/// (leaving state and params untouched) if any gradient entry is NaN or inf.
void adam_step(AdamState& state, std::span<Eigen::MatrixXd> params, std::span<const Eigen::MatrixXd> grads);

}  // namespace adaptune
