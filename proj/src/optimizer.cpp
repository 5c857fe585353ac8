#include "adaptune/optimizer.hpp"

#include "adaptune/error.hpp"

#include <cmath>
#include <string>

namespace adaptune {

AdamState AdamState::zeros_like(const ParamList& params, AdamHyper hyper) {
    AdamState s;
    s.hyper = hyper;
    for (const auto& p : params) {
        s.first_moment.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
        s.second_moment.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    }
    return s;
}

void adam_step(AdamState& state, std::span<Eigen::MatrixXd> params, std::span<const Eigen::MatrixXd> grads) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size()) {
        fail(ErrorCode::ShapeMismatch, "adam: parameter, gradient and moment lists differ in length");
    }
    for (std::size_t k = 0; k < params.size(); ++k) {
        if (params[k].rows() != grads[k].rows() || params[k].cols() != grads[k].cols() ||
            state.first_moment[k].rows() != params[k].rows() || state.first_moment[k].cols() != params[k].cols()) {
            fail(ErrorCode::ShapeMismatch, "adam: shape mismatch in tensor " + std::to_string(k));
        }
        if (!grads[k].allFinite()) {
            fail(ErrorCode::NonFiniteGradient, "adam: non-finite gradient in tensor " + std::to_string(k) +
                                                   " at step " + std::to_string(state.step_count + 1));
        }
    }

    const auto& h = state.hyper;
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(h.beta1, t);
    const double bc2 = 1.0 - std::pow(h.beta2, t);

    for (std::size_t k = 0; k < params.size(); ++k) {
        auto m = state.first_moment[k].array();
        auto v = state.second_moment[k].array();
        const auto g = grads[k].array();
        m = h.beta1 * m + (1.0 - h.beta1) * g;
        v = h.beta2 * v + (1.0 - h.beta2) * g.square();
        params[k].array() -= h.lr * (m / bc1) / ((v / bc2).sqrt() + h.eps);
    }
}

}  // namespace adaptune
