#pragma once

#include "adaptune/adaptors.hpp"
#include "adaptune/scoring.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace adaptune {

/// Inputs of the training objective for one minibatch, all in the frozen
/// (pre-adaptor) embedding space.
struct ObjectiveInputs {
    const Eigen::MatrixXd& images;    // N x dim
    const Eigen::MatrixXd& labels;    // N x C, 0/1
    const Eigen::MatrixXd& positive;  // C x dim
    const Eigen::MatrixXd& negative;  // C x dim
    std::span<const std::uint8_t> mask;
};

struct ObjectiveGradients {
    double loss = 0.0;
    std::vector<ParamList> store_grads;  // indexed like AdaptorSet::stores()
    Eigen::MatrixXd images;              // dL / d frozen image embeddings
    Eigen::MatrixXd positive;            // zero rows for unmasked diseases
    Eigen::MatrixXd negative;
};

/// Loss of the adapted batch. Prompts of unmasked diseases are never passed
/// through the text adaptor.
double objective_loss(const AdaptorSet& set, const ObjectiveInputs& in, LossOptions options = {});

/// Loss and exact gradients with respect to every parameter store and every
/// frozen input embedding. With the shared placement the image and text
/// contributions land in the same store.
ObjectiveGradients objective_gradients(const AdaptorSet& set, const ObjectiveInputs& in, LossOptions options = {});

}  // namespace adaptune
