#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace adaptune {

struct ScorePair {
    double s_pos = 0.0;
    double s_neg = 0.0;
};

/// Positive/negative cosine similarities for a batch of images against
/// every disease prompt pair. Shapes are batch x diseases.
struct BatchScores {
    Eigen::MatrixXd s_pos;
    Eigen::MatrixXd s_neg;

    Eigen::Index rows() const noexcept { return s_pos.rows(); }
    Eigen::Index cols() const noexcept { return s_pos.cols(); }
    ScorePair at(Eigen::Index i, Eigen::Index j) const { return {s_pos(i, j), s_neg(i, j)}; }
    /// z = S+ - S-, in [-2, 2].
    Eigen::MatrixXd logits() const { return s_pos - s_neg; }
};

using BoolMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

double cosine(std::span<const double> u, std::span<const double> v);
double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v);

/// Rows of each argument are embeddings: images N x dim, prompts C x dim.
BatchScores score_batch(const Eigen::MatrixXd& images, const Eigen::MatrixXd& positive,
                        const Eigen::MatrixXd& negative);

struct LossOptions {
    /// Divide by N * (masked disease count) instead of N.
    bool per_disease_normalization = false;
};

struct LossResult {
    double loss = 0.0;
    Eigen::MatrixXd dloss_dlogits;  // N x C, zero on unmasked columns
};

/// Binary cross-entropy on the logits S+ - S-, summed over masked diseases
/// and divided by the batch size. `labels` holds 0/1 values.
LossResult bce_loss(const BatchScores& scores, const Eigen::MatrixXd& labels,
                    std::span<const std::uint8_t> mask, LossOptions options = {});

/// Presence wherever S+ >= S- (ties count as present).
BoolMatrix predict(const BatchScores& scores);

struct ScoreGradients {
    Eigen::MatrixXd images;
    Eigen::MatrixXd positive;
    Eigen::MatrixXd negative;
};

/// Chain rule from dL/dz back through both cosine terms to the three inputs
/// of `score_batch`.
ScoreGradients backprop_scores(const Eigen::MatrixXd& images, const Eigen::MatrixXd& positive,
                               const Eigen::MatrixXd& negative, const Eigen::MatrixXd& dloss_dlogits);

/// log(1 + exp(x)) without overflow.
double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

}  // namespace adaptune
