#include "adaptune/scoring.hpp"

#include "adaptune/error.hpp"

#include <cmath>
#include <string>

namespace adaptune {
namespace {

Eigen::VectorXd row_norms(const Eigen::MatrixXd& m, const char* what) {
    Eigen::VectorXd n = m.rowwise().norm();
    for (Eigen::Index i = 0; i < n.size(); ++i) {
        if (!(n(i) > 0.0)) {
            fail(ErrorCode::ZeroNormVector, std::string(what) + " row " + std::to_string(i) + " has zero norm");
        }
    }
    return n;
}

void check_widths(const Eigen::MatrixXd& images, const Eigen::MatrixXd& positive,
                  const Eigen::MatrixXd& negative) {
    if (images.cols() != positive.cols() || images.cols() != negative.cols() ||
        positive.rows() != negative.rows()) {
        fail(ErrorCode::ShapeMismatch, "image and prompt matrices disagree in shape");
    }
}

// rows of `m` divided by `norms`
Eigen::MatrixXd normalized(const Eigen::MatrixXd& m, const Eigen::VectorXd& norms) {
    return norms.cwiseInverse().asDiagonal() * m;
}

}  // namespace

double softplus(double x) noexcept {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) fail(ErrorCode::ShapeMismatch, "cosine of vectors with different widths");
    double dot = 0.0, uu = 0.0, vv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        uu += u[i] * u[i];
        vv += v[i] * v[i];
    }
    if (!(uu > 0.0) || !(vv > 0.0)) fail(ErrorCode::ZeroNormVector, "cosine of a zero-norm vector");
    return dot / (std::sqrt(uu) * std::sqrt(vv));
}

double cosine(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    return cosine(std::span(u.data(), static_cast<std::size_t>(u.size())),
                  std::span(v.data(), static_cast<std::size_t>(v.size())));
}

BatchScores score_batch(const Eigen::MatrixXd& images, const Eigen::MatrixXd& positive,
                        const Eigen::MatrixXd& negative) {
    check_widths(images, positive, negative);
    const Eigen::VectorXd ni = row_norms(images, "image");
    const Eigen::VectorXd np = row_norms(positive, "positive prompt");
    const Eigen::VectorXd nn = row_norms(negative, "negative prompt");

    BatchScores s;
    s.s_pos = images * positive.transpose();
    s.s_neg = images * negative.transpose();
    for (Eigen::Index j = 0; j < s.s_pos.cols(); ++j) {
        for (Eigen::Index i = 0; i < s.s_pos.rows(); ++i) {
            s.s_pos(i, j) /= ni(i) * np(j);
            s.s_neg(i, j) /= ni(i) * nn(j);
        }
    }
    return s;
}

LossResult bce_loss(const BatchScores& scores, const Eigen::MatrixXd& labels,
                    std::span<const std::uint8_t> mask, LossOptions options) {
    const Eigen::Index n = scores.rows();
    const Eigen::Index c = scores.cols();
    if (labels.rows() != n || labels.cols() != c || static_cast<Eigen::Index>(mask.size()) != c) {
        fail(ErrorCode::ShapeMismatch, "scores, labels and mask disagree in shape");
    }
    std::size_t active = 0;
    for (auto m : mask) active += m ? 1 : 0;
    if (active == 0) fail(ErrorCode::EmptyMask, "label mask selects no disease");
    if (n == 0) fail(ErrorCode::ShapeMismatch, "empty batch");

    double denom = static_cast<double>(n);
    if (options.per_disease_normalization) denom *= static_cast<double>(active);

    LossResult r;
    r.dloss_dlogits = Eigen::MatrixXd::Zero(n, c);
    double total = 0.0;
    // Fixed row-major summation order.
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) {
            if (!mask[static_cast<std::size_t>(j)]) continue;
            const double z = scores.s_pos(i, j) - scores.s_neg(i, j);
            const double y = labels(i, j);
            total += y * softplus(-z) + (1.0 - y) * softplus(z);
            r.dloss_dlogits(i, j) = (sigmoid(z) - y) / denom;
        }
    }
    r.loss = total / denom;
    return r;
}

BoolMatrix predict(const BatchScores& scores) {
    return scores.s_pos.array() >= scores.s_neg.array();
}

ScoreGradients backprop_scores(const Eigen::MatrixXd& images, const Eigen::MatrixXd& positive,
                               const Eigen::MatrixXd& negative, const Eigen::MatrixXd& dloss_dlogits) {
    check_widths(images, positive, negative);
    if (dloss_dlogits.rows() != images.rows() || dloss_dlogits.cols() != positive.rows()) {
        fail(ErrorCode::ShapeMismatch, "dloss_dlogits must be batch x diseases");
    }
    const Eigen::VectorXd ni = row_norms(images, "image");
    const Eigen::VectorXd np = row_norms(positive, "positive prompt");
    const Eigen::VectorXd nn = row_norms(negative, "negative prompt");
    const Eigen::MatrixXd ui = normalized(images, ni);
    const Eigen::MatrixXd up = normalized(positive, np);
    const Eigen::MatrixXd un = normalized(negative, nn);
    const Eigen::MatrixXd s_pos = ui * up.transpose();
    const Eigen::MatrixXd s_neg = ui * un.transpose();

    // z = S+ - S-, so dL/dS+ = G and dL/dS- = -G.
    // d cos(u, v)/du = (v_hat - cos * u_hat) / |u|
    const Eigen::MatrixXd& g = dloss_dlogits;
    const Eigen::MatrixXd gp = g.cwiseProduct(s_pos);
    const Eigen::MatrixXd gn = g.cwiseProduct(s_neg);

    ScoreGradients out;
    const Eigen::MatrixXd img_dir = g * up - g * un;
    const Eigen::VectorXd img_radial = gp.rowwise().sum() - gn.rowwise().sum();
    out.images = ni.cwiseInverse().asDiagonal() * (img_dir - img_radial.asDiagonal() * ui);

    const Eigen::MatrixXd pos_dir = g.transpose() * ui;
    const Eigen::VectorXd pos_radial = gp.colwise().sum().transpose();
    out.positive = np.cwiseInverse().asDiagonal() * (pos_dir - pos_radial.asDiagonal() * up);

    const Eigen::MatrixXd neg_dir = g.transpose() * ui;
    const Eigen::VectorXd neg_radial = gn.colwise().sum().transpose();
    out.negative = -(nn.cwiseInverse().asDiagonal() * (neg_dir - neg_radial.asDiagonal() * un));
    return out;
}

}  // namespace adaptune
