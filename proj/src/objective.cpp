#include "adaptune/objective.hpp"

#include "adaptune/error.hpp"

#include <optional>

namespace adaptune {
namespace {

struct Forward {
    std::vector<Eigen::Index> active;
    Eigen::MatrixXd text_in;  // active positives stacked over active negatives
    std::optional<ForwardResult> image;
    std::optional<ForwardResult> text;
    Eigen::MatrixXd e_img, e_pos, e_neg;
    Eigen::MatrixXd labels;
};

Forward forward_pass(const AdaptorSet& set, const ObjectiveInputs& in) {
    const Eigen::Index c = in.positive.rows();
    if (in.negative.rows() != c || static_cast<Eigen::Index>(in.mask.size()) != c || in.labels.cols() != c ||
        in.labels.rows() != in.images.rows()) {
        fail(ErrorCode::ShapeMismatch, "objective inputs disagree in shape");
    }
    Forward f;
    for (Eigen::Index j = 0; j < c; ++j) {
        if (in.mask[static_cast<std::size_t>(j)]) f.active.push_back(j);
    }
    if (f.active.empty()) fail(ErrorCode::EmptyMask, "label mask selects no disease");
    const auto k = static_cast<Eigen::Index>(f.active.size());

    f.text_in.resize(2 * k, in.positive.cols());
    f.labels.resize(in.labels.rows(), k);
    for (Eigen::Index a = 0; a < k; ++a) {
        f.text_in.row(a) = in.positive.row(f.active[static_cast<std::size_t>(a)]);
        f.text_in.row(k + a) = in.negative.row(f.active[static_cast<std::size_t>(a)]);
        f.labels.col(a) = in.labels.col(f.active[static_cast<std::size_t>(a)]);
    }

    if (const auto* a = set.image_adaptor()) f.image = a->forward(in.images);
    f.e_img = f.image ? f.image->output : in.images;
    if (const auto* a = set.text_adaptor()) f.text = a->forward(f.text_in);
    const Eigen::MatrixXd& e_txt = f.text ? f.text->output : f.text_in;
    f.e_pos = e_txt.topRows(k);
    f.e_neg = e_txt.bottomRows(k);
    return f;
}

}  // namespace

double objective_loss(const AdaptorSet& set, const ObjectiveInputs& in, LossOptions options) {
    const Forward f = forward_pass(set, in);
    const std::vector<std::uint8_t> all_on(f.active.size(), 1);
    return bce_loss(score_batch(f.e_img, f.e_pos, f.e_neg), f.labels, all_on, options).loss;
}

ObjectiveGradients objective_gradients(const AdaptorSet& set, const ObjectiveInputs& in, LossOptions options) {
    const Forward f = forward_pass(set, in);
    const auto k = static_cast<Eigen::Index>(f.active.size());
    const std::vector<std::uint8_t> all_on(f.active.size(), 1);
    const LossResult loss = bce_loss(score_batch(f.e_img, f.e_pos, f.e_neg), f.labels, all_on, options);
    const ScoreGradients g = backprop_scores(f.e_img, f.e_pos, f.e_neg, loss.dloss_dlogits);

    ObjectiveGradients out;
    out.loss = loss.loss;
    for (const auto& s : set.stores()) out.store_grads.push_back(s.zero_like());

    if (f.image) {
        BackwardResult b = set.image_adaptor()->backward(f.image->cache, g.images);
        auto& dst = out.store_grads[*set.image_slot()];
        for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += b.param_grads[p];
        out.images = std::move(b.grad_input);
    } else {
        out.images = g.images;
    }

    Eigen::MatrixXd g_txt(2 * k, g.positive.cols());
    g_txt << g.positive, g.negative;
    if (f.text) {
        BackwardResult b = set.text_adaptor()->backward(f.text->cache, g_txt);
        auto& dst = out.store_grads[*set.text_slot()];
        for (std::size_t p = 0; p < dst.size(); ++p) dst[p] += b.param_grads[p];
        g_txt = std::move(b.grad_input);
    }
    out.positive = Eigen::MatrixXd::Zero(in.positive.rows(), in.positive.cols());
    out.negative = Eigen::MatrixXd::Zero(in.negative.rows(), in.negative.cols());
    for (Eigen::Index a = 0; a < k; ++a) {
        out.positive.row(f.active[static_cast<std::size_t>(a)]) = g_txt.row(a);
        out.negative.row(f.active[static_cast<std::size_t>(a)]) = g_txt.row(k + a);
    }
    return out;
}

}  // namespace adaptune
