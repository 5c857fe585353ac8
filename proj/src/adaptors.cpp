#include "adaptune/adaptors.hpp"

#include "adaptune/error.hpp"
#include "adaptune/rng.hpp"

#include <cmath>
#include <string>

namespace adaptune {

std::string_view to_string(AdaptorKind kind) noexcept {
    return kind == AdaptorKind::Dense ? "dense" : "mlp";
}

std::string_view to_string(Placement placement) noexcept {
    switch (placement) {
    case Placement::ImageOnly: return "image_only";
    case Placement::TextOnly: return "text_only";
    case Placement::Shared: return "shared";
    case Placement::Both: return "both";
    }
    return "both";
}

std::string_view to_string(InitScheme init) noexcept {
    return init == InitScheme::Identity ? "identity" : "scaled_uniform";
}

AdaptorKind parse_adaptor_kind(std::string_view text) {
    if (text == "dense") return AdaptorKind::Dense;
    if (text == "mlp") return AdaptorKind::Mlp;
    fail(ErrorCode::ConfigError, "unknown adaptor kind '" + std::string(text) + "'");
}

Placement parse_placement(std::string_view text) {
    for (Placement p : kAllPlacements) {
        if (to_string(p) == text) return p;
    }
    fail(ErrorCode::ConfigError, "unknown placement '" + std::string(text) + "'");
}

InitScheme parse_init_scheme(std::string_view text) {
    if (text == "scaled_uniform") return InitScheme::ScaledUniform;
    if (text == "identity") return InitScheme::Identity;
    fail(ErrorCode::ConfigError, "unknown init scheme '" + std::string(text) + "'");
}

Adaptor::Adaptor(AdaptorKind kind, std::size_t dim, std::size_t hidden_dim)
    : kind_(kind), dim_(dim), hidden_dim_(kind == AdaptorKind::Mlp ? hidden_dim : 0) {
    const auto d = static_cast<Eigen::Index>(dim);
    const auto h = static_cast<Eigen::Index>(hidden_dim_);
    if (kind == AdaptorKind::Dense) {
        params_ = {Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, 1)};
    } else {
        params_ = {Eigen::MatrixXd::Zero(h, d), Eigen::MatrixXd::Zero(h, 1), Eigen::MatrixXd::Zero(d, h),
                   Eigen::MatrixXd::Zero(d, 1)};
    }
}

Adaptor Adaptor::create(AdaptorKind kind, std::size_t dim, std::size_t hidden_dim, InitScheme init,
                        Rng& rng) {
    if (dim < 2) fail(ErrorCode::ConfigError, "adaptor dim must be >= 2");
    if (kind == AdaptorKind::Mlp && hidden_dim < 1) fail(ErrorCode::ConfigError, "mlp hidden_dim must be >= 1");
    if (init == InitScheme::Identity && kind == AdaptorKind::Mlp && hidden_dim < 2 * dim) {
        fail(ErrorCode::IdentityInitInfeasible, "identity mlp needs hidden_dim >= " + std::to_string(2 * dim) +
                                                    ", got " + std::to_string(hidden_dim));
    }

    Adaptor a(kind, dim, hidden_dim);
    const auto d = static_cast<Eigen::Index>(dim);
    if (init == InitScheme::Identity) {
        if (kind == AdaptorKind::Dense) {
            a.params_[0].setIdentity();
        } else {
            // relu(x) - relu(-x) == x
            a.params_[0].topRows(d).setIdentity();
            a.params_[0].middleRows(d, d) = -Eigen::MatrixXd::Identity(d, d);
            a.params_[2].leftCols(d).setIdentity();
            a.params_[2].middleCols(d, d) = -Eigen::MatrixXd::Identity(d, d);
        }
        return a;
    }

    for (std::size_t p = 0; p < a.params_.size(); p += 2) {
        auto& w = a.params_[p];
        const double bound = 1.0 / std::sqrt(static_cast<double>(w.cols()));
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-bound, bound);
        }
    }
    return a;
}

ParamList Adaptor::zero_like() const {
    ParamList out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(Eigen::MatrixXd::Zero(p.rows(), p.cols()));
    return out;
}

ForwardResult Adaptor::forward(const Eigen::MatrixXd& x) const {
    if (static_cast<std::size_t>(x.cols()) != dim_) {
        fail(ErrorCode::ShapeMismatch, "adaptor expects width " + std::to_string(dim_) + ", got " +
                                           std::to_string(x.cols()));
    }
    ForwardResult r;
    r.cache.kind = kind_;
    r.cache.input = x;
    if (kind_ == AdaptorKind::Dense) {
        r.output = x * params_[0].transpose();
        r.output.rowwise() += params_[1].col(0).transpose();
    } else {
        r.cache.pre_activation = x * params_[0].transpose();
        r.cache.pre_activation.rowwise() += params_[1].col(0).transpose();
        r.cache.hidden = r.cache.pre_activation.cwiseMax(0.0);
        r.output = r.cache.hidden * params_[2].transpose();
        r.output.rowwise() += params_[3].col(0).transpose();
    }
    if (r.output.cols() != x.cols()) fail(ErrorCode::ShapeMismatch, "adaptor changed embedding width");
    return r;
}

Eigen::VectorXd Adaptor::forward(const Eigen::VectorXd& x) const {
    return forward(Eigen::MatrixXd(x.transpose())).output.row(0).transpose();
}

Eigen::MatrixXd Adaptor::apply(const Eigen::MatrixXd& x) const {
    return forward(x).output;
}

BackwardResult Adaptor::backward(const ActivationCache& cache, const Eigen::MatrixXd& grad_out) const {
    const auto d = static_cast<Eigen::Index>(dim_);
    if (cache.kind != kind_ || cache.input.cols() != d ||
        (kind_ == AdaptorKind::Mlp &&
         (cache.hidden.cols() != static_cast<Eigen::Index>(hidden_dim_) ||
          cache.pre_activation.rows() != cache.input.rows()))) {
        fail(ErrorCode::StaleCache, "activation cache does not belong to this adaptor");
    }
    if (grad_out.cols() != d || grad_out.rows() != cache.input.rows()) {
        fail(ErrorCode::ShapeMismatch, "grad_out shape does not match the cached batch");
    }

    BackwardResult r;
    if (kind_ == AdaptorKind::Dense) {
        r.param_grads = {grad_out.transpose() * cache.input, grad_out.colwise().sum().transpose()};
        r.grad_input = grad_out * params_[0];
    } else {
        const Eigen::MatrixXd grad_hidden = grad_out * params_[2];
        const Eigen::MatrixXd grad_pre =
            grad_hidden.cwiseProduct((cache.pre_activation.array() > 0.0).cast<double>().matrix());
        r.param_grads = {grad_pre.transpose() * cache.input, grad_pre.colwise().sum().transpose(),
                         grad_out.transpose() * cache.hidden, grad_out.colwise().sum().transpose()};
        r.grad_input = grad_pre * params_[0];
    }
    return r;
}

void Adaptor::check_finite() const {
    for (const auto& p : params_) {
        if (!p.allFinite()) fail(ErrorCode::NonFiniteGradient, "adaptor parameter became non-finite");
    }
}

std::size_t store_count(Placement placement) noexcept {
    return placement == Placement::Both ? 2 : 1;
}

Adaptor* AdaptorSet::image_adaptor() noexcept {
    return image_slot_ ? &stores_[*image_slot_] : nullptr;
}
const Adaptor* AdaptorSet::image_adaptor() const noexcept {
    return image_slot_ ? &stores_[*image_slot_] : nullptr;
}
Adaptor* AdaptorSet::text_adaptor() noexcept {
    return text_slot_ ? &stores_[*text_slot_] : nullptr;
}
const Adaptor* AdaptorSet::text_adaptor() const noexcept {
    return text_slot_ ? &stores_[*text_slot_] : nullptr;
}

Eigen::MatrixXd AdaptorSet::apply_image(const Eigen::MatrixXd& x) const {
    const auto* a = image_adaptor();
    return a ? a->apply(x) : x;
}

Eigen::MatrixXd AdaptorSet::apply_text(const Eigen::MatrixXd& x) const {
    const auto* a = text_adaptor();
    return a ? a->apply(x) : x;
}

std::uint64_t AdaptorSet::checksum() const {
    std::uint64_t h = fnv1a64(std::string_view{});
    for (const auto& store : stores_) {
        for (const auto& p : store.parameters()) {
            h = fnv1a64(std::as_bytes(std::span(p.data(), static_cast<std::size_t>(p.size()))), h);
        }
    }
    return h;
}

AdaptorSet make_adaptor_set(const AdaptorConfig& config, std::vector<Adaptor> stores) {
    if (stores.size() != store_count(config.placement)) {
        fail(ErrorCode::ShapeMismatch, "placement '" + std::string(to_string(config.placement)) + "' needs " +
                                           std::to_string(store_count(config.placement)) + " parameter stores");
    }
    for (const auto& s : stores) {
        if (s.kind() != config.kind || s.dim() != config.dim ||
            (config.kind == AdaptorKind::Mlp && s.hidden_dim() != config.resolved_hidden_dim())) {
            fail(ErrorCode::ShapeMismatch, "parameter store does not match adaptor config");
        }
    }
    AdaptorSet set;
    set.config_ = config;
    set.placement_ = config.placement;
    set.stores_ = std::move(stores);
    switch (config.placement) {
    case Placement::ImageOnly: set.image_slot_ = 0; break;
    case Placement::TextOnly: set.text_slot_ = 0; break;
    case Placement::Shared: set.image_slot_ = 0; set.text_slot_ = 0; break;
    case Placement::Both: set.image_slot_ = 0; set.text_slot_ = 1; break;
    }
    return set;
}

AdaptorSet make_adaptor_set(const AdaptorConfig& config) {
    Rng rng(config.seed, "adaptor_init");
    std::vector<Adaptor> stores;
    for (std::size_t i = 0; i < store_count(config.placement); ++i) {
        stores.push_back(
            Adaptor::create(config.kind, config.dim, config.resolved_hidden_dim(), config.init, rng));
    }
    return make_adaptor_set(config, std::move(stores));
}

}  // namespace adaptune
