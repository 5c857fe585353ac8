#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace adaptune {

class Rng;

enum class AdaptorKind { Dense, Mlp };
enum class Placement { ImageOnly, TextOnly, Shared, Both };
enum class Activation { Relu };
enum class InitScheme { ScaledUniform, Identity };

std::string_view to_string(AdaptorKind kind) noexcept;
std::string_view to_string(Placement placement) noexcept;
std::string_view to_string(InitScheme init) noexcept;
AdaptorKind parse_adaptor_kind(std::string_view text);
Placement parse_placement(std::string_view text);
InitScheme parse_init_scheme(std::string_view text);

inline constexpr Placement kAllPlacements[] = {Placement::ImageOnly, Placement::TextOnly,
                                               Placement::Shared, Placement::Both};

struct AdaptorConfig {
    AdaptorKind kind = AdaptorKind::Mlp;
    Placement placement = Placement::Both;
    std::size_t dim = 0;
    std::size_t hidden_dim = 0;  // 0 means "same as dim"
    Activation activation = Activation::Relu;
    InitScheme init = InitScheme::ScaledUniform;
    std::uint64_t seed = 0;

    std::size_t resolved_hidden_dim() const noexcept { return hidden_dim == 0 ? dim : hidden_dim; }
};

/// Ordered parameter tensors. Biases are stored as single-column matrices.
using ParamList = std::vector<Eigen::MatrixXd>;

/// Values saved by `forward` for the matching `backward` call. Rows are
/// batch elements.
struct ActivationCache {
    AdaptorKind kind = AdaptorKind::Dense;
    Eigen::MatrixXd input;
    Eigen::MatrixXd pre_activation;  // mlp only: X W1^T + b1
    Eigen::MatrixXd hidden;          // mlp only: relu(pre_activation)
};

struct ForwardResult {
    Eigen::MatrixXd output;
    ActivationCache cache;
};

struct BackwardResult {
    ParamList param_grads;
    Eigen::MatrixXd grad_input;
};

/// A width-preserving dense layer or one-hidden-layer relu MLP.
///
/// Parameter order: dense {W[dim x dim], b[dim]}; mlp {W1[hidden x dim],
/// b1[hidden], W2[dim x hidden], b2[dim]}.
class Adaptor {
public:
    Adaptor() = default;
    Adaptor(AdaptorKind kind, std::size_t dim, std::size_t hidden_dim);

    /// scaled_uniform: weights ~ U(-1/sqrt(fan_in), +1/sqrt(fan_in)), zero biases.
    /// identity: exact identity map; an mlp lifts x through [I; -I] so it
    /// needs hidden_dim >= 2 * dim.
    static Adaptor create(AdaptorKind kind, std::size_t dim, std::size_t hidden_dim, InitScheme init,
                          Rng& rng);

    AdaptorKind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return dim_; }
    std::size_t hidden_dim() const noexcept { return hidden_dim_; }

    ParamList& parameters() noexcept { return params_; }
    const ParamList& parameters() const noexcept { return params_; }
    ParamList zero_like() const;

    /// Batch forward; rows of `x` are inputs.
    ForwardResult forward(const Eigen::MatrixXd& x) const;
    Eigen::VectorXd forward(const Eigen::VectorXd& x) const;

    /// Gradients of a scalar objective whose gradient at the output is `grad_out`.
    BackwardResult backward(const ActivationCache& cache, const Eigen::MatrixXd& grad_out) const;

    /// Forward without keeping a cache.
    Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;

    void check_finite() const;

private:
    AdaptorKind kind_ = AdaptorKind::Dense;
    std::size_t dim_ = 0;
    std::size_t hidden_dim_ = 0;
    ParamList params_;
};

/// Image and text adaptors in one of four placements.
///
/// The set owns one or two parameter stores. With `Shared` both paths refer
/// to the same store, so an update through either path is seen by both.
/// A path without an adaptor is the identity.
class AdaptorSet {
public:
    AdaptorSet() = default;

    Placement placement() const noexcept { return placement_; }
    const AdaptorConfig& config() const noexcept { return config_; }

    Adaptor* image_adaptor() noexcept;
    const Adaptor* image_adaptor() const noexcept;
    Adaptor* text_adaptor() noexcept;
    const Adaptor* text_adaptor() const noexcept;

    std::optional<std::size_t> image_slot() const noexcept { return image_slot_; }
    std::optional<std::size_t> text_slot() const noexcept { return text_slot_; }

    /// Distinct parameter stores, in slot order.
    std::vector<Adaptor>& stores() noexcept { return stores_; }
    const std::vector<Adaptor>& stores() const noexcept { return stores_; }

    Eigen::MatrixXd apply_image(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd apply_text(const Eigen::MatrixXd& x) const;

    /// FNV-1a over the little-endian bytes of every parameter, in order.
    std::uint64_t checksum() const;

    friend AdaptorSet make_adaptor_set(const AdaptorConfig& config);
    friend AdaptorSet make_adaptor_set(const AdaptorConfig& config, std::vector<Adaptor> stores);

private:
    AdaptorConfig config_;
    Placement placement_ = Placement::Both;
    std::vector<Adaptor> stores_;
    std::optional<std::size_t> image_slot_;
    std::optional<std::size_t> text_slot_;
};

/// Deterministic for a fixed config seed. Throws ConfigError for bad
/// dimensions and IdentityInitInfeasible for an undersized identity mlp.
AdaptorSet make_adaptor_set(const AdaptorConfig& config);

/// Wraps pre-built stores (e.g. from a checkpoint) in the given placement.
AdaptorSet make_adaptor_set(const AdaptorConfig& config, std::vector<Adaptor> stores);

/// Number of distinct parameter stores a placement needs.
std::size_t store_count(Placement placement) noexcept;

}  // namespace adaptune
