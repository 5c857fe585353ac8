#include "adaptune/synth.hpp"

#include "adaptune/error.hpp"
#include "adaptune/rng.hpp"

#include <cmath>

namespace adaptune {
namespace {

const char* const kCompetitionTasks[] = {"Atelectasis", "Cardiomegaly", "Consolidation", "Edema",
                                          "Pleural Effusion"};

Eigen::VectorXd gaussian_vector(Rng& rng, std::size_t dim) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.gaussian();
    return v;
}

Eigen::VectorXd unit_gaussian(Rng& rng, std::size_t dim) {
    Eigen::VectorXd v = gaussian_vector(rng, dim);
    while (v.norm() == 0.0) v = gaussian_vector(rng, dim);
    return v / v.norm();
}

void store_row(std::vector<float>& out, const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(static_cast<float>(v(i)));
}

EmbeddingDataset make_split(const SynthConfig& cfg, Split split, std::size_t count, const Eigen::MatrixXd& dirs,
                            const std::vector<double>& prevalence, const std::vector<std::string>& names) {
    const std::string tag(to_string(split));
    Rng label_rng(cfg.seed, "labels_" + tag);
    Rng image_rng(cfg.seed, "images_" + tag);
    const std::size_t c = cfg.num_diseases;

    EmbeddingDataset ds;
    ds.split = split;
    ds.dim = cfg.dim;
    ds.num_diseases = c;
    ds.disease_names = names;
    ds.embeddings.reserve(count * cfg.dim);
    ds.labels.reserve(count * c);

    const Eigen::VectorXd base = dirs.row(0).transpose();
    for (std::size_t i = 0; i < count; ++i) {
        // With probability rho a disease reuses the image's shared uniform,
        // which correlates labels while keeping each marginal prevalence.
        const double shared = label_rng.uniform();
        Eigen::VectorXd x = base;
        for (std::size_t j = 0; j < c; ++j) {
            const double pick = label_rng.uniform();
            const double own = label_rng.uniform();
            const double u = pick < cfg.label_correlation ? shared : own;
            const std::uint8_t y = u < prevalence[j] ? 1 : 0;
            ds.labels.push_back(y);
            x += (y ? cfg.kappa : -cfg.kappa) * dirs.row(static_cast<Eigen::Index>(j + 1)).transpose();
        }
        if (cfg.image_noise_sigma > 0.0) x += cfg.image_noise_sigma * gaussian_vector(image_rng, cfg.dim);
        store_row(ds.embeddings, x);
    }
    return ds;
}

PromptBank make_bank(const SynthConfig& cfg, PromptStyle style, const Eigen::MatrixXd& dirs) {
    Rng rng(cfg.seed, "prompts_" + std::string(to_string(style)));
    double alpha = cfg.alpha_random;
    if (style == PromptStyle::Template) alpha = cfg.alpha_template;
    if (style == PromptStyle::Generative) alpha = cfg.alpha_generative;

    PromptBank bank;
    bank.style = style;
    bank.dim = cfg.dim;
    for (std::size_t j = 0; j < cfg.num_diseases; ++j) {
        const Eigen::VectorXd d = dirs.row(static_cast<Eigen::Index>(j + 1)).transpose();
        const Eigen::VectorXd g_pos = unit_gaussian(rng, cfg.dim);
        const Eigen::VectorXd g_neg = unit_gaussian(rng, cfg.dim);
        Eigen::VectorXd pos = alpha * d + (1.0 - alpha) * g_pos;
        Eigen::VectorXd neg = -alpha * d + (1.0 - alpha) * g_neg;
        store_row(bank.positive, pos / pos.norm());
        store_row(bank.negative, neg / neg.norm());
    }
    return bank;
}

}  // namespace

void SynthConfig::validate() const {
    if (dim < 2) fail(ErrorCode::ConfigError, "synth.dim must be >= 2");
    if (num_diseases < 1) fail(ErrorCode::ConfigError, "synth.num_diseases must be >= 1");
    if (dim < num_diseases + 1) {
        fail(ErrorCode::ConfigError, "synth.dim must exceed num_diseases (base vector plus one direction each)");
    }
    if (n_train < 1 || n_test < 2) fail(ErrorCode::ConfigError, "synth needs n_train >= 1 and n_test >= 2");
    if (!disease_prevalence.empty() && disease_prevalence.size() != num_diseases) {
        fail(ErrorCode::ConfigError, "synth.disease_prevalence needs one value per disease");
    }
    for (double p : resolved_prevalence()) {
        if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::ConfigError, "prevalences must lie in (0, 1)");
    }
    if (!(image_noise_sigma >= 0.0) || !std::isfinite(image_noise_sigma)) {
        fail(ErrorCode::ConfigError, "synth.image_noise_sigma must be finite and >= 0");
    }
    if (!(kappa > 0.0) || !std::isfinite(kappa)) fail(ErrorCode::ConfigError, "synth.kappa must be positive");
    for (double a : {alpha_template, alpha_generative}) {
        if (!(a >= 0.0 && a <= 1.0)) fail(ErrorCode::ConfigError, "prompt alignment must lie in [0, 1]");
    }
    if (alpha_random != 0.0) fail(ErrorCode::ConfigError, "random-style prompt alignment is fixed at 0");
    if (!(label_correlation >= 0.0 && label_correlation < 1.0)) {
        fail(ErrorCode::ConfigError, "synth.label_correlation must lie in [0, 1)");
    }
    if (!disease_names.empty() && disease_names.size() != num_diseases) {
        fail(ErrorCode::ConfigError, "synth.disease_names needs one name per disease");
    }
}

std::vector<double> SynthConfig::resolved_prevalence() const {
    return disease_prevalence.empty() ? std::vector<double>(num_diseases, 0.3) : disease_prevalence;
}

std::vector<std::string> SynthConfig::resolved_disease_names() const {
    if (!disease_names.empty()) return disease_names;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < num_diseases; ++j) {
        names.push_back(num_diseases == 5 ? kCompetitionTasks[j] : "disease_" + std::to_string(j + 1));
    }
    return names;
}

Eigen::MatrixXd orthonormal_directions(std::size_t count, std::size_t dim, std::uint64_t seed) {
    if (count > dim) fail(ErrorCode::ConfigError, "cannot fit more orthonormal directions than dimensions");
    Rng rng(seed, "directions");
    Eigen::MatrixXd q(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
        Eigen::VectorXd v = gaussian_vector(rng, dim);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index k = 0; k < r; ++k) v -= q.row(k).dot(v) * q.row(k).transpose();
        }
        q.row(r) = v.transpose() / v.norm();
    }
    return q;
}

DatasetBundle generate(const SynthConfig& config) {
    config.validate();
    const auto names = config.resolved_disease_names();
    const auto prevalence = config.resolved_prevalence();
    // Row 0 is the shared base vector, rows 1..C the disease directions.
    const Eigen::MatrixXd dirs = orthonormal_directions(config.num_diseases + 1, config.dim, config.seed);

    DatasetBundle bundle;
    bundle.disease_names = names;
    bundle.train = make_split(config, Split::Train, config.n_train, dirs, prevalence, names);
    bundle.test = make_split(config, Split::Test, config.n_test, dirs, prevalence, names);
    for (PromptStyle style : kAllPromptStyles) bundle.prompt_banks.push_back(make_bank(config, style, dirs));
    bundle.validate();
    return bundle;
}

std::filesystem::path generate_to(const std::filesystem::path& directory, const SynthConfig& config) {
    return write_dataset(directory, generate(config));
}

}  // namespace adaptune
