#pragma once

#include "adaptune/datamodel.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace adaptune {

/// Parameters of the synthetic embedding world.
///
/// Each image embedding is a shared unit base vector plus a signed
/// contribution kappa * (2y_j - 1) * d_j for every disease direction d_j,
/// plus isotropic gaussian noise of standard deviation `image_noise_sigma`
/// per coordinate. Prompt alignment alpha controls how strongly the
/// positive/negative prompt embeddings point along +d_j / -d_j.
struct SynthConfig {
    std::size_t dim = 64;
    std::size_t num_diseases = 5;
    std::size_t n_train = 2000;
    std::size_t n_test = 1000;
    std::vector<double> disease_prevalence;  // empty: 0.3 for every disease
    double image_noise_sigma = 0.5;
    double kappa = 0.5;
    double alpha_template = 0.95;
    double alpha_generative = 0.7;
    double alpha_random = 0.0;  // must stay 0
    double label_correlation = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> disease_names;  // empty: defaults

    /// Throws ConfigError.
    void validate() const;
    std::vector<double> resolved_prevalence() const;
    std::vector<std::string> resolved_disease_names() const;
};

/// `count` orthonormal rows in `dim` dimensions, from seeded gaussian draws
/// with two passes of modified Gram-Schmidt.
Eigen::MatrixXd orthonormal_directions(std::size_t count, std::size_t dim, std::uint64_t seed);

/// Builds train/test splits and one prompt bank per style. Pure function of
/// the config.
DatasetBundle generate(const SynthConfig& config);

/// generate() followed by write_dataset(); returns the manifest path.
std::filesystem::path generate_to(const std::filesystem::path& directory, const SynthConfig& config);

}  // namespace adaptune
