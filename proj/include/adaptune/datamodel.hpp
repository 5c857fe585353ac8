#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace adaptune {

enum class Split { Train, Test };
enum class PromptStyle { Template, Generative, Random };
enum class Scenario { Joint, ClassIncremental, LabelIncremental, DataIncremental, ZeroShot };

std::string_view to_string(Split split) noexcept;
std::string_view to_string(PromptStyle style) noexcept;
std::string_view to_string(Scenario scenario) noexcept;
PromptStyle parse_prompt_style(std::string_view text);
Scenario parse_scenario(std::string_view text);

inline constexpr PromptStyle kAllPromptStyles[] = {PromptStyle::Template, PromptStyle::Generative,
                                                   PromptStyle::Random};

/// Frozen image embeddings for one split with their binary multi-label targets.
///
/// Embeddings stay in single precision exactly as read from disk; the
/// training code converts rows to double on the fly and never writes back.
struct EmbeddingDataset {
    Split split = Split::Train;
    std::size_t dim = 0;
    std::size_t num_diseases = 0;
    std::vector<float> embeddings;   // rows() x dim, row-major
    std::vector<std::uint8_t> labels;  // rows() x num_diseases, row-major, 0 or 1
    std::vector<std::string> disease_names;

    std::size_t rows() const noexcept { return dim == 0 ? 0 : embeddings.size() / dim; }

    std::span<const float> embedding(std::size_t row) const {
        return std::span(embeddings).subspan(row * dim, dim);
    }
    std::span<const std::uint8_t> label_row(std::size_t row) const {
        return std::span(labels).subspan(row * num_diseases, num_diseases);
    }
    std::uint8_t label(std::size_t row, std::size_t disease) const {
        return labels[row * num_diseases + disease];
    }

    /// Throws DimensionMismatch, LabelDomainError or ZeroNormEmbedding.
    void validate() const;
};

/// Positive and negative text-prompt embeddings for every disease, one style.
struct PromptBank {
    PromptStyle style = PromptStyle::Template;
    std::size_t dim = 0;
    std::vector<float> positive;  // C x dim
    std::vector<float> negative;  // C x dim

    std::size_t rows() const noexcept { return dim == 0 ? 0 : positive.size() / dim; }
    std::span<const float> positive_row(std::size_t j) const {
        return std::span(positive).subspan(j * dim, dim);
    }
    std::span<const float> negative_row(std::size_t j) const {
        return std::span(negative).subspan(j * dim, dim);
    }

    void validate(std::size_t num_diseases, std::size_t expected_dim) const;
};

/// Everything one manifest describes.
struct DatasetBundle {
    std::vector<std::string> disease_names;
    EmbeddingDataset train;
    EmbeddingDataset test;
    std::vector<PromptBank> prompt_banks;

    std::size_t dim() const noexcept { return train.dim; }
    std::size_t num_diseases() const noexcept { return disease_names.size(); }
    const PromptBank* find_bank(PromptStyle style) const noexcept;
    const PromptBank& bank(PromptStyle style) const;  // throws ConfigError when absent
    void validate() const;
};

inline constexpr int kManifestVersion = 1;
inline constexpr std::string_view kManifestFileName = "manifest.json";

/// Reads a manifest and its blobs (paths relative to the manifest) and
/// validates every invariant.
DatasetBundle load_dataset(const std::filesystem::path& manifest_path);

/// Writes `bundle` as manifest.json plus blobs into `directory` and returns
/// the manifest path.
std::filesystem::path write_dataset(const std::filesystem::path& directory,
                                    const DatasetBundle& bundle);

struct Task {
    int index = 1;  // 1-based position in the schedule
    std::vector<std::size_t> image_indices;  // 0-based training rows
    std::vector<std::uint8_t> label_mask;    // per disease, 1 = labels visible
};

struct TaskSchedule {
    Scenario scenario = Scenario::Joint;
    std::vector<Task> tasks;
    std::uint64_t seed = 0;
};

inline constexpr int kDefaultPartitions = 20;

/// Splits a seeded shuffle of the training rows into disjoint tasks.
///
/// Class- and label-incremental schedules have one task per disease in
/// manifest order; data-incremental has `num_partitions` tasks; joint has
/// one; zero-shot has none. When the rows do not divide evenly the first
/// tasks receive one extra row each. Every scenario that trains uses the
/// same shuffle for a given seed.
TaskSchedule build_schedule(std::size_t train_rows, std::size_t num_diseases, Scenario scenario,
                            int num_partitions, std::uint64_t seed);
TaskSchedule build_schedule(const EmbeddingDataset& dataset, Scenario scenario,
                            int num_partitions, std::uint64_t seed);

}  // namespace adaptune
