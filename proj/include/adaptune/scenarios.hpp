#pragma once

#include "adaptune/adaptors.hpp"
#include "adaptune/datamodel.hpp"
#include "adaptune/metrics.hpp"
#include "adaptune/optimizer.hpp"
#include "adaptune/report.hpp"
#include "adaptune/scoring.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace adaptune {

struct RunConfig {
    AdaptorConfig adaptor;  // dim is taken from the data when left at 0
    Scenario scenario = Scenario::Joint;
    PromptStyle prompt_style = PromptStyle::Template;
    int epochs_per_task = 10;
    int batch_size = 64;
    std::vector<std::uint64_t> seeds{0, 1, 2};
    int num_partitions = kDefaultPartitions;
    AdamHyper adam;
    bool carry_optimizer_state = false;  // keep Adam moments across task boundaries
    LossOptions loss;
    std::size_t workers = 0;  // seeds trained concurrently; 0 = hardware concurrency

    void validate() const;
};

/// Read access to the training split. Training goes through this interface
/// only, so a test double can observe which rows are touched.
class TrainingRows {
public:
    virtual ~TrainingRows() = default;
    virtual std::size_t rows() const = 0;
    virtual std::size_t dim() const = 0;
    virtual std::size_t num_diseases() const = 0;
    virtual std::span<const float> embedding(std::size_t row) const = 0;
    virtual std::span<const std::uint8_t> labels(std::size_t row) const = 0;
};

class DatasetRows final : public TrainingRows {
public:
    explicit DatasetRows(const EmbeddingDataset& dataset) : dataset_(dataset) {}
    std::size_t rows() const override { return dataset_.rows(); }
    std::size_t dim() const override { return dataset_.dim; }
    std::size_t num_diseases() const override { return dataset_.num_diseases; }
    std::span<const float> embedding(std::size_t row) const override { return dataset_.embedding(row); }
    std::span<const std::uint8_t> labels(std::size_t row) const override { return dataset_.label_row(row); }

private:
    const EmbeddingDataset& dataset_;
};

/// Called on the seed's worker thread.
struct RunHooks {
    std::function<void(std::uint64_t seed, const Task&)> on_task_start;
    std::function<void(std::uint64_t seed, const Task&)> on_task_end;
};

struct RunOptions {
    const TrainingRows* training_rows = nullptr;  // defaults to the bundle's train split
    RunHooks hooks;
};

/// Final trainable state of one seed.
struct SeedState {
    std::uint64_t seed = 0;
    AdaptorSet adaptors;
    std::vector<AdamState> optimizer;  // one per parameter store
};

struct RunResult {
    RunReport report;
    std::vector<SeedState> states;  // same order as report.seeds
};

struct Evaluation {
    MeanAuc mean;
    std::vector<AucResult> per_disease;
};

/// Test-set AUC of every disease, ranking by z = S+ - S-. With `adaptors`
/// null the raw embeddings are scored. Throws DegenerateLabels if no disease
/// has both classes in the test split.
Evaluation evaluate(const AdaptorSet* adaptors, const EmbeddingDataset& test, const PromptBank& bank);

/// Continuous scores for every test row with the adaptors (or none) applied.
BatchScores score_dataset(const AdaptorSet* adaptors, const EmbeddingDataset& dataset, const PromptBank& bank);

/// Trains and evaluates every seed of `config`.
RunResult run(const RunConfig& config, const DatasetBundle& data, const RunOptions& options = {});

/// Converts a dataset block to double precision, rows = embeddings.
Eigen::MatrixXd to_matrix(std::span<const float> values, std::size_t rows, std::size_t cols);

}  // namespace adaptune
