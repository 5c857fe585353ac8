#pragma once

#include "adaptune/adaptors.hpp"
#include "adaptune/datamodel.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adaptune {

/// Test-set evaluation taken after one task finished training.
struct TaskEvaluation {
    int task_index = 0;  // 0 for the single zero-shot evaluation
    double mean_auc = 0.0;
    std::vector<std::optional<double>> per_disease_auc;  // missing when a disease is single-class
    std::vector<double> train_loss_trace;                 // mean loss per epoch of this task

    std::optional<double> final_train_loss() const {
        if (train_loss_trace.empty()) return std::nullopt;
        return train_loss_trace.back();
    }
};

struct SeedReport {
    std::uint64_t seed = 0;
    std::vector<TaskEvaluation> tasks;
    std::string final_checksum;  // hex FNV-1a of the final adaptor parameters
};

struct AggregatePoint {
    int task_index = 0;
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation over seeds; 0 for one seed
};

struct RunReport {
    Scenario scenario = Scenario::Joint;
    PromptStyle prompt_style = PromptStyle::Template;
    AdaptorKind adaptor_kind = AdaptorKind::Mlp;
    Placement placement = Placement::Both;
    std::vector<std::string> disease_names;
    std::vector<SeedReport> seeds;
    std::vector<AggregatePoint> aggregate;
    std::vector<std::string> warnings;

    std::size_t task_count() const noexcept { return seeds.empty() ? 0 : seeds.front().tasks.size(); }
    /// Mean over seeds of the last task's mean AUC.
    double final_mean_auc() const;
};

/// Fills `report.aggregate` from the per-seed entries.
void aggregate_seeds(RunReport& report);

nlohmann::json report_to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& node);

/// One row per seed x task:
/// seed,scenario,task,mean_auc,auc_d1..auc_dC,final_train_loss
std::string report_to_csv(const RunReport& report);

/// Shortest round-trip decimal form; "nan"/"inf" for non-finite values.
std::string format_number(double value);

}  // namespace adaptune
