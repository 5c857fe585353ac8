#pragma once

#include "adaptune/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>

namespace adaptune {

struct AucResult {
    std::optional<double> value;  // absent unless both classes occur
    std::size_t num_pos = 0;
    std::size_t num_neg = 0;
    std::size_t tie_groups = 0;  // groups of >= 2 equal scores
};

/// ROC-AUC via the Mann-Whitney rank sum with average ranks for ties:
/// (sum of positive ranks - P(P+1)/2) / (P Q). Needs at least two scores.
AucResult auc(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct MeanAuc {
    double value = 0.0;
    std::size_t excluded_count = 0;
};

/// Arithmetic mean over the defined values. Throws AllUndefined if none is.
MeanAuc mean_auc(std::span<const AucResult> per_disease);

struct CurveOptions {
    std::optional<double> joint_baseline;
    std::string title;
};

/// Writes an SVG line chart of mean AUC per task (one thin line per seed,
/// a thick line for the cross-seed mean) and the plotted values as CSV next
/// to it (same stem, ".csv"). Throws EmptyReport or IoError.
void render_curves(const RunReport& report, const std::filesystem::path& svg_path,
                   const CurveOptions& options = {});

}  // namespace adaptune
