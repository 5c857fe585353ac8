#pragma once

#include "adaptune/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace adaptune {

/// Resolves a dataset argument that is either a manifest or a directory
/// holding manifest.json.
std::filesystem::path resolve_manifest(const std::filesystem::path& data);

/// Generates the synthetic dataset into paths.data; returns the manifest path.
std::filesystem::path cmd_synth(const CliConfig& config, std::ostream& log);

/// Trains and evaluates one configuration on paths.data. Writes report.json,
/// report.csv, curves.svg/.csv, resolved_config.json and one checkpoint per
/// seed under paths.out. Returns the output directory.
std::filesystem::path cmd_run(const CliConfig& config, std::ostream& log);

struct SweepOutcome {
    std::filesystem::path directory;
    std::size_t cells_run = 0;
    std::size_t cells_skipped = 0;
    std::vector<std::string> failed;  // "cell: error" lines
};

/// Runs every placement x prompt style x scenario cell of the grid, each in
/// its own subdirectory of paths.out. Cells whose report already exists are
/// skipped. Writes sweep.csv and sweep_table.md over all finished cells.
SweepOutcome cmd_sweep(const CliConfig& config, std::ostream& log);

/// Re-renders curves.svg/.csv next to the report.json named by paths.report.
std::filesystem::path cmd_report(const CliConfig& config, std::ostream& log);

std::string cell_name(Placement placement, PromptStyle style, Scenario scenario);

}  // namespace adaptune
