#include "adaptune/commands.hpp"

#include "adaptune/blob.hpp"
#include "adaptune/checkpoint.hpp"
#include "adaptune/error.hpp"

#include <atomic>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace adaptune {

using nlohmann::ordered_json;

std::filesystem::path resolve_manifest(const std::filesystem::path& data) {
    if (std::filesystem::is_directory(data)) return data / kManifestFileName;
    return data;
}

std::string cell_name(Placement placement, PromptStyle style, Scenario scenario) {
    return std::string(to_string(placement)) + "__" + std::string(to_string(style)) + "__" +
           std::string(to_string(scenario));
}

namespace {

ordered_json input_checksums(const std::filesystem::path& manifest) {
    ordered_json out = ordered_json::object();
    out[manifest.filename().string()] = file_checksum(manifest);
    const auto dir = manifest.parent_path();
    std::vector<std::filesystem::path> blobs;
    for (const auto& entry : std::filesystem::directory_iterator(dir.empty() ? "." : dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".f32") blobs.push_back(entry.path());
    }
    std::sort(blobs.begin(), blobs.end());
    for (const auto& b : blobs) out[b.filename().string()] = file_checksum(b);
    return out;
}

void write_resolved_config(const std::filesystem::path& dir, const CliConfig& config, const ordered_json& extra) {
    ordered_json doc = {{"config", config.values()}};
    for (const auto& [k, v] : extra.items()) doc[k] = v;
    write_text_file(dir / "resolved_config.json", doc.dump(2) + "\n");
}

// Runs one configuration and writes its artifact directory.
RunReport run_into(const CliConfig& config, const RunConfig& run_config, const DatasetBundle& data,
                   const std::filesystem::path& manifest, const std::filesystem::path& out, std::ostream* log) {
    std::filesystem::create_directories(out);
    RunResult result = run(run_config, data);
    const RunReport& report = result.report;

    write_text_file(out / "report.json", report_to_json(report).dump(2) + "\n");
    write_text_file(out / "report.csv", report_to_csv(report));
    CurveOptions curve;
    curve.joint_baseline = config.joint_baseline();
    render_curves(report, out / "curves.svg", curve);
    for (const auto& state : result.states) {
        save_checkpoint(out / "checkpoints" / ("seed_" + std::to_string(state.seed)), state.adaptors, state.optimizer);
    }
    ordered_json extra = {{"inputs", input_checksums(manifest)}};
    write_resolved_config(out, config, extra);
    if (log) {
        for (const auto& w : report.warnings) *log << w << '\n';
    }
    return report;
}

std::string plus_minus(double mean, double sd) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f±%.0e", mean, sd);
    return buf;
}

std::string scenario_row_label(Scenario s) {
    switch (s) {
    case Scenario::Joint: return "Joint";
    case Scenario::ClassIncremental: return "Class-inc";
    case Scenario::LabelIncremental: return "Label-inc";
    case Scenario::DataIncremental: return "Data-inc";
    case Scenario::ZeroShot: return "Zero-shot";
    }
    return "";
}

}  // namespace

std::filesystem::path cmd_synth(const CliConfig& config, std::ostream& log) {
    const SynthConfig synth = config.synth();
    const auto out = config.output_path("paths.data");
    const auto manifest = generate_to(out, synth);
    write_resolved_config(out, config, ordered_json::object());
    log << manifest.string() << '\n';
    return manifest;
}

std::filesystem::path cmd_run(const CliConfig& config, std::ostream& log) {
    const RunConfig run_config = config.run();
    const auto manifest = resolve_manifest(config.input_path("paths.data"));
    const DatasetBundle data = load_dataset(manifest);
    const auto out = config.output_path("paths.out");
    const RunReport report = run_into(config, run_config, data, manifest, out, &log);
    log << "final mean AUC " << format_number(report.final_mean_auc()) << " -> " << out.string() << '\n';
    return out;
}

SweepOutcome cmd_sweep(const CliConfig& config, std::ostream& log) {
    const SweepGrid grid = config.sweep();
    const RunConfig base = config.run();
    const auto manifest = resolve_manifest(config.input_path("paths.data"));
    const DatasetBundle data = load_dataset(manifest);

    SweepOutcome outcome;
    outcome.directory = config.output_path("paths.out");
    std::filesystem::create_directories(outcome.directory);

    struct Cell {
        Placement placement;
        PromptStyle style;
        Scenario scenario;
    };
    std::vector<Cell> cells;
    for (Scenario sc : grid.scenarios) {
        for (Placement p : grid.placements) {
            for (PromptStyle st : grid.prompt_styles) cells.push_back({p, st, sc});
        }
    }

    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const Cell& c = cells[i];
            const std::string name = cell_name(c.placement, c.style, c.scenario);
            const auto dir = outcome.directory / name;
            if (std::filesystem::exists(dir / "report.json") && std::filesystem::exists(dir / "report.csv")) {
                std::lock_guard lock(mu);
                ++outcome.cells_skipped;
                log << "skip " << name << " (already on disk)\n";
                continue;
            }
            CliConfig cell_config = config;
            cell_config.set("adaptor.placement", std::string(to_string(c.placement)));
            cell_config.set("run.prompt_style", std::string(to_string(c.style)));
            cell_config.set("run.scenario", std::string(to_string(c.scenario)));
            RunConfig rc = base;
            rc.adaptor.placement = c.placement;
            rc.prompt_style = c.style;
            rc.scenario = c.scenario;
            if (grid.workers > 1) rc.workers = 1;
            try {
                std::ostringstream cell_log;
                const RunReport r = run_into(cell_config, rc, data, manifest, dir, &cell_log);
                std::lock_guard lock(mu);
                ++outcome.cells_run;
                log << cell_log.str() << "done " << name << " final mean AUC " << format_number(r.final_mean_auc())
                    << '\n';
            } catch (const std::exception& e) {
                std::error_code ec;
                std::filesystem::remove(dir / "report.json", ec);
                std::lock_guard lock(mu);
                const auto* err = dynamic_cast<const Error*>(&e);
                outcome.failed.push_back(name + ": " + (err ? std::string(err->name()) + ": " : "") + e.what());
                log << "FAILED " << outcome.failed.back() << '\n';
            }
        }
    };
    const std::size_t width = std::min(grid.workers, cells.size());
    if (width <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < width; ++w) pool.emplace_back(worker);
    }

    // Aggregate over every finished cell, in grid order.
    std::ostringstream csv;
    csv << "placement,prompt_style,scenario,final_mean_auc,final_std_auc,status\n";
    std::map<std::string, std::string> table_cells;
    for (const Cell& c : cells) {
        const std::string name = cell_name(c.placement, c.style, c.scenario);
        const auto report_path = outcome.directory / name / "report.json";
        csv << to_string(c.placement) << ',' << to_string(c.style) << ',' << to_string(c.scenario) << ',';
        if (!std::filesystem::exists(report_path)) {
            csv << ",,failed\n";
            table_cells[name] = "failed";
            continue;
        }
        const RunReport r = report_from_json(nlohmann::json::parse(read_text_file(report_path)));
        const AggregatePoint& last = r.aggregate.back();
        csv << format_number(last.mean) << ',' << format_number(last.stddev) << ",ok\n";
        table_cells[name] = plus_minus(last.mean, last.stddev);
    }
    write_text_file(outcome.directory / "sweep.csv", csv.str());

    std::ostringstream md;
    md << "| Adaptor |";
    for (Placement p : grid.placements) {
        for (std::size_t k = 0; k < grid.prompt_styles.size(); ++k) md << ' ' << to_string(p) << " |";
    }
    md << "\n|---|";
    for (std::size_t k = 0; k < grid.placements.size() * grid.prompt_styles.size(); ++k) md << "---|";
    md << "\n| Prompts |";
    for (std::size_t k = 0; k < grid.placements.size(); ++k) {
        for (PromptStyle st : grid.prompt_styles) md << ' ' << to_string(st) << " |";
    }
    md << '\n';
    for (Scenario sc : grid.scenarios) {
        md << "| " << scenario_row_label(sc) << " |";
        for (Placement p : grid.placements) {
            for (PromptStyle st : grid.prompt_styles) md << ' ' << table_cells[cell_name(p, st, sc)] << " |";
        }
        md << '\n';
    }
    write_text_file(outcome.directory / "sweep_table.md", md.str());

    if (!outcome.failed.empty()) {
        std::ostringstream f;
        for (const auto& line : outcome.failed) f << line << '\n';
        write_text_file(outcome.directory / "sweep_failures.txt", f.str());
    }
    write_resolved_config(outcome.directory, config, {{"inputs", input_checksums(manifest)}});
    return outcome;
}

std::filesystem::path cmd_report(const CliConfig& config, std::ostream& log) {
    const auto report_path = config.input_path("paths.report");
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(read_text_file(report_path));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::DimensionMismatch, "report " + report_path.string() + " is not valid JSON");
    }
    const RunReport report = report_from_json(doc);
    CurveOptions curve;
    curve.joint_baseline = config.joint_baseline();
    const auto svg = report_path.parent_path() / "curves.svg";
    render_curves(report, svg, curve);
    log << svg.string() << '\n';
    return svg;
}

}  // namespace adaptune
