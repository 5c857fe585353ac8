// adaptune: synthetic data generation, training runs, ablation sweeps and
// report rendering for prompt-pair adaptor fine-tuning.

#include "adaptune/commands.hpp"
#include "adaptune/error.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace {

using adaptune::CliConfig;

// Flag -> dotted config key. Values are applied after the config file.
struct FlagBinding {
    std::string key;
    std::string value;
    CLI::Option* option = nullptr;
};

struct Overrides {
    std::vector<FlagBinding> flags;
    std::vector<std::string> sets;
    std::string config_file;
    std::string seed;
    CLI::Option* seed_option = nullptr;
};

void add_flags(CLI::App* app, Overrides& o, const std::vector<std::pair<std::string, std::string>>& table) {
    o.flags.reserve(table.size());
    for (const auto& [flag, key] : table) {
        o.flags.push_back({key, {}, nullptr});
        auto& b = o.flags.back();
        b.option = app->add_option(flag, b.value, "sets " + key);
    }
    app->add_option("-c,--config", o.config_file, "JSON file with flat dotted keys");
    app->add_option("--set", o.sets, "KEY=VALUE override of any config key")->take_all();
}

CliConfig resolve(const Overrides& o, const std::string& seed_key) {
    CliConfig cfg;
    if (!o.config_file.empty()) cfg.load_file(o.config_file);
    for (const auto& s : o.sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            throw adaptune::Error(adaptune::ErrorCode::ConfigError, "--set expects KEY=VALUE, got '" + s + "'");
        }
        cfg.set_from_string(s.substr(0, eq), s.substr(eq + 1));
    }
    for (const auto& b : o.flags) {
        if (b.option && b.option->count() > 0) cfg.set_from_string(b.key, b.value);
    }
    if (o.seed_option && o.seed_option->count() > 0) cfg.set_from_string(seed_key, o.seed);
    return cfg;
}

int exit_code(adaptune::ErrorCategory c) {
    switch (c) {
    case adaptune::ErrorCategory::Config: return 2;
    case adaptune::ErrorCategory::Data: return 3;
    case adaptune::ErrorCategory::Numeric: return 4;
    }
    return 3;
}

const std::vector<std::pair<std::string, std::string>> kRunFlags = {
    {"--data", "paths.data"},
    {"--out", "paths.out"},
    {"--scenario", "run.scenario"},
    {"--prompt-style", "run.prompt_style"},
    {"--placement", "adaptor.placement"},
    {"--kind", "adaptor.kind"},
    {"--init", "adaptor.init"},
    {"--hidden-dim", "adaptor.hidden_dim"},
    {"--partitions", "run.partitions"},
    {"--epochs", "run.epochs_per_task"},
    {"--batch-size", "run.batch_size"},
    {"--seeds", "run.seeds"},
    {"--lr", "adam.lr"},
    {"--workers", "run.workers"},
    {"--joint-baseline", "plot.joint_baseline"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Prompt-pair adaptor fine-tuning on frozen embeddings"};
    app.require_subcommand(1);

    Overrides synth_o, run_o, sweep_o, report_o;

    auto* synth = app.add_subcommand("synth", "generate a synthetic embedding dataset");
    add_flags(synth, synth_o,
              {{"--out", "paths.data"},
               {"--dim", "synth.dim"},
               {"--num-diseases", "synth.num_diseases"},
               {"--n-train", "synth.n_train"},
               {"--n-test", "synth.n_test"},
               {"--noise-sigma", "synth.noise_sigma"},
               {"--kappa", "synth.kappa"},
               {"--label-correlation", "synth.label_correlation"}});
    synth_o.seed_option = synth->add_option("--seed", synth_o.seed, "sets synth.seed");

    auto* run = app.add_subcommand("run", "train and evaluate one configuration");
    add_flags(run, run_o, kRunFlags);
    run_o.seed_option = run->add_option("--seed", run_o.seed, "single seed (sets run.seeds)");

    auto* sweep = app.add_subcommand("sweep", "run the placement x prompt style x scenario grid");
    auto sweep_flags = kRunFlags;
    sweep_flags.push_back({"--placements", "sweep.placements"});
    sweep_flags.push_back({"--prompt-styles", "sweep.prompt_styles"});
    sweep_flags.push_back({"--scenarios", "sweep.scenarios"});
    sweep_flags.push_back({"--cell-workers", "sweep.workers"});
    add_flags(sweep, sweep_o, sweep_flags);
    sweep_o.seed_option = sweep->add_option("--seed", sweep_o.seed, "single seed (sets run.seeds)");

    auto* report = app.add_subcommand("report", "re-render plots from an existing report.json");
    add_flags(report, report_o, {{"--report", "paths.report"}, {"--joint-baseline", "plot.joint_baseline"}});

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: ConfigError: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*synth) {
            adaptune::cmd_synth(resolve(synth_o, "synth.seed"), std::cout);
        } else if (*run) {
            adaptune::cmd_run(resolve(run_o, "run.seeds"), std::cout);
        } else if (*sweep) {
            const auto outcome = adaptune::cmd_sweep(resolve(sweep_o, "run.seeds"), std::cout);
            std::cout << "sweep: " << outcome.cells_run << " run, " << outcome.cells_skipped << " skipped, "
                      << outcome.failed.size() << " failed -> " << outcome.directory.string() << '\n';
            if (!outcome.failed.empty()) {
                std::cerr << "error: PartialFailure: " << outcome.failed.size() << " sweep cells failed\n";
                return 3;
            }
        } else if (*report) {
            adaptune::cmd_report(resolve(report_o, ""), std::cout);
        }
    } catch (const adaptune::Error& e) {
        std::cerr << "error: " << e.name() << ": " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: IoError: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: InternalError: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
