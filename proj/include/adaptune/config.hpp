#pragma once

#include "adaptune/scenarios.hpp"
#include "adaptune/synth.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace adaptune {

struct SweepGrid {
    std::vector<Placement> placements;
    std::vector<PromptStyle> prompt_styles;
    std::vector<Scenario> scenarios;
    std::size_t workers = 1;

    std::size_t cell_count() const noexcept {
        return placements.size() * prompt_styles.size() * scenarios.size();
    }
};

/// Flat dotted-key configuration ("synth.dim", "run.scenario", ...).
///
/// Starts from built-in defaults; a JSON file and then individual
/// overrides are layered on top. Unknown keys and values of the wrong type
/// are ConfigErrors.
class CliConfig {
public:
    CliConfig();

    void load_file(const std::filesystem::path& path);
    void set(const std::string& key, const nlohmann::ordered_json& value);
    /// Parses `text` according to the key's type (lists are comma separated).
    void set_from_string(const std::string& key, const std::string& text);
    bool has_key(const std::string& key) const { return values_.contains(key); }
    const nlohmann::ordered_json& values() const noexcept { return values_; }

    SynthConfig synth() const;
    RunConfig run() const;
    SweepGrid sweep() const;
    std::optional<double> joint_baseline() const;

    /// paths.* value resolved against the output root for relative paths
    /// (ADAPTUNE_OUTPUT_ROOT when set).
    std::filesystem::path output_path(const std::string& key) const;
    std::filesystem::path input_path(const std::string& key) const;

private:
    nlohmann::ordered_json values_;
};

inline constexpr const char* kOutputRootEnv = "ADAPTUNE_OUTPUT_ROOT";

}  // namespace adaptune
