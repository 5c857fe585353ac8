#include "adaptune/config.hpp"

#include "adaptune/blob.hpp"
#include "adaptune/error.hpp"

#include <cstdlib>
#include <sstream>

namespace adaptune {

using json = nlohmann::ordered_json;
using nlohmann::ordered_json;

namespace {

enum class Kind { Int, UInt, Real, OptionalReal, Bool, Text, IntList, RealList, TextList };

struct KeySpec {
    const char* key;
    Kind kind;
    ordered_json fallback;
};

const std::vector<KeySpec>& key_table() {
    static const std::vector<KeySpec> table = {
        {"synth.dim", Kind::UInt, 64},
        {"synth.num_diseases", Kind::UInt, 5},
        {"synth.n_train", Kind::UInt, 2000},
        {"synth.n_test", Kind::UInt, 1000},
        {"synth.prevalence", Kind::RealList, ordered_json::array()},
        {"synth.noise_sigma", Kind::Real, 0.5},
        {"synth.kappa", Kind::Real, 0.5},
        {"synth.alpha_template", Kind::Real, 0.95},
        {"synth.alpha_generative", Kind::Real, 0.7},
        {"synth.alpha_random", Kind::Real, 0.0},
        {"synth.label_correlation", Kind::Real, 0.0},
        {"synth.disease_names", Kind::TextList, ordered_json::array()},
        {"synth.seed", Kind::UInt, 0},
        {"adaptor.kind", Kind::Text, "mlp"},
        {"adaptor.placement", Kind::Text, "both"},
        {"adaptor.hidden_dim", Kind::UInt, 0},
        {"adaptor.init", Kind::Text, "scaled_uniform"},
        {"run.scenario", Kind::Text, "joint"},
        {"run.prompt_style", Kind::Text, "template"},
        {"run.epochs_per_task", Kind::Int, 10},
        {"run.batch_size", Kind::Int, 64},
        {"run.seeds", Kind::IntList, ordered_json::array({0, 1, 2})},
        {"run.partitions", Kind::Int, kDefaultPartitions},
        {"run.carry_optimizer_state", Kind::Bool, false},
        {"run.per_disease_normalization", Kind::Bool, false},
        {"run.workers", Kind::UInt, 0},
        {"adam.lr", Kind::Real, 1e-4},
        {"adam.beta1", Kind::Real, 0.9},
        {"adam.beta2", Kind::Real, 0.999},
        {"adam.eps", Kind::Real, 1e-8},
        {"sweep.placements", Kind::TextList, ordered_json::array({"image_only", "text_only", "shared", "both"})},
        {"sweep.prompt_styles", Kind::TextList, ordered_json::array({"template", "generative", "random"})},
        {"sweep.scenarios", Kind::TextList,
         ordered_json::array({"joint", "class_incremental", "label_incremental", "data_incremental"})},
        {"sweep.workers", Kind::UInt, 1},
        {"plot.joint_baseline", Kind::OptionalReal, nullptr},
        {"paths.data", Kind::Text, "synth_data"},
        {"paths.out", Kind::Text, "out"},
        {"paths.report", Kind::Text, "out/report.json"},
    };
    return table;
}

const KeySpec& spec_for(const std::string& key) {
    for (const auto& s : key_table()) {
        if (key == s.key) return s;
    }
    fail(ErrorCode::ConfigError, "unknown config key '" + key + "'");
}

bool matches(Kind kind, const json& v) {
    switch (kind) {
    case Kind::Int: return v.is_number_integer();
    case Kind::UInt: return v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0);
    case Kind::Real: return v.is_number();
    case Kind::OptionalReal: return v.is_number() || v.is_null();
    case Kind::Bool: return v.is_boolean();
    case Kind::Text: return v.is_string();
    case Kind::IntList:
    case Kind::RealList:
    case Kind::TextList:
        if (!v.is_array()) return false;
        for (const auto& e : v) {
            if (kind == Kind::IntList && !e.is_number_integer()) return false;
            if (kind == Kind::RealList && !e.is_number()) return false;
            if (kind == Kind::TextList && !e.is_string()) return false;
        }
        return true;
    }
    return false;
}

json parse_scalar(Kind kind, const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        switch (kind) {
        case Kind::Int: {
            const long long v = std::stoll(text, &used);
            if (used == text.size()) return v;
            break;
        }
        case Kind::UInt: {
            if (!text.empty() && text[0] == '-') break;
            const unsigned long long v = std::stoull(text, &used);
            if (used == text.size()) return v;
            break;
        }
        case Kind::Real:
        case Kind::OptionalReal: {
            if (kind == Kind::OptionalReal && (text == "null" || text.empty())) return nullptr;
            const double v = std::stod(text, &used);
            if (used == text.size()) return v;
            break;
        }
        case Kind::Bool:
            if (text == "true" || text == "1") return true;
            if (text == "false" || text == "0") return false;
            break;
        default:
            return text;
        }
    } catch (const std::exception&) {
    }
    fail(ErrorCode::ConfigError, "cannot parse '" + text + "' for config key '" + key + "'");
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    if (text.empty()) return out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(item);
    return out;
}

std::filesystem::path output_root() {
    if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
    return {};
}

}  // namespace

CliConfig::CliConfig() : values_(ordered_json::object()) {
    for (const auto& s : key_table()) values_[s.key] = s.fallback;
}

void CliConfig::load_file(const std::filesystem::path& path) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, "config file " + path.string() + " is not valid JSON: " + e.what());
    } catch (const Error& e) {
        fail(ErrorCode::ConfigError, e.what());
    }
    if (!doc.is_object()) fail(ErrorCode::ConfigError, "config file must hold a flat JSON object");
    for (const auto& [key, value] : doc.items()) set(key, value);
}

void CliConfig::set(const std::string& key, const json& value) {
    const KeySpec& spec = spec_for(key);
    if (!matches(spec.kind, value)) {
        fail(ErrorCode::ConfigError, "config key '" + key + "' has the wrong type: " + value.dump());
    }
    if (spec.kind == Kind::Real && value.is_number_integer()) {
        values_[key] = value.get<double>();
    } else {
        values_[key] = value;
    }
}

void CliConfig::set_from_string(const std::string& key, const std::string& text) {
    const KeySpec& spec = spec_for(key);
    switch (spec.kind) {
    case Kind::IntList:
    case Kind::RealList:
    case Kind::TextList: {
        const Kind elem = spec.kind == Kind::IntList ? Kind::Int : spec.kind == Kind::RealList ? Kind::Real : Kind::Text;
        json arr = json::array();
        for (const auto& item : split_list(text)) arr.push_back(parse_scalar(elem, key, item));
        set(key, arr);
        break;
    }
    default:
        set(key, parse_scalar(spec.kind, key, text));
    }
}

SynthConfig CliConfig::synth() const {
    SynthConfig c;
    c.dim = values_.at("synth.dim").get<std::size_t>();
    c.num_diseases = values_.at("synth.num_diseases").get<std::size_t>();
    c.n_train = values_.at("synth.n_train").get<std::size_t>();
    c.n_test = values_.at("synth.n_test").get<std::size_t>();
    c.disease_prevalence = values_.at("synth.prevalence").get<std::vector<double>>();
    c.image_noise_sigma = values_.at("synth.noise_sigma").get<double>();
    c.kappa = values_.at("synth.kappa").get<double>();
    c.alpha_template = values_.at("synth.alpha_template").get<double>();
    c.alpha_generative = values_.at("synth.alpha_generative").get<double>();
    c.alpha_random = values_.at("synth.alpha_random").get<double>();
    c.label_correlation = values_.at("synth.label_correlation").get<double>();
    c.disease_names = values_.at("synth.disease_names").get<std::vector<std::string>>();
    c.seed = values_.at("synth.seed").get<std::uint64_t>();
    c.validate();
    return c;
}

RunConfig CliConfig::run() const {
    RunConfig c;
    c.adaptor.kind = parse_adaptor_kind(values_.at("adaptor.kind").get<std::string>());
    c.adaptor.placement = parse_placement(values_.at("adaptor.placement").get<std::string>());
    c.adaptor.hidden_dim = values_.at("adaptor.hidden_dim").get<std::size_t>();
    c.adaptor.init = parse_init_scheme(values_.at("adaptor.init").get<std::string>());
    c.scenario = parse_scenario(values_.at("run.scenario").get<std::string>());
    c.prompt_style = parse_prompt_style(values_.at("run.prompt_style").get<std::string>());
    c.epochs_per_task = values_.at("run.epochs_per_task").get<int>();
    c.batch_size = values_.at("run.batch_size").get<int>();
    c.seeds.clear();
    for (const auto& s : values_.at("run.seeds")) {
        if (s.get<std::int64_t>() < 0) fail(ErrorCode::ConfigError, "seeds must be non-negative");
        c.seeds.push_back(s.get<std::uint64_t>());
    }
    c.num_partitions = values_.at("run.partitions").get<int>();
    c.carry_optimizer_state = values_.at("run.carry_optimizer_state").get<bool>();
    c.loss.per_disease_normalization = values_.at("run.per_disease_normalization").get<bool>();
    c.workers = values_.at("run.workers").get<std::size_t>();
    c.adam.lr = values_.at("adam.lr").get<double>();
    c.adam.beta1 = values_.at("adam.beta1").get<double>();
    c.adam.beta2 = values_.at("adam.beta2").get<double>();
    c.adam.eps = values_.at("adam.eps").get<double>();
    c.validate();
    return c;
}

SweepGrid CliConfig::sweep() const {
    SweepGrid g;
    for (const auto& p : values_.at("sweep.placements")) g.placements.push_back(parse_placement(p.get<std::string>()));
    for (const auto& p : values_.at("sweep.prompt_styles")) {
        g.prompt_styles.push_back(parse_prompt_style(p.get<std::string>()));
    }
    for (const auto& p : values_.at("sweep.scenarios")) g.scenarios.push_back(parse_scenario(p.get<std::string>()));
    g.workers = std::max<std::size_t>(1, values_.at("sweep.workers").get<std::size_t>());
    if (g.cell_count() == 0) fail(ErrorCode::ConfigError, "sweep grid is empty");
    return g;
}

std::optional<double> CliConfig::joint_baseline() const {
    const auto& v = values_.at("plot.joint_baseline");
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
}

std::filesystem::path CliConfig::output_path(const std::string& key) const {
    std::filesystem::path p = values_.at(key).get<std::string>();
    if (p.is_relative()) {
        const auto root = output_root();
        if (!root.empty()) return root / p;
    }
    return p;
}

std::filesystem::path CliConfig::input_path(const std::string& key) const {
    std::filesystem::path p = values_.at(key).get<std::string>();
    if (p.is_relative() && !std::filesystem::exists(p)) {
        const auto root = output_root();
        if (!root.empty() && std::filesystem::exists(root / p)) return root / p;
    }
    return p;
}

}  // namespace adaptune
