#include "adaptune/datamodel.hpp"

#include "adaptune/blob.hpp"
#include "adaptune/error.hpp"
#include "adaptune/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace adaptune {

using nlohmann::json;

std::string_view to_string(Split split) noexcept {
    return split == Split::Train ? "train" : "test";
}

std::string_view to_string(PromptStyle style) noexcept {
    switch (style) {
    case PromptStyle::Template: return "template";
    case PromptStyle::Generative: return "generative";
    case PromptStyle::Random: return "random";
    }
    return "template";
}

std::string_view to_string(Scenario scenario) noexcept {
    switch (scenario) {
    case Scenario::Joint: return "joint";
    case Scenario::ClassIncremental: return "class_incremental";
    case Scenario::LabelIncremental: return "label_incremental";
    case Scenario::DataIncremental: return "data_incremental";
    case Scenario::ZeroShot: return "zero_shot";
    }
    return "joint";
}

PromptStyle parse_prompt_style(std::string_view text) {
    for (PromptStyle s : kAllPromptStyles) {
        if (to_string(s) == text) return s;
    }
    fail(ErrorCode::ConfigError, "unknown prompt style '" + std::string(text) + "'");
}

Scenario parse_scenario(std::string_view text) {
    for (Scenario s : {Scenario::Joint, Scenario::ClassIncremental, Scenario::LabelIncremental,
                       Scenario::DataIncremental, Scenario::ZeroShot}) {
        if (to_string(s) == text) return s;
    }
    fail(ErrorCode::ConfigError, "unknown scenario '" + std::string(text) + "'");
}

namespace {

double squared_norm(std::span<const float> row) {
    double s = 0.0;
    for (float v : row) s += static_cast<double>(v) * v;
    return s;
}

}  // namespace

void EmbeddingDataset::validate() const {
    const std::string where(to_string(split));
    if (dim < 2) fail(ErrorCode::DimensionMismatch, where + ": dim must be >= 2");
    if (num_diseases < 1) fail(ErrorCode::DimensionMismatch, where + ": need at least one disease");
    if (embeddings.empty() || embeddings.size() % dim != 0) {
        fail(ErrorCode::DimensionMismatch, where + ": embedding buffer is not a whole number of rows");
    }
    if (labels.size() != rows() * num_diseases) {
        fail(ErrorCode::DimensionMismatch, where + ": label matrix does not match row count");
    }
    if (disease_names.size() != num_diseases) {
        fail(ErrorCode::DimensionMismatch, where + ": disease name count differs from num_diseases");
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] > 1) {
            fail(ErrorCode::LabelDomainError,
                 where + ": label at row " + std::to_string(i / num_diseases) + " is not 0 or 1");
        }
    }
    for (std::size_t r = 0; r < rows(); ++r) {
        if (squared_norm(embedding(r)) == 0.0) {
            fail(ErrorCode::ZeroNormEmbedding, where + ": embedding row " + std::to_string(r) + " has zero norm");
        }
    }
}

void PromptBank::validate(std::size_t num_diseases, std::size_t expected_dim) const {
    const std::string where = "prompt bank '" + std::string(to_string(style)) + "'";
    if (dim != expected_dim) {
        fail(ErrorCode::DimensionMismatch, where + ": dim " + std::to_string(dim) +
                                               " differs from dataset dim " + std::to_string(expected_dim));
    }
    if (positive.size() != num_diseases * dim || negative.size() != num_diseases * dim) {
        fail(ErrorCode::DimensionMismatch, where + ": expected " + std::to_string(num_diseases) + " rows");
    }
    for (std::size_t j = 0; j < num_diseases; ++j) {
        if (squared_norm(positive_row(j)) == 0.0 || squared_norm(negative_row(j)) == 0.0) {
            fail(ErrorCode::ZeroNormEmbedding, where + ": zero-norm prompt for disease " + std::to_string(j));
        }
        if (std::ranges::equal(positive_row(j), negative_row(j))) {
            fail(ErrorCode::DimensionMismatch,
                 where + ": positive and negative prompts coincide for disease " + std::to_string(j));
        }
    }
}

const PromptBank* DatasetBundle::find_bank(PromptStyle style) const noexcept {
    for (const auto& b : prompt_banks) {
        if (b.style == style) return &b;
    }
    return nullptr;
}

const PromptBank& DatasetBundle::bank(PromptStyle style) const {
    if (const auto* b = find_bank(style)) return *b;
    fail(ErrorCode::ConfigError, "dataset has no '" + std::string(to_string(style)) + "' prompt bank");
}

void DatasetBundle::validate() const {
    train.validate();
    test.validate();
    if (test.dim != train.dim || test.num_diseases != train.num_diseases) {
        fail(ErrorCode::DimensionMismatch, "train and test splits disagree on dim or disease count");
    }
    if (disease_names != train.disease_names || disease_names != test.disease_names) {
        fail(ErrorCode::DimensionMismatch, "split disease names differ from manifest");
    }
    for (const auto& b : prompt_banks) b.validate(num_diseases(), dim());
}

namespace {

template <class T>
T require(const json& node, const char* key, const std::string& where) {
    if (!node.is_object() || !node.contains(key)) {
        fail(ErrorCode::DimensionMismatch, "manifest: missing key '" + where + key + "'");
    }
    try {
        return node.at(key).get<T>();
    } catch (const json::exception& e) {
        fail(ErrorCode::DimensionMismatch, "manifest: bad value for '" + where + key + "': " + e.what());
    }
}

EmbeddingDataset read_split(const json& splits, Split split, std::size_t dim,
                            const std::vector<std::string>& names,
                            const std::filesystem::path& base) {
    const std::string key(to_string(split));
    if (!splits.contains(key)) fail(ErrorCode::DimensionMismatch, "manifest: missing split '" + key + "'");
    const json& node = splits.at(key);
    const std::string where = "splits." + key + ".";
    const auto count = require<std::size_t>(node, "count", where);
    if (count < 1) fail(ErrorCode::DimensionMismatch, "manifest: split '" + key + "' is empty");

    EmbeddingDataset ds;
    ds.split = split;
    ds.dim = dim;
    ds.num_diseases = names.size();
    ds.disease_names = names;
    ds.embeddings = read_f32_blob(base / require<std::string>(node, "embeddings", where), count * dim);

    const auto raw_labels =
        read_f32_blob(base / require<std::string>(node, "labels", where), count * names.size());
    ds.labels.resize(raw_labels.size());
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        const float v = raw_labels[i];
        if (v != 0.0f && v != 1.0f) {
            fail(ErrorCode::LabelDomainError, key + " labels: value " + std::to_string(v) + " at row " +
                                                  std::to_string(i / names.size()) + " is not 0 or 1");
        }
        ds.labels[i] = v == 1.0f ? 1 : 0;
    }
    return ds;
}

std::string bank_blob_name(PromptStyle style, bool positive) {
    return "prompts_" + std::string(to_string(style)) + (positive ? "_positive.f32" : "_negative.f32");
}

std::string split_blob_name(Split split, bool embeddings) {
    return std::string(to_string(split)) + (embeddings ? "_embeddings.f32" : "_labels.f32");
}

}  // namespace

DatasetBundle load_dataset(const std::filesystem::path& manifest_path) {
    json manifest;
    try {
        manifest = json::parse(read_text_file(manifest_path));
    } catch (const json::exception& e) {
        fail(ErrorCode::DimensionMismatch, "manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
    }
    const auto base = manifest_path.parent_path();

    const auto version = require<int>(manifest, "version", "");
    if (version != kManifestVersion) {
        fail(ErrorCode::DimensionMismatch, "manifest: unsupported version " + std::to_string(version));
    }
    const auto dim = require<std::size_t>(manifest, "dim", "");
    const auto num_diseases = require<std::size_t>(manifest, "num_diseases", "");
    const auto names = require<std::vector<std::string>>(manifest, "disease_names", "");
    if (dim < 2) fail(ErrorCode::DimensionMismatch, "manifest: dim must be >= 2");
    if (num_diseases < 1 || names.size() != num_diseases) {
        fail(ErrorCode::DimensionMismatch, "manifest: num_diseases disagrees with disease_names");
    }
    if (!manifest.contains("splits")) fail(ErrorCode::DimensionMismatch, "manifest: missing key 'splits'");

    DatasetBundle bundle;
    bundle.disease_names = names;
    bundle.train = read_split(manifest.at("splits"), Split::Train, dim, names, base);
    bundle.test = read_split(manifest.at("splits"), Split::Test, dim, names, base);

    if (manifest.contains("prompt_banks")) {
        for (const auto& node : manifest.at("prompt_banks")) {
            PromptBank bank;
            bank.style = parse_prompt_style(require<std::string>(node, "style", "prompt_banks[]."));
            if (bundle.find_bank(bank.style)) {
                fail(ErrorCode::DimensionMismatch,
                     "manifest: duplicate prompt bank style '" + std::string(to_string(bank.style)) + "'");
            }
            bank.dim = dim;
            bank.positive = read_f32_blob(base / require<std::string>(node, "positive", "prompt_banks[]."),
                                          num_diseases * dim);
            bank.negative = read_f32_blob(base / require<std::string>(node, "negative", "prompt_banks[]."),
                                          num_diseases * dim);
            bundle.prompt_banks.push_back(std::move(bank));
        }
    }
    bundle.validate();
    return bundle;
}

std::filesystem::path write_dataset(const std::filesystem::path& directory, const DatasetBundle& bundle) {
    bundle.validate();
    std::filesystem::create_directories(directory);

    json splits = json::object();
    for (const EmbeddingDataset* ds : {&bundle.train, &bundle.test}) {
        const auto emb_name = split_blob_name(ds->split, true);
        const auto lab_name = split_blob_name(ds->split, false);
        write_f32_blob(directory / emb_name, ds->embeddings);
        std::vector<float> labels(ds->labels.begin(), ds->labels.end());
        write_f32_blob(directory / lab_name, labels);
        splits[std::string(to_string(ds->split))] = {
            {"embeddings", emb_name}, {"labels", lab_name}, {"count", ds->rows()}};
    }

    json banks = json::array();
    for (const auto& b : bundle.prompt_banks) {
        const auto pos = bank_blob_name(b.style, true);
        const auto neg = bank_blob_name(b.style, false);
        write_f32_blob(directory / pos, b.positive);
        write_f32_blob(directory / neg, b.negative);
        banks.push_back({{"style", to_string(b.style)}, {"positive", pos}, {"negative", neg}});
    }

    json manifest = {
        {"version", kManifestVersion},
        {"dim", bundle.dim()},
        {"num_diseases", bundle.num_diseases()},
        {"disease_names", bundle.disease_names},
        {"splits", splits},
        {"prompt_banks", banks},
    };
    const auto path = directory / kManifestFileName;
    write_text_file(path, manifest.dump(2) + "\n");
    return path;
}

TaskSchedule build_schedule(std::size_t train_rows, std::size_t num_diseases, Scenario scenario,
                            int num_partitions, std::uint64_t seed) {
    TaskSchedule schedule;
    schedule.scenario = scenario;
    schedule.seed = seed;
    if (scenario == Scenario::ZeroShot) return schedule;

    std::size_t task_count = 1;
    switch (scenario) {
    case Scenario::ClassIncremental:
    case Scenario::LabelIncremental:
        task_count = num_diseases;
        break;
    case Scenario::DataIncremental:
        if (num_partitions < 1) fail(ErrorCode::ConfigError, "num_partitions must be >= 1");
        task_count = static_cast<std::size_t>(num_partitions);
        break;
    default:
        break;
    }
    if (train_rows < task_count) {
        fail(ErrorCode::TooFewRows, std::to_string(train_rows) + " training rows cannot fill " +
                                        std::to_string(task_count) + " tasks");
    }

    std::vector<std::size_t> order(train_rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed, "schedule");
    rng.shuffle(std::span(order));

    const std::size_t base = train_rows / task_count;
    const std::size_t extra = train_rows % task_count;
    std::size_t cursor = 0;
    for (std::size_t t = 0; t < task_count; ++t) {
        Task task;
        task.index = static_cast<int>(t + 1);
        const std::size_t n = base + (t < extra ? 1 : 0);
        task.image_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                                  order.begin() + static_cast<std::ptrdiff_t>(cursor + n));
        cursor += n;
        task.label_mask.assign(num_diseases, 0);
        switch (scenario) {
        case Scenario::ClassIncremental:
            task.label_mask[t] = 1;
            break;
        case Scenario::LabelIncremental:
            std::fill_n(task.label_mask.begin(), t + 1, std::uint8_t{1});
            break;
        default:
            std::fill(task.label_mask.begin(), task.label_mask.end(), std::uint8_t{1});
            break;
        }
        schedule.tasks.push_back(std::move(task));
    }
    return schedule;
}

TaskSchedule build_schedule(const EmbeddingDataset& dataset, Scenario scenario, int num_partitions,
                            std::uint64_t seed) {
    return build_schedule(dataset.rows(), dataset.num_diseases, scenario, num_partitions, seed);
}

}  // namespace adaptune
