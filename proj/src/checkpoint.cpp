#include "adaptune/checkpoint.hpp"

#include "adaptune/blob.hpp"
#include "adaptune/error.hpp"

#include <nlohmann/json.hpp>

namespace adaptune {

using nlohmann::json;

namespace {

constexpr int kCheckpointVersion = 1;

json write_tensor(const std::filesystem::path& dir, const std::string& name, const Eigen::MatrixXd& m) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) values.push_back(m(r, c));
    }
    const std::string file = name + ".f64";
    write_f64_blob(dir / file, values);
    return {{"file", file}, {"rows", m.rows()}, {"cols", m.cols()}};
}

Eigen::MatrixXd read_tensor(const std::filesystem::path& dir, const json& node, const Eigen::MatrixXd& shape_of) {
    const auto rows = node.at("rows").get<Eigen::Index>();
    const auto cols = node.at("cols").get<Eigen::Index>();
    if (rows != shape_of.rows() || cols != shape_of.cols()) {
        fail(ErrorCode::DimensionMismatch, "checkpoint tensor " + node.at("file").get<std::string>() +
                                               " has an unexpected shape");
    }
    const auto values = read_f64_blob(dir / node.at("file").get<std::string>(), static_cast<std::size_t>(rows * cols));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
    }
    return m;
}

}  // namespace

std::filesystem::path save_checkpoint(const std::filesystem::path& directory, const AdaptorSet& adaptors,
                                      const std::vector<AdamState>& optimizer) {
    if (!optimizer.empty() && optimizer.size() != adaptors.stores().size()) {
        fail(ErrorCode::ShapeMismatch, "need one optimizer state per parameter store");
    }
    std::filesystem::create_directories(directory);
    const auto& cfg = adaptors.config();

    json stores = json::array();
    for (std::size_t s = 0; s < adaptors.stores().size(); ++s) {
        json tensors = json::array();
        const auto& params = adaptors.stores()[s].parameters();
        for (std::size_t k = 0; k < params.size(); ++k) {
            tensors.push_back(write_tensor(directory, "store" + std::to_string(s) + "_param" + std::to_string(k), params[k]));
        }
        json entry = {{"parameters", tensors}};
        if (!optimizer.empty()) {
            const auto& st = optimizer[s];
            json m = json::array(), v = json::array();
            for (std::size_t k = 0; k < st.first_moment.size(); ++k) {
                const std::string stem = "store" + std::to_string(s) + "_adam" + std::to_string(k);
                m.push_back(write_tensor(directory, stem + "_m", st.first_moment[k]));
                v.push_back(write_tensor(directory, stem + "_v", st.second_moment[k]));
            }
            entry["adam"] = {{"step_count", st.step_count},
                             {"lr", st.hyper.lr},
                             {"beta1", st.hyper.beta1},
                             {"beta2", st.hyper.beta2},
                             {"eps", st.hyper.eps},
                             {"first_moment", m},
                             {"second_moment", v}};
        }
        stores.push_back(entry);
    }

    json doc = {
        {"version", kCheckpointVersion},
        {"dtype", "float64"},
        {"adaptor",
         {{"kind", to_string(cfg.kind)},
          {"placement", to_string(cfg.placement)},
          {"dim", cfg.dim},
          {"hidden_dim", cfg.resolved_hidden_dim()},
          {"activation", "relu"},
          {"init", to_string(cfg.init)},
          {"seed", cfg.seed}}},
        {"stores", stores},
    };
    const auto path = directory / "checkpoint.json";
    write_text_file(path, doc.dump(2) + "\n");
    return path;
}

Checkpoint load_checkpoint(const std::filesystem::path& json_path) {
    const auto dir = json_path.parent_path();
    try {
        const json doc = json::parse(read_text_file(json_path));
        if (doc.at("version").get<int>() != kCheckpointVersion || doc.at("dtype").get<std::string>() != "float64") {
            fail(ErrorCode::DimensionMismatch, "unsupported checkpoint format");
        }
        const json& a = doc.at("adaptor");
        AdaptorConfig cfg;
        cfg.kind = parse_adaptor_kind(a.at("kind").get<std::string>());
        cfg.placement = parse_placement(a.at("placement").get<std::string>());
        cfg.dim = a.at("dim").get<std::size_t>();
        cfg.hidden_dim = a.at("hidden_dim").get<std::size_t>();
        cfg.init = parse_init_scheme(a.at("init").get<std::string>());
        cfg.seed = a.at("seed").get<std::uint64_t>();

        Checkpoint out;
        std::vector<Adaptor> stores;
        const json& store_nodes = doc.at("stores");
        for (const auto& node : store_nodes) {
            Adaptor adaptor(cfg.kind, cfg.dim, cfg.resolved_hidden_dim());
            auto& params = adaptor.parameters();
            const json& tensors = node.at("parameters");
            if (tensors.size() != params.size()) fail(ErrorCode::DimensionMismatch, "checkpoint tensor count mismatch");
            for (std::size_t k = 0; k < params.size(); ++k) params[k] = read_tensor(dir, tensors[k], params[k]);
            adaptor.check_finite();

            if (node.contains("adam")) {
                const json& an = node.at("adam");
                AdamHyper hyper{an.at("lr").get<double>(), an.at("beta1").get<double>(), an.at("beta2").get<double>(),
                                an.at("eps").get<double>()};
                AdamState st = AdamState::zeros_like(params, hyper);
                st.step_count = an.at("step_count").get<std::int64_t>();
                for (std::size_t k = 0; k < params.size(); ++k) {
                    st.first_moment[k] = read_tensor(dir, an.at("first_moment")[k], params[k]);
                    st.second_moment[k] = read_tensor(dir, an.at("second_moment")[k], params[k]);
                }
                out.optimizer.push_back(std::move(st));
            }
            stores.push_back(std::move(adaptor));
        }
        if (!out.optimizer.empty() && out.optimizer.size() != stores.size()) {
            fail(ErrorCode::DimensionMismatch, "checkpoint has optimizer state for only some stores");
        }
        out.adaptors = make_adaptor_set(cfg, std::move(stores));
        return out;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::DimensionMismatch, "malformed checkpoint: " + std::string(e.what()));
    }
}

}  // namespace adaptune
