#include "adaptune/adaptors.hpp"
#include "adaptune/blob.hpp"
#include "adaptune/commands.hpp"
#include "adaptune/config.hpp"
#include "adaptune/datamodel.hpp"
#include "adaptune/error.hpp"
#include "adaptune/metrics.hpp"
#include "adaptune/objective.hpp"
#include "adaptune/report.hpp"
#include "adaptune/scenarios.hpp"
#include "adaptune/scoring.hpp"
#include "adaptune/synth.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace adaptune;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Config values arrive as one JSON object of dotted keys.
CliConfig config_from_json(const std::string& text) {
    CliConfig c;
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ConfigError, e.what());
    }
    for (const auto& [k, v] : doc.items()) c.set(k, v);
    return c;
}

template <class T>
py::array_t<T> as_array(const std::vector<T>& values, std::size_t rows, std::size_t cols) {
    py::array_t<T> out({rows, cols});
    std::copy(values.begin(), values.end(), out.mutable_data());
    return out;
}

BatchScores to_scores(const Eigen::MatrixXd& s_pos, const Eigen::MatrixXd& s_neg) {
    if (s_pos.rows() != s_neg.rows() || s_pos.cols() != s_neg.cols()) {
        fail(ErrorCode::ShapeMismatch, "s_pos and s_neg differ in shape");
    }
    return {s_pos, s_neg};
}

std::vector<std::uint8_t> to_bytes(const std::vector<int>& v) { return {v.begin(), v.end()}; }

}  // namespace

PYBIND11_MODULE(_adaptune, m) {
    m.doc() = "Prompt-pair adaptor fine-tuning on frozen embeddings";

    py::object base = py::reinterpret_borrow<py::object>(PyExc_RuntimeError);
    m.attr("AdaptuneError") = py::reinterpret_steal<py::object>(
        PyErr_NewException("adaptune._adaptune.AdaptuneError", base.ptr(), nullptr));
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::object type = py::module_::import("adaptune._adaptune").attr("AdaptuneError");
            py::object exc = type(std::string(e.name()) + ": " + e.what());
            exc.attr("name") = std::string(e.name());
            PyErr_SetObject(type.ptr(), exc.ptr());
        }
    });

    py::class_<DatasetBundle>(m, "Dataset")
        .def_property_readonly("disease_names", [](const DatasetBundle& b) { return b.disease_names; })
        .def_property_readonly("dim", &DatasetBundle::dim)
        .def_property_readonly("num_diseases", &DatasetBundle::num_diseases)
        .def("embeddings",
             [](const DatasetBundle& b, const std::string& split) {
                 const auto& ds = split == "train" ? b.train : b.test;
                 return as_array(ds.embeddings, ds.rows(), ds.dim);
             },
             py::arg("split"))
        .def("labels",
             [](const DatasetBundle& b, const std::string& split) {
                 const auto& ds = split == "train" ? b.train : b.test;
                 return as_array(ds.labels, ds.rows(), ds.num_diseases);
             },
             py::arg("split"))
        .def("prompts",
             [](const DatasetBundle& b, const std::string& style) {
                 const auto& bank = b.bank(parse_prompt_style(style));
                 return py::make_tuple(as_array(bank.positive, bank.rows(), bank.dim),
                                       as_array(bank.negative, bank.rows(), bank.dim));
             },
             py::arg("style"));

    m.def("load_dataset", &load_dataset, py::arg("manifest"));
    m.def(
        "generate_dataset",
        [](const std::string& config_json) { return generate(config_from_json(config_json).synth()); },
        py::arg("config_json"));

    m.def(
        "build_schedule",
        [](std::size_t rows, std::size_t num_diseases, const std::string& scenario, int partitions,
           std::uint64_t seed) {
            py::list tasks;
            for (const Task& t :
                 build_schedule(rows, num_diseases, parse_scenario(scenario), partitions, seed).tasks) {
                py::dict d;
                d["index"] = t.index;
                d["image_indices"] = t.image_indices;
                d["label_mask"] = std::vector<int>(t.label_mask.begin(), t.label_mask.end());
                tasks.append(d);
            }
            return tasks;
        },
        py::arg("rows"), py::arg("num_diseases"), py::arg("scenario"), py::arg("partitions") = kDefaultPartitions,
        py::arg("seed") = 0);

    m.def(
        "cosine", [](const Eigen::VectorXd& u, const Eigen::VectorXd& v) { return cosine(u, v); }, py::arg("u"),
        py::arg("v"));
    m.def(
        "score_batch",
        [](const Eigen::MatrixXd& images, const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg) {
            const BatchScores s = score_batch(images, pos, neg);
            return py::make_tuple(RowMatrix(s.s_pos), RowMatrix(s.s_neg));
        },
        py::arg("images"), py::arg("positive"), py::arg("negative"));
    m.def(
        "bce_loss",
        [](const Eigen::MatrixXd& s_pos, const Eigen::MatrixXd& s_neg, const Eigen::MatrixXd& labels,
           const std::vector<int>& mask, bool per_disease_normalization) {
            LossOptions o;
            o.per_disease_normalization = per_disease_normalization;
            const LossResult r = bce_loss(to_scores(s_pos, s_neg), labels, to_bytes(mask), o);
            return py::make_tuple(r.loss, RowMatrix(r.dloss_dlogits));
        },
        py::arg("s_pos"), py::arg("s_neg"), py::arg("labels"), py::arg("mask"),
        py::arg("per_disease_normalization") = false);
    m.def(
        "predict",
        [](const Eigen::MatrixXd& s_pos, const Eigen::MatrixXd& s_neg) {
            const BoolMatrix p = predict(to_scores(s_pos, s_neg));
            py::array_t<bool> out({p.rows(), p.cols()});
            auto w = out.mutable_unchecked<2>();
            for (Eigen::Index i = 0; i < p.rows(); ++i) {
                for (Eigen::Index j = 0; j < p.cols(); ++j) w(i, j) = p(i, j);
            }
            return out;
        },
        py::arg("s_pos"), py::arg("s_neg"));
    m.def(
        "auc",
        [](const std::vector<double>& scores, const std::vector<int>& labels) -> std::optional<double> {
            if (scores.size() != labels.size()) fail(ErrorCode::ShapeMismatch, "scores and labels differ in length");
            return auc(scores, to_bytes(labels)).value;
        },
        py::arg("scores"), py::arg("labels"));
    m.def(
        "mean_auc",
        [](const std::vector<std::optional<double>>& values) {
            std::vector<AucResult> r(values.size());
            for (std::size_t i = 0; i < values.size(); ++i) r[i].value = values[i];
            const MeanAuc mean = mean_auc(r);
            return py::make_tuple(mean.value, mean.excluded_count);
        },
        py::arg("values"));

    py::class_<AdaptorSet>(m, "AdaptorSet")
        .def("apply_image", [](const AdaptorSet& s, const Eigen::MatrixXd& x) { return RowMatrix(s.apply_image(x)); })
        .def("apply_text", [](const AdaptorSet& s, const Eigen::MatrixXd& x) { return RowMatrix(s.apply_text(x)); })
        .def("checksum", [](const AdaptorSet& s) { return hex64(s.checksum()); })
        .def("parameters",
             [](const AdaptorSet& s) {
                 py::list stores;
                 for (const auto& a : s.stores()) {
                     py::list params;
                     for (const auto& p : a.parameters()) params.append(RowMatrix(p));
                     stores.append(params);
                 }
                 return stores;
             })
        .def(
            "gradients",
            [](const AdaptorSet& s, const Eigen::MatrixXd& images, const Eigen::MatrixXd& labels,
               const Eigen::MatrixXd& pos, const Eigen::MatrixXd& neg, const std::vector<int>& mask) {
                const auto bytes = to_bytes(mask);
                const ObjectiveGradients g = objective_gradients(s, {images, labels, pos, neg, bytes});
                py::list stores;
                for (const auto& store : g.store_grads) {
                    py::list params;
                    for (const auto& p : store) params.append(RowMatrix(p));
                    stores.append(params);
                }
                py::dict d;
                d["loss"] = g.loss;
                d["stores"] = stores;
                d["images"] = RowMatrix(g.images);
                d["positive"] = RowMatrix(g.positive);
                d["negative"] = RowMatrix(g.negative);
                return d;
            },
            py::arg("images"), py::arg("labels"), py::arg("positive"), py::arg("negative"), py::arg("mask"));

    m.def(
        "make_adaptors",
        [](const std::string& kind, const std::string& placement, std::size_t dim, std::size_t hidden_dim,
           const std::string& init, std::uint64_t seed) {
            AdaptorConfig c;
            c.kind = parse_adaptor_kind(kind);
            c.placement = parse_placement(placement);
            c.dim = dim;
            c.hidden_dim = hidden_dim;
            c.init = parse_init_scheme(init);
            c.seed = seed;
            return make_adaptor_set(c);
        },
        py::arg("kind"), py::arg("placement"), py::arg("dim"), py::arg("hidden_dim") = 0,
        py::arg("init") = "scaled_uniform", py::arg("seed") = 0);

    m.def(
        "run_json",
        [](const DatasetBundle& data, const std::string& config_json) {
            const RunConfig rc = config_from_json(config_json).run();
            RunReport report;
            {
                py::gil_scoped_release release;
                report = run(rc, data).report;
            }
            return report_to_json(report).dump();
        },
        py::arg("data"), py::arg("config_json"));

    auto command = [](auto fn) {
        return [fn](const std::string& config_json) {
            const CliConfig c = config_from_json(config_json);
            std::ostringstream log;
            py::gil_scoped_release release;
            return fn(c, log);
        };
    };
    m.def("cmd_synth", command([](const CliConfig& c, std::ostream& log) { return cmd_synth(c, log).string(); }),
          py::arg("config_json"));
    m.def("cmd_run", command([](const CliConfig& c, std::ostream& log) { return cmd_run(c, log).string(); }),
          py::arg("config_json"));
    m.def("cmd_sweep",
          command([](const CliConfig& c, std::ostream& log) {
              const SweepOutcome o = cmd_sweep(c, log);
              return std::make_tuple(o.directory.string(), o.cells_run, o.cells_skipped, o.failed);
          }),
          py::arg("config_json"));
}
