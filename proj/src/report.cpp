#include "adaptune/report.hpp"

#include "adaptune/error.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace adaptune {

using nlohmann::json;

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return {buf, res.ptr};
}

double RunReport::final_mean_auc() const {
    if (seeds.empty() || seeds.front().tasks.empty()) fail(ErrorCode::EmptyReport, "report has no entries");
    double sum = 0.0;
    for (const auto& s : seeds) sum += s.tasks.back().mean_auc;
    return sum / static_cast<double>(seeds.size());
}

void aggregate_seeds(RunReport& report) {
    report.aggregate.clear();
    const std::size_t n_tasks = report.task_count();
    for (const auto& s : report.seeds) {
        if (s.tasks.size() != n_tasks) fail(ErrorCode::ScheduleMismatch, "seeds disagree on task count");
    }
    const double n = static_cast<double>(report.seeds.size());
    for (std::size_t t = 0; t < n_tasks; ++t) {
        AggregatePoint p;
        p.task_index = report.seeds.front().tasks[t].task_index;
        double sum = 0.0;
        for (const auto& s : report.seeds) sum += s.tasks[t].mean_auc;
        p.mean = sum / n;
        if (report.seeds.size() > 1) {
            double ss = 0.0;
            for (const auto& s : report.seeds) {
                const double d = s.tasks[t].mean_auc - p.mean;
                ss += d * d;
            }
            p.stddev = std::sqrt(ss / (n - 1.0));
        }
        report.aggregate.push_back(p);
    }
}

json report_to_json(const RunReport& report) {
    json seeds = json::array();
    for (const auto& s : report.seeds) {
        json tasks = json::array();
        for (const auto& t : s.tasks) {
            json per = json::array();
            for (const auto& a : t.per_disease_auc) per.push_back(a ? json(*a) : json(nullptr));
            tasks.push_back({{"task_index", t.task_index},
                             {"mean_auc", t.mean_auc},
                             {"per_disease_auc", per},
                             {"train_loss_trace", t.train_loss_trace}});
        }
        seeds.push_back({{"seed", s.seed}, {"tasks", tasks}, {"final_checksum", s.final_checksum}});
    }
    json agg = json::array();
    for (const auto& p : report.aggregate) {
        agg.push_back({{"task_index", p.task_index}, {"mean_auc", p.mean}, {"std_auc", p.stddev}});
    }
    return {
        {"scenario", to_string(report.scenario)},
        {"prompt_style", to_string(report.prompt_style)},
        {"adaptor_kind", to_string(report.adaptor_kind)},
        {"placement", to_string(report.placement)},
        {"disease_names", report.disease_names},
        {"seeds", seeds},
        {"aggregate", agg},
        {"warnings", report.warnings},
    };
}

RunReport report_from_json(const json& node) {
    try {
        RunReport r;
        r.scenario = parse_scenario(node.at("scenario").get<std::string>());
        r.prompt_style = parse_prompt_style(node.at("prompt_style").get<std::string>());
        r.adaptor_kind = parse_adaptor_kind(node.at("adaptor_kind").get<std::string>());
        r.placement = parse_placement(node.at("placement").get<std::string>());
        r.disease_names = node.at("disease_names").get<std::vector<std::string>>();
        for (const auto& s : node.at("seeds")) {
            SeedReport sr;
            sr.seed = s.at("seed").get<std::uint64_t>();
            sr.final_checksum = s.at("final_checksum").get<std::string>();
            for (const auto& t : s.at("tasks")) {
                TaskEvaluation te;
                te.task_index = t.at("task_index").get<int>();
                te.mean_auc = t.at("mean_auc").get<double>();
                for (const auto& a : t.at("per_disease_auc")) {
                    te.per_disease_auc.push_back(a.is_null() ? std::nullopt : std::optional<double>(a.get<double>()));
                }
                te.train_loss_trace = t.at("train_loss_trace").get<std::vector<double>>();
                sr.tasks.push_back(std::move(te));
            }
            r.seeds.push_back(std::move(sr));
        }
        if (node.contains("warnings")) r.warnings = node.at("warnings").get<std::vector<std::string>>();
        aggregate_seeds(r);
        return r;
    } catch (const json::exception& e) {
        fail(ErrorCode::DimensionMismatch, std::string("malformed report.json: ") + e.what());
    }
}

std::string report_to_csv(const RunReport& report) {
    std::ostringstream out;
    out << "seed,scenario,task,mean_auc";
    for (std::size_t j = 0; j < report.disease_names.size(); ++j) out << ",auc_d" << (j + 1);
    out << ",final_train_loss\n";
    for (const auto& s : report.seeds) {
        for (const auto& t : s.tasks) {
            out << s.seed << ',' << to_string(report.scenario) << ',' << t.task_index << ','
                << format_number(t.mean_auc);
            for (const auto& a : t.per_disease_auc) out << ',' << (a ? format_number(*a) : std::string());
            const auto loss = t.final_train_loss();
            out << ',' << (loss ? format_number(*loss) : std::string()) << '\n';
        }
    }
    return out.str();
}

}  // namespace adaptune
