#include "adaptune/metrics.hpp"

#include "adaptune/blob.hpp"
#include "adaptune/error.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace adaptune {

AucResult auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size()) fail(ErrorCode::ShapeMismatch, "auc: scores and labels differ in length");
    if (scores.size() < 2) fail(ErrorCode::ShapeMismatch, "auc: need at least two scores");

    AucResult r;
    for (auto y : labels) (y ? r.num_pos : r.num_neg) += 1;

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Ranks are 1-based; a tie group spanning positions [lo, hi) shares
    // rank (lo + 1 + hi) / 2. Twice the rank stays integral.
    std::uint64_t twice_rank_sum_pos = 0;
    for (std::size_t lo = 0; lo < order.size();) {
        std::size_t hi = lo + 1;
        while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) ++hi;
        if (hi - lo > 1) ++r.tie_groups;
        const std::uint64_t twice_rank = lo + 1 + hi;
        for (std::size_t k = lo; k < hi; ++k) {
            if (labels[order[k]]) twice_rank_sum_pos += twice_rank;
        }
        lo = hi;
    }
    if (r.num_pos == 0 || r.num_neg == 0) return r;

    const double p = static_cast<double>(r.num_pos);
    const double q = static_cast<double>(r.num_neg);
    const double u = (static_cast<double>(twice_rank_sum_pos) - p * (p + 1.0)) / 2.0;
    r.value = u / (p * q);
    return r;
}

MeanAuc mean_auc(std::span<const AucResult> per_disease) {
    MeanAuc m;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& a : per_disease) {
        if (a.value) {
            sum += *a.value;
            ++n;
        } else {
            ++m.excluded_count;
        }
    }
    if (n == 0) fail(ErrorCode::AllUndefined, "no disease has a defined AUC");
    m.value = sum / static_cast<double>(n);
    return m;
}

namespace {

struct Frame {
    double left = 70, right = 620, top = 40, bottom = 360;
    int x_min = 0, x_max = 1;
    double y_min = 0.0, y_max = 1.0;

    double x(int task) const {
        if (x_max == x_min) return (left + right) / 2.0;
        return left + (right - left) * (task - x_min) / static_cast<double>(x_max - x_min);
    }
    double y(double v) const { return bottom - (bottom - top) * (v - y_min) / (y_max - y_min); }
};

std::string polyline(const Frame& f, const std::vector<std::pair<int, double>>& pts, const char* cls,
                     const char* stroke, double width) {
    std::ostringstream s;
    s << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << width
      << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s << ' ';
        s << format_number(f.x(pts[i].first)) << ',' << format_number(f.y(pts[i].second));
    }
    s << "\"/>\n";
    return s.str();
}

}  // namespace

void render_curves(const RunReport& report, const std::filesystem::path& svg_path, const CurveOptions& options) {
    if (report.seeds.empty() || report.task_count() == 0) {
        fail(ErrorCode::EmptyReport, "cannot plot an empty report");
    }
    RunReport r = report;
    aggregate_seeds(r);

    Frame f;
    f.x_min = r.aggregate.front().task_index;
    f.x_max = r.aggregate.back().task_index;
    double lo = 1.0, hi = 0.0;
    for (const auto& s : r.seeds) {
        for (const auto& t : s.tasks) {
            lo = std::min(lo, t.mean_auc);
            hi = std::max(hi, t.mean_auc);
        }
    }
    if (options.joint_baseline) {
        lo = std::min(lo, *options.joint_baseline);
        hi = std::max(hi, *options.joint_baseline);
    }
    f.y_min = std::max(0.0, std::floor(lo * 20.0 - 1.0) / 20.0);
    f.y_max = std::min(1.0, std::ceil(hi * 20.0 + 1.0) / 20.0);
    if (f.y_max <= f.y_min) f.y_max = f.y_min + 0.05;

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"660\" height=\"420\" viewBox=\"0 0 660 420\">\n";
    svg << "<rect width=\"660\" height=\"420\" fill=\"white\"/>\n";
    const std::string title = options.title.empty()
                                  ? std::string(to_string(r.scenario)) + " / " + std::string(to_string(r.prompt_style))
                                  : options.title;
    svg << "<text x=\"330\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">" << title
        << "</text>\n";
    svg << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
        << "<line x1=\"" << f.left << "\" y1=\"" << f.bottom << "\" x2=\"" << f.right << "\" y2=\"" << f.bottom
        << "\"/>\n"
        << "<line x1=\"" << f.left << "\" y1=\"" << f.top << "\" x2=\"" << f.left << "\" y2=\"" << f.bottom
        << "\"/>\n</g>\n";
    svg << "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"10\">\n";
    for (const auto& p : r.aggregate) {
        svg << "<text x=\"" << format_number(f.x(p.task_index)) << "\" y=\"" << (f.bottom + 14)
            << "\" text-anchor=\"middle\">" << p.task_index << "</text>\n";
    }
    for (int k = 0; k <= 4; ++k) {
        const double v = f.y_min + (f.y_max - f.y_min) * k / 4.0;
        char label[16];
        std::snprintf(label, sizeof(label), "%.3f", v);
        svg << "<text x=\"" << (f.left - 6) << "\" y=\"" << format_number(f.y(v) + 3) << "\" text-anchor=\"end\">"
            << label << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<text x=\"345\" y=\"400\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">task</text>\n";
    svg << "<text x=\"18\" y=\"200\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
           "transform=\"rotate(-90 18 200)\">mean AUC</text>\n";

    if (options.joint_baseline) {
        svg << "<line class=\"baseline\" x1=\"" << f.left << "\" x2=\"" << f.right << "\" y1=\""
            << format_number(f.y(*options.joint_baseline)) << "\" y2=\"" << format_number(f.y(*options.joint_baseline))
            << "\" stroke=\"gray\" stroke-dasharray=\"6 4\"/>\n";
    }

    std::ostringstream csv;
    csv << "series,task,mean_auc\n";
    for (const auto& s : r.seeds) {
        std::vector<std::pair<int, double>> pts;
        for (const auto& t : s.tasks) {
            pts.emplace_back(t.task_index, t.mean_auc);
            csv << "seed_" << s.seed << ',' << t.task_index << ',' << format_number(t.mean_auc) << '\n';
        }
        svg << polyline(f, pts, "seed", "#7fa7d9", 1.0);
    }
    std::vector<std::pair<int, double>> mean_pts;
    for (const auto& p : r.aggregate) {
        mean_pts.emplace_back(p.task_index, p.mean);
        csv << "mean," << p.task_index << ',' << format_number(p.mean) << '\n';
    }
    svg << polyline(f, mean_pts, "mean", "#1f4e8c", 3.0);
    if (options.joint_baseline) csv << "joint_baseline,," << format_number(*options.joint_baseline) << '\n';
    svg << "</svg>\n";

    write_text_file(svg_path, svg.str());
    auto csv_path = svg_path;
    csv_path.replace_extension(".csv");
    write_text_file(csv_path, csv.str());
}

}  // namespace adaptune
