#include "metatrace/plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace metatrace {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw std::runtime_error(fmt::format("line {}: {}", line_no, what));
}

double parse_double(const std::string& s, int line_no) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        fail(line_no, "bad number '" + s + "'");
    }
    if (used != s.size()) fail(line_no, "bad number '" + s + "'");
    return v;
}

std::optional<double> parse_optional(const std::string& s, int line_no) {
    if (s.empty()) return std::nullopt;
    return parse_double(s, line_no);
}

long long parse_integer(const std::string& s, int line_no) {
    const double v = parse_double(s, line_no);
    if (!std::isfinite(v) || v != std::floor(v)) fail(line_no, "expected an integer, got '" + s + "'");
    return static_cast<long long>(v);
}

std::vector<std::vector<std::string>> read_table(std::istream& in, const std::string& header) {
    std::string line;
    int line_no = 0;
    std::vector<std::vector<std::string>> rows;
    const std::size_t columns = split_csv(header).size();
    if (!std::getline(in, line)) fail(1, "empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != header) fail(line_no, "unexpected header '" + line + "'");
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv(line);
        if (cells.size() != columns) {
            fail(line_no, fmt::format("expected {} columns, found {}", columns, cells.size()));
        }
        cells.push_back(std::to_string(line_no));
        rows.push_back(std::move(cells));
    }
    return rows;
}

struct Frame {
    double x0, x1, y0, y1;

    double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void expand(double& lo, double& hi) {
    if (!(hi > lo)) {
        const double pad = std::abs(lo) > 0 ? std::abs(lo) * 0.1 : 1.0;
        lo -= pad;
        hi += pad;
    }
}

std::string open_svg(const Frame& f, const std::string& title, const std::string& xlabel,
                     const std::string& ylabel) {
    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        "<text x=\"{2}\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
        kWidth, kHeight, (kLeft + kWidth - kRight) / 2, title);
    const double bx0 = f.px(f.x0), bx1 = f.px(f.x1), by0 = f.py(f.y0), by1 = f.py(f.y1);
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                     bx0, by1, bx1 - bx0, by0 - by1);
    for (int i = 0; i <= 4; ++i) {
        const double xv = f.x0 + (f.x1 - f.x0) * i / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * i / 4.0;
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", f.px(xv),
                         by0 + 16, xv);
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", bx0 - 6,
                         f.py(yv) + 4, yv);
    }
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", (bx0 + bx1) / 2,
                     kHeight - 12, xlabel);
    s += fmt::format("<text transform=\"translate(16,{:.1f}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n",
                     (by0 + by1) / 2, ylabel);
    return s;
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const char* color) {
    std::string s = "<polyline fill=\"none\" stroke-width=\"1.8\" stroke=\"" + std::string(color) + "\" points=\"";
    for (const auto& [x, y] : pts) s += fmt::format("{:.1f},{:.1f} ", x, y);
    return s + "\"/>\n";
}

std::string band(const std::vector<std::pair<double, double>>& upper,
                 const std::vector<std::pair<double, double>>& lower, const char* color) {
    if (upper.empty()) return {};
    std::string s = "<polygon fill-opacity=\"0.18\" stroke=\"none\" fill=\"" + std::string(color) + "\" points=\"";
    for (const auto& [x, y] : upper) s += fmt::format("{:.1f},{:.1f} ", x, y);
    for (auto it = lower.rbegin(); it != lower.rend(); ++it) s += fmt::format("{:.1f},{:.1f} ", it->first, it->second);
    return s + "\"/>\n";
}

std::string legend_entry(std::size_t index, const std::string& label, const char* color) {
    const double y = kTop + 14 + 18.0 * static_cast<double>(index);
    const double x = kWidth - kRight + 12;
    return fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2.5\"/>"
                       "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
                       x, y, x + 20, color, x + 26, y + 4, label);
}

}  // namespace

std::string SummaryRow::series() const {
    if (lambda) return fmt::format("{} lambda={}", method, *lambda);
    if (kappa) return fmt::format("{} kappa={}", method, *kappa);
    return method;
}

std::vector<SummaryRow> read_summary_csv(std::istream& in) {
    std::vector<SummaryRow> out;
    for (const auto& c : read_table(in, kSummaryHeader)) {
        const int line_no = std::stoi(c.back());
        SummaryRow r;
        r.env = c[0];
        r.method = c[1];
        r.alpha = parse_double(c[2], line_no);
        r.beta = parse_double(c[3], line_no);
        r.lambda = parse_optional(c[4], line_no);
        r.kappa = parse_optional(c[5], line_no);
        r.eta = parse_optional(c[6], line_no);
        r.n_runs = static_cast<int>(parse_integer(c[7], line_no));
        r.mean_final = parse_double(c[8], line_no);
        r.std_final = parse_double(c[9], line_no);
        r.n_diverged = static_cast<int>(parse_integer(c[10], line_no));
        if (!(r.alpha > 0)) fail(line_no, "alpha must be positive");
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<MetricsRecord> read_runs_csv(std::istream& in) {
    std::vector<MetricsRecord> out;
    for (const auto& c : read_table(in, kRunsHeader)) {
        const int line_no = std::stoi(c.back());
        MetricsRecord r;
        r.run_id = parse_integer(c[0], line_no);
        r.seed = static_cast<std::uint64_t>(parse_integer(c[1], line_no));
        r.step = parse_integer(c[2], line_no);
        try {
            r.metric = parse_metric(c[3]);
        } catch (const std::invalid_argument& e) {
            fail(line_no, e.what());
        }
        r.value = parse_double(c[4], line_no);
        out.push_back(r);
    }
    return out;
}

std::string ucurve_svg(const std::vector<SummaryRow>& rows, const std::string& title) {
    if (rows.empty()) throw std::invalid_argument("no rows to plot");
    std::map<std::string, std::vector<const SummaryRow*>> series;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const SummaryRow& r : rows) {
        series[r.series()].push_back(&r);
        const double lx = std::log10(r.alpha);
        x0 = std::min(x0, lx);
        x1 = std::max(x1, lx);
        if (r.n_diverged == 0 && std::isfinite(r.mean_final)) {
            const double sd = std::isfinite(r.std_final) ? r.std_final : 0.0;
            y0 = std::min(y0, r.mean_final - sd);
            y1 = std::max(y1, r.mean_final + sd);
        }
    }
    if (!std::isfinite(y0)) {
        y0 = 0.0;
        y1 = 1.0;
    }
    expand(x0, x1);
    expand(y0, y1);
    y1 += 0.05 * (y1 - y0);
    const Frame f{x0, x1, y0, y1};

    std::string svg = open_svg(f, title, "log10(alpha)", "final performance");
    std::size_t index = 0;
    for (auto& [label, cells] : series) {
        const char* color = kPalette[index % std::size(kPalette)];
        std::sort(cells.begin(), cells.end(), [](auto* a, auto* b) { return a->alpha < b->alpha; });
        std::vector<std::pair<double, double>> line, upper, lower;
        std::string markers;
        for (const SummaryRow* r : cells) {
            const double x = f.px(std::log10(r->alpha));
            if (r->n_diverged > 0 || !std::isfinite(r->mean_final)) {
                const double y = f.py(f.y1);
                markers += fmt::format("<path d=\"M{0:.1f},{1:.1f} l8,8 m0,-8 l-8,8\" stroke=\"{2}\" "
                                       "stroke-width=\"2\" transform=\"translate(-4,-4)\"/>\n",
                                       x, y, color);
                continue;
            }
            const double sd = std::isfinite(r->std_final) ? r->std_final : 0.0;
            line.emplace_back(x, f.py(r->mean_final));
            upper.emplace_back(x, f.py(std::min(r->mean_final + sd, f.y1)));
            lower.emplace_back(x, f.py(std::max(r->mean_final - sd, f.y0)));
            markers += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"{}\"/>\n", x,
                                   f.py(r->mean_final), color);
        }
        svg += band(upper, lower, color);
        svg += polyline(line, color);
        svg += markers;
        svg += legend_entry(index, label, color);
        ++index;
    }
    return svg + "</svg>\n";
}

std::string learning_svg(const std::vector<LearningSeries>& series, Metric metric, int bins,
                         const std::string& title) {
    if (bins <= 0) throw std::invalid_argument("bins must be positive");
    std::int64_t max_step = 0;
    for (const auto& s : series)
        for (const auto& r : s.records)
            if (r.metric == metric) max_step = std::max(max_step, r.step);
    if (max_step == 0) throw std::invalid_argument("no records for metric " + to_string(metric));

    struct Binned {
        std::vector<double> x, mean, sd;
    };
    std::vector<Binned> binned;
    double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
    for (const auto& s : series) {
        std::vector<double> sum(static_cast<std::size_t>(bins), 0.0), sq(sum), n(sum);
        for (const auto& r : s.records) {
            if (r.metric != metric || !std::isfinite(r.value)) continue;
            auto b = static_cast<std::size_t>((r.step - 1) * bins / max_step);
            b = std::min(b, static_cast<std::size_t>(bins - 1));
            sum[b] += r.value;
            sq[b] += r.value * r.value;
            n[b] += 1;
        }
        Binned out;
        for (std::size_t b = 0; b < sum.size(); ++b) {
            if (n[b] == 0) continue;
            const double m = sum[b] / n[b];
            const double var = n[b] > 1 ? std::max(0.0, (sq[b] - n[b] * m * m) / (n[b] - 1)) : 0.0;
            out.x.push_back((static_cast<double>(b) + 0.5) * static_cast<double>(max_step) / bins);
            out.mean.push_back(m);
            out.sd.push_back(std::sqrt(var));
            y0 = std::min(y0, m - std::sqrt(var));
            y1 = std::max(y1, m + std::sqrt(var));
        }
        binned.push_back(std::move(out));
    }
    if (!std::isfinite(y0)) {
        y0 = 0.0;
        y1 = 1.0;
    }
    expand(y0, y1);
    const Frame f{0.0, static_cast<double>(max_step), y0, y1};

    std::string svg = open_svg(f, title, "step", to_string(metric));
    for (std::size_t i = 0; i < binned.size(); ++i) {
        const char* color = kPalette[i % std::size(kPalette)];
        std::vector<std::pair<double, double>> line, upper, lower;
        for (std::size_t k = 0; k < binned[i].x.size(); ++k) {
            const double x = f.px(binned[i].x[k]);
            line.emplace_back(x, f.py(binned[i].mean[k]));
            upper.emplace_back(x, f.py(binned[i].mean[k] + binned[i].sd[k]));
            lower.emplace_back(x, f.py(binned[i].mean[k] - binned[i].sd[k]));
        }
        svg += band(upper, lower, color);
        svg += polyline(line, color);
        svg += legend_entry(i, series[i].label, color);
    }
    return svg + "</svg>\n";
}

}  // namespace metatrace
