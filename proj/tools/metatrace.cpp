#include "metatrace/harness.hpp"
#include "metatrace/oracles.hpp"
#include "metatrace/plot.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

using namespace metatrace;
namespace fs = std::filesystem;

namespace {

const char* const kRunKeys[] = {"env",   "method", "alpha", "beta",    "lambda",    "kappa",        "eta",
                                "gamma", "steps",  "buffer", "aux-mult", "seed", "eval-interval"};

struct CommonFlags {
    std::map<std::string, std::string> values;
    std::string config;
    int runs = 1;
    int jobs = 0;
    std::string out;
};

void add_run_flags(CLI::App* app, CommonFlags& f, const std::string& note) {
    for (const char* key : kRunKeys) {
        app->add_option_function<std::string>(
            std::string("--") + key, [&f, key](const std::string& v) { f.values[key] = v; }, note);
    }
    app->add_option("--runs", f.runs, "independent seeds per configuration")->check(CLI::PositiveNumber);
    app->add_option("--jobs", f.jobs, "worker threads (META_TRACE_JOBS overrides)");
    app->add_option("--out", f.out, "output directory for runs.csv and summary.csv");
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> merged(const CommonFlags& f) {
    std::map<std::string, std::string> kv;
    if (!f.config.empty()) kv = parse_key_values(slurp(f.config));
    for (const auto& [k, v] : f.values) kv[k] = v;
    if (auto it = kv.find("runs"); it != kv.end()) kv.erase(it);
    if (auto it = kv.find("jobs"); it != kv.end()) kv.erase(it);
    return kv;
}

int config_int(const CommonFlags& f, const char* key, int fallback) {
    if (f.config.empty()) return fallback;
    const auto kv = parse_key_values(slurp(f.config));
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : std::stoi(it->second);
}

void emit(const SweepResult& result, const std::string& out) {
    if (out.empty()) {
        write_runs_csv(std::cout, result.records);
        write_summary_csv(std::cerr, result.cells);
        return;
    }
    fs::create_directories(out);
    std::ofstream runs(fs::path(out) / "runs.csv");
    write_runs_csv(runs, result.records);
    std::ofstream summary(fs::path(out) / "summary.csv");
    write_summary_csv(summary, result.cells);
    std::cerr << fmt::format("wrote {} and {}\n", (fs::path(out) / "runs.csv").string(),
                             (fs::path(out) / "summary.csv").string());
}

int execute(const CommonFlags& f, const std::vector<RunConfig>& cells, int runs) {
    const SweepResult result = sweep(cells, runs, resolve_jobs(f.jobs));
    emit(result, f.out);
    return 0;
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trace-based policy evaluation with meta-learned lambda"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    CLI::App* run = app.add_subcommand("run", "run one configuration for --runs seeds");
    add_run_flags(run, run_flags, "run setting");
    run->add_option("--config", run_flags.config, "key=value file; flags take precedence");

    CommonFlags sweep_flags;
    CLI::App* sw = app.add_subcommand("sweep", "run every cell of a key=value grid (comma-separated lists)");
    sw->add_option("grid", sweep_flags.config, "grid file")->required();
    add_run_flags(sw, sweep_flags, "comma-separated values, overrides the grid file");

    std::string oracle_env = "ringworld", oracle_out;
    std::optional<double> oracle_gamma;
    double oracle_lambda = 1.0;
    CLI::App* orc = app.add_subcommand("oracle", "dump exact per-state statistics as CSV");
    orc->add_option("--env", oracle_env, "ringworld, ringworld-onpolicy, frozenlake, frozenlake-onpolicy");
    orc->add_option("--gamma", oracle_gamma);
    orc->add_option("--lambda", oracle_lambda, "constant lambda")->check(CLI::Range(0.0, 1.0));
    orc->add_option("--out", oracle_out, "output file (stdout when omitted)");

    std::string plot_kind, plot_out, plot_title, plot_metric = "overall_value_error";
    std::vector<std::string> plot_inputs;
    int plot_bins = 50;
    CLI::App* plot = app.add_subcommand("plot", "render a summary or runs CSV as SVG");
    plot->add_option("kind", plot_kind, "ucurve or learning")->required()->check(CLI::IsMember({"ucurve", "learning"}));
    plot->add_option("csv", plot_inputs, "input CSV files (learning: path or label=path)")->required();
    plot->add_option("--out", plot_out, "output SVG (stdout when omitted)");
    plot->add_option("--title", plot_title);
    plot->add_option("--metric", plot_metric, "learning-curve metric");
    plot->add_option("--bins", plot_bins, "learning-curve step bins")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            RunConfig cfg;
            apply_key_values(cfg, merged(run_flags));
            cfg.validate();
            const int runs = run->count("--runs") ? run_flags.runs : config_int(run_flags, "runs", 1);
            return execute(run_flags, {cfg}, runs);
        }
        if (*sw) {
            const auto cells = expand_grid(merged(sweep_flags));
            const int runs = sw->count("--runs") ? sweep_flags.runs : config_int(sweep_flags, "runs", 30);
            std::cerr << fmt::format("{} cells x {} runs\n", cells.size(), runs);
            return execute(sweep_flags, cells, runs);
        }
        if (*orc) {
            PredictionProblem p = make_problem(oracle_env, oracle_gamma);
            const TabularMDP mdp = p.env->export_tabular();
            const int n = p.env->n_states();
            const double gamma = p.env->gamma();
            const Eigen::VectorXd lambda = Eigen::VectorXd::Constant(n, oracle_lambda);
            const OracleSolution sol = solve_oracle(mdp, p.target, gamma, lambda);
            const ReturnStats mc = mc_return_stats(mdp, p.target, gamma);
            std::ostringstream csv;
            csv << "state,terminal,d,v,e_g,var_g,e_glam,var_glam\n";
            for (int s = 0; s < n; ++s) {
                csv << s << ',' << (p.env->is_terminal_state(s) ? 1 : 0) << ',' << format_number(sol.d[s]) << ','
                    << format_number(sol.v[s]) << ',' << format_number(mc.mean[s]) << ','
                    << format_number(mc.variance[s]) << ',' << format_number(sol.e_glam[s]) << ','
                    << format_number(sol.var_glam[s]) << '\n';
            }
            write_text(oracle_out, csv.str());
            return 0;
        }
        if (*plot) {
            if (plot_kind == "ucurve") {
                std::vector<SummaryRow> rows;
                for (const auto& path : plot_inputs) {
                    std::istringstream in(slurp(path));
                    try {
                        auto part = read_summary_csv(in);
                        rows.insert(rows.end(), part.begin(), part.end());
                    } catch (const std::runtime_error& e) {
                        throw std::runtime_error(path + ": " + e.what());
                    }
                }
                write_text(plot_out, ucurve_svg(rows, plot_title.empty() ? "final performance vs alpha" : plot_title));
            } else {
                std::vector<LearningSeries> series;
                for (const auto& arg : plot_inputs) {
                    const auto eq = arg.find('=');
                    const std::string label = eq == std::string::npos ? fs::path(arg).parent_path().filename().string()
                                                                      : arg.substr(0, eq);
                    const std::string path = eq == std::string::npos ? arg : arg.substr(eq + 1);
                    std::istringstream in(slurp(path));
                    try {
                        series.push_back({label.empty() ? path : label, read_runs_csv(in)});
                    } catch (const std::runtime_error& e) {
                        throw std::runtime_error(path + ": " + e.what());
                    }
                }
                write_text(plot_out, learning_svg(series, parse_metric(plot_metric), plot_bins,
                                                  plot_title.empty() ? plot_metric : plot_title));
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
