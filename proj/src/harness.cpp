#include "metatrace/harness.hpp"

#include "metatrace/actor_critic.hpp"
#include "metatrace/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <mutex>
#include <thread>

namespace metatrace {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != value.size()) throw std::invalid_argument("bad number for '" + key + "': " + value);
    return v;
}

std::int64_t to_int(const std::string& key, const std::string& value) {
    const double v = to_double(key, value);
    if (v != std::floor(v)) throw std::invalid_argument("'" + key + "' must be an integer: " + value);
    return static_cast<std::int64_t>(v);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

}  // namespace

// RunConfig ------------------------------------------------------------------

std::int64_t RunConfig::buffer_steps() const {
    if (buffer) return *buffer;
    return is_control() ? steps / 2 : steps / 10;
}

void RunConfig::validate() const {
    static const std::set<std::string> kEnvs{"ringworld", "ringworld-onpolicy", "frozenlake",
                                            "frozenlake-onpolicy", "mountaincar"};
    if (!kEnvs.contains(env)) throw std::invalid_argument("unknown environment '" + env + "'");
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (beta && !(*beta >= 0.0)) throw std::invalid_argument("beta must be non-negative");
    if (steps <= 0) throw std::invalid_argument("steps must be positive");
    if (eval_interval <= 0) throw std::invalid_argument("eval-interval must be positive");
    if (buffer && *buffer < 0) throw std::invalid_argument("buffer must be non-negative");
    if (!(aux_mult > 0.0)) throw std::invalid_argument("aux-mult must be positive");

    const bool needs_lambda = method == Method::Baseline;
    const bool needs_kappa = method == Method::Meta || method == Method::MetaNp;
    if (needs_lambda != lambda.has_value()) {
        throw std::invalid_argument(needs_lambda ? "baseline requires --lambda"
                                                 : "--lambda only applies to the baseline method");
    }
    if (needs_kappa != kappa.has_value()) {
        throw std::invalid_argument(needs_kappa ? to_string(method) + " requires --kappa"
                                                : "--kappa only applies to meta and meta-np");
    }
    if (lambda && !(*lambda >= 0.0 && *lambda <= 1.0)) throw std::invalid_argument("lambda outside [0,1]");
    if (kappa && !(*kappa >= 0.0)) throw std::invalid_argument("kappa must be non-negative");
    if (is_control() != eta.has_value()) {
        throw std::invalid_argument(is_control() ? "mountaincar requires --eta"
                                                 : "--eta only applies to mountaincar");
    }
    if (eta && !(*eta >= 0.0)) throw std::invalid_argument("eta must be non-negative");
    if (gamma) {
        if (!(*gamma >= 0.0 && *gamma <= 1.0)) throw std::invalid_argument("gamma outside [0,1]");
        if (is_control() && *gamma != 1.0) throw std::invalid_argument("mountaincar is undiscounted");
    }
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key=value");
        }
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

void apply_key_values(RunConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "env") cfg.env = value;
        else if (key == "method") cfg.method = parse_method(value);
        else if (key == "alpha") cfg.alpha = to_double(key, value);
        else if (key == "beta") cfg.beta = to_double(key, value);
        else if (key == "lambda") cfg.lambda = to_double(key, value);
        else if (key == "kappa") cfg.kappa = to_double(key, value);
        else if (key == "eta") cfg.eta = to_double(key, value);
        else if (key == "gamma") cfg.gamma = to_double(key, value);
        else if (key == "steps") cfg.steps = to_int(key, value);
        else if (key == "buffer") cfg.buffer = to_int(key, value);
        else if (key == "aux-mult") cfg.aux_mult = to_double(key, value);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_int(key, value));
        else if (key == "eval-interval") cfg.eval_interval = to_int(key, value);
        else throw std::invalid_argument("unknown configuration key '" + key + "'");
    }
}

std::string to_string(Metric m) {
    switch (m) {
        case Metric::OverallValueError: return "overall_value_error";
        case Metric::EpisodeReturn: return "episode_return";
        case Metric::MeanLambda: return "mean_lambda";
    }
    return "?";
}

Metric parse_metric(const std::string& name) {
    if (name == "overall_value_error") return Metric::OverallValueError;
    if (name == "episode_return") return Metric::EpisodeReturn;
    if (name == "mean_lambda") return Metric::MeanLambda;
    throw std::invalid_argument("unknown metric '" + name + "'");
}

// Problems -------------------------------------------------------------------

PredictionProblem make_problem(const std::string& env, std::optional<double> gamma) {
    PredictionProblem p;
    if (env == "ringworld" || env == "ringworld-onpolicy") {
        auto ring = std::make_unique<RingWorldEnv>(11, gamma.value_or(0.95));
        const int n = ring->n_states();
        p.target = DiscretePolicy::uniform_rows(n, {0.35, 0.65});
        p.behavior = env == "ringworld" ? DiscretePolicy::uniform_rows(n, {0.4, 0.6}) : p.target;
        p.learner = env == "ringworld" ? LearnerKind::TrueOnlineGTD : LearnerKind::TrueOnlineTD;
        p.env = std::move(ring);
    } else if (env == "frozenlake" || env == "frozenlake-onpolicy") {
        auto lake = std::make_unique<FrozenLakeEnv>(gamma.value_or(0.95));
        const int n = lake->n_states();
        // west, south, east, north
        p.target = DiscretePolicy::uniform_rows(n, {0.2, 0.3, 0.3, 0.2});
        p.behavior = env == "frozenlake" ? DiscretePolicy::uniform_rows(n, {0.25, 0.25, 0.25, 0.25}) : p.target;
        p.learner = LearnerKind::TrueOnlineGTD;
        p.env = std::move(lake);
    } else {
        throw std::invalid_argument("no tabular prediction problem named '" + env + "'");
    }
    return p;
}

// Runs -----------------------------------------------------------------------

namespace {

EvaluatorConfig evaluator_config(const RunConfig& cfg, LearnerKind learner) {
    EvaluatorConfig ec;
    ec.method = cfg.method;
    ec.learner = learner;
    ec.alpha = cfg.alpha;
    ec.beta = cfg.beta_or_alpha();
    ec.lambda = cfg.lambda.value_or(1.0);
    ec.kappa = cfg.kappa.value_or(0.0);
    ec.buffer_steps = cfg.buffer_steps();
    ec.aux_multiplier = cfg.aux_mult;
    return ec;
}

}  // namespace

RunResult run_prediction(const RunConfig& cfg, std::int64_t run_id) {
    cfg.validate();
    if (cfg.is_control()) throw std::invalid_argument("run_prediction: " + cfg.env + " is a control task");

    PredictionProblem problem = make_problem(cfg.env, cfg.gamma);
    TabularEnvironment& env = *problem.env;
    const TabularMDP mdp = env.export_tabular();
    const int n = env.n_states();

    OracleSolution sol;
    sol.v = dp_values(mdp, problem.target, env.gamma());
    sol.d = occupancy(mdp, problem.target);

    const bool onehot_lambda = cfg.method == Method::MetaNp;
    std::vector<FeatureVector> lambda_features;
    for (int s = 0; s < n; ++s) lambda_features.push_back(onehot_lambda ? onehot(s, n) : env.features_of(s));

    PolicyEvaluator ev(env.feature_dim(), lambda_features.front().size(),
                       evaluator_config(cfg, problem.learner));
    Rng env_rng = make_stream(cfg.seed, "env");
    Rng behavior_rng = make_stream(cfg.seed, "behavior");

    RunResult result;
    auto record = [&](std::int64_t step, Metric m, double value) {
        result.records.push_back({run_id, cfg.seed, step, m, value});
    };
    auto values = [&] {
        Eigen::VectorXd V(n);
        for (int s = 0; s < n; ++s) V[s] = ev.predict(env.features_of(s));
        return V;
    };
    auto mean_lambda = [&] {
        double sum = 0.0;
        int count = 0;
        for (int s = 0; s < n; ++s) {
            if (env.is_terminal_state(s)) continue;
            sum += ev.lambda_at(lambda_features[static_cast<std::size_t>(s)]);
            ++count;
        }
        return sum / count;
    };

    bool need_reset = true;
    std::int64_t step = 0;
    try {
        for (; step < cfg.steps; ++step) {
            if (need_reset) {
                env.reset(env_rng);
                ev.begin_episode();
                ++result.episodes;
                need_reset = false;
            }
            const int s = env.state();
            const int a = problem.behavior.sample(s, uniform01(behavior_rng));
            Transition t = env.step(a, env_rng);
            t.rho = is_ratio(problem.target, problem.behavior, s, a);
            ev.observe(t, lambda_features[static_cast<std::size_t>(s)],
                       lambda_features[static_cast<std::size_t>(t.s_next)]);
            need_reset = t.terminal;

            const std::int64_t done = step + 1;
            if (done % cfg.eval_interval == 0 || done == cfg.steps) {
                const double err = overall_value_error(values(), sol);
                if (!std::isfinite(err)) throw DivergenceError("non-finite value error", done);
                record(done, Metric::OverallValueError, err);
                record(done, Metric::MeanLambda, mean_lambda());
                result.final_value = err;
            }
        }
    } catch (const DivergenceError&) {
        result.diverged = true;
        result.final_value = kInf;
        record(std::min(step + 1, cfg.steps), Metric::OverallValueError, kInf);
    }

    result.lambda_violations = ev.lambda_violations();
    result.cancellations = ev.cancellations();
    result.final_lambda.resize(n);
    for (int s = 0; s < n; ++s) result.final_lambda[s] = ev.lambda_at(lambda_features[static_cast<std::size_t>(s)]);
    return result;
}

RunResult run_control(const RunConfig& cfg, std::int64_t run_id) {
    cfg.validate();
    if (!cfg.is_control()) throw std::invalid_argument("run_control: " + cfg.env + " is a prediction task");

    MountainCarEnv env;
    const Eigen::Index dim = env.feature_dim();
    PolicyEvaluator critic(dim, dim, evaluator_config(cfg, LearnerKind::TrueOnlineGTD));
    SoftmaxPolicy policy(env.n_actions(), dim);
    const ActorConfig actor{*cfg.eta};
    Rng env_rng = make_stream(cfg.seed, "env");
    Rng policy_rng = make_stream(cfg.seed, "policy");

    RunResult result;
    std::int64_t used = 0;
    double return_sum = 0.0;
    double partial_return = 0.0;
    try {
        while (used < cfg.steps) {
            const EpisodeResult ep =
                run_control_episode(env, policy, critic, actor, env_rng, policy_rng, cfg.steps - used);
            used += ep.steps;
            if (!ep.completed) {
                partial_return = ep.episode_return;
                break;
            }
            ++result.episodes;
            return_sum += ep.episode_return;
            result.records.push_back({run_id, cfg.seed, used, Metric::EpisodeReturn, ep.episode_return});
            result.records.push_back({run_id, cfg.seed, used, Metric::MeanLambda, ep.mean_lambda});
        }
        // no finished episode: score the running one
        result.final_value = result.episodes > 0 ? return_sum / static_cast<double>(result.episodes)
                                                 : partial_return;
    } catch (const DivergenceError&) {
        result.diverged = true;
        result.final_value = -kInf;
        result.records.push_back({run_id, cfg.seed, std::min(critic.steps() + 1, cfg.steps),
                                  Metric::EpisodeReturn, kInf});
    }
    result.lambda_violations = critic.lambda_violations();
    result.cancellations = critic.cancellations();
    return result;
}

RunResult run_experiment(const RunConfig& cfg, std::int64_t run_id) {
    return cfg.is_control() ? run_control(cfg, run_id) : run_prediction(cfg, run_id);
}

// CSV ------------------------------------------------------------------------

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return fmt::format("{}", v);
}

void write_runs_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
    out << kRunsHeader << '\n';
    for (const MetricsRecord& r : records) {
        out << r.run_id << ',' << r.seed << ',' << r.step << ',' << to_string(r.metric) << ','
            << format_number(r.value) << '\n';
    }
}

// Sweeps ---------------------------------------------------------------------

std::vector<RunConfig> expand_grid(const std::map<std::string, std::string>& grid) {
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const auto& [key, value] : grid) {
        if (key == "runs" || key == "jobs") continue;
        axes.emplace_back(key, split(value, ','));
    }

    std::vector<RunConfig> cells;
    std::set<std::string> seen;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true) {
        std::map<std::string, std::string> kv;
        for (std::size_t i = 0; i < axes.size(); ++i) kv[axes[i].first] = axes[i].second[idx[i]];

        RunConfig cfg;
        const Method method = parse_method(kv.count("method") ? kv["method"] : "baseline");
        const bool control = (kv.count("env") ? kv["env"] : cfg.env) == "mountaincar";
        if (method != Method::Baseline) kv.erase("lambda");
        if (method != Method::Meta && method != Method::MetaNp) kv.erase("kappa");
        if (!control) kv.erase("eta");
        apply_key_values(cfg, kv);
        cfg.validate();

        std::string key;
        for (const auto& [k, v] : kv) key += k + "=" + v + ";";
        if (seen.insert(key).second) cells.push_back(cfg);

        std::size_t i = 0;
        for (; i < axes.size(); ++i) {
            if (++idx[i] < axes[i].second.size()) break;
            idx[i] = 0;
        }
        if (i == axes.size()) break;
    }
    return cells;
}

int resolve_jobs(int requested) {
    if (const char* env = std::getenv("META_TRACE_JOBS"); env != nullptr && *env != '\0') {
        const int j = std::atoi(env);
        if (j > 0) return j;
    }
    if (requested > 0) return requested;
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

SweepResult sweep(const std::vector<RunConfig>& cells, int runs_per_cell, int jobs) {
    if (runs_per_cell <= 0) throw std::invalid_argument("runs per cell must be positive");
    const std::size_t n_runs = cells.size() * static_cast<std::size_t>(runs_per_cell);
    std::vector<RunResult> results(n_runs);
    parallel_for(n_runs, jobs, [&](std::size_t i) {
        RunConfig cfg = cells[i / static_cast<std::size_t>(runs_per_cell)];
        cfg.seed += i % static_cast<std::size_t>(runs_per_cell);
        results[i] = run_experiment(cfg, static_cast<std::int64_t>(i));
    });

    SweepResult out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        SweepCell cell;
        cell.config = cells[c];
        cell.n_runs = runs_per_cell;
        std::vector<double> ok;
        for (int k = 0; k < runs_per_cell; ++k) {
            RunResult& r = results[c * static_cast<std::size_t>(runs_per_cell) + static_cast<std::size_t>(k)];
            cell.finals.push_back(r.final_value);
            cell.lambda_violations += r.lambda_violations;
            cell.cancellations += r.cancellations;
            if (r.diverged) ++cell.n_diverged;
            else ok.push_back(r.final_value);
            out.records.insert(out.records.end(), r.records.begin(), r.records.end());
        }
        if (ok.empty()) {
            cell.mean_final = kInf;
            cell.std_final = kInf;
        } else {
            const double mean = std::accumulate(ok.begin(), ok.end(), 0.0) / static_cast<double>(ok.size());
            double ss = 0.0;
            for (double v : ok) ss += (v - mean) * (v - mean);
            cell.mean_final = mean;
            cell.std_final = ok.size() > 1 ? std::sqrt(ss / static_cast<double>(ok.size() - 1)) : 0.0;
        }
        out.cells.push_back(std::move(cell));
    }
    return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SweepCell>& cells) {
    auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
    out << kSummaryHeader << '\n';
    for (const SweepCell& c : cells) {
        const RunConfig& r = c.config;
        out << r.env << ',' << to_string(r.method) << ',' << format_number(r.alpha) << ','
            << format_number(r.beta_or_alpha()) << ',' << opt(r.lambda) << ',' << opt(r.kappa) << ','
            << opt(r.eta) << ',' << c.n_runs << ',' << format_number(c.mean_final) << ','
            << format_number(c.std_final) << ',' << c.n_diverged << '\n';
    }
}

}  // namespace metatrace
