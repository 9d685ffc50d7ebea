#pragma once

#include "metatrace/environments.hpp"
#include "metatrace/evaluator.hpp"
#include "metatrace/oracles.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace metatrace {

/// One experiment run. Optional fields are method- or environment-specific and
/// are rejected where they do not apply.
struct RunConfig {
    std::string env = "ringworld";
    Method method = Method::Baseline;
    double alpha = 0.01;
    std::optional<double> beta;    // defaults to alpha
    std::optional<double> lambda;  // baseline only
    std::optional<double> kappa;   // meta / meta-np only
    std::optional<double> eta;     // control only
    std::optional<double> gamma;   // environment default when unset
    std::int64_t steps = 200000;
    std::optional<std::int64_t> buffer;  // 10% of steps for prediction, 50% for control
    double aux_mult = 2.0;
    std::uint64_t seed = 0;
    std::int64_t eval_interval = 1000;

    void validate() const;
    bool is_control() const { return env == "mountaincar"; }
    double beta_or_alpha() const { return beta.value_or(alpha); }
    std::int64_t buffer_steps() const;
};

/// Flat key=value text (one pair per line, '#' comments) mirroring the CLI flags.
std::map<std::string, std::string> parse_key_values(const std::string& text);
/// Applies parsed keys to a config; unknown keys throw.
void apply_key_values(RunConfig& cfg, const std::map<std::string, std::string>& kv);

enum class Metric { OverallValueError, EpisodeReturn, MeanLambda };
std::string to_string(Metric m);
Metric parse_metric(const std::string& name);

struct MetricsRecord {
    std::int64_t run_id = 0;
    std::uint64_t seed = 0;
    std::int64_t step = 0;
    Metric metric = Metric::OverallValueError;
    double value = 0.0;
};

struct RunResult {
    std::vector<MetricsRecord> records;
    bool diverged = false;
    /// Last overall value error (prediction) or mean completed-episode return (control).
    double final_value = 0.0;
    std::int64_t lambda_violations = 0;
    std::int64_t cancellations = 0;
    std::int64_t episodes = 0;
    /// lambda(x) of every state at the end of a tabular run.
    Eigen::VectorXd final_lambda;
};

/// A tabular prediction task: environment, target and behaviour policy, learner.
struct PredictionProblem {
    std::unique_ptr<TabularEnvironment> env;
    DiscretePolicy target;
    DiscretePolicy behavior;
    LearnerKind learner = LearnerKind::TrueOnlineGTD;
    bool on_policy() const { return target.table() == behavior.table(); }
};

/// Known names: ringworld (behaviour left 0.4, target left 0.35), ringworld-onpolicy
/// (both left 0.35), frozenlake (uniform behaviour; target 0.3 south/east, 0.2
/// north/west), frozenlake-onpolicy (both the target policy).
PredictionProblem make_problem(const std::string& env, std::optional<double> gamma = std::nullopt);

RunResult run_prediction(const RunConfig& cfg, std::int64_t run_id = 0);
RunResult run_control(const RunConfig& cfg, std::int64_t run_id = 0);
RunResult run_experiment(const RunConfig& cfg, std::int64_t run_id = 0);

// CSV ---------------------------------------------------------------------

inline constexpr const char* kRunsHeader = "run_id,seed,step,metric,value";
inline constexpr const char* kSummaryHeader =
    "env,method,alpha,beta,lambda,kappa,eta,n_runs,mean_final,std_final,n_diverged";

/// Shortest round-trip decimal; non-finite values print as inf / -inf / nan.
std::string format_number(double v);

void write_runs_csv(std::ostream& out, const std::vector<MetricsRecord>& records);

// Sweeps ------------------------------------------------------------------

struct SweepCell {
    RunConfig config;  // seed is the base seed of the cell
    int n_runs = 0;
    double mean_final = 0.0;
    double std_final = 0.0;
    int n_diverged = 0;
    std::vector<double> finals;  // per-run final values, seed order
    std::int64_t lambda_violations = 0;
    std::int64_t cancellations = 0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<MetricsRecord> records;
};

/// Expands a key=value grid (comma-separated lists) into run configs. Keys that do
/// not apply to a method are dropped for that method's cells.
std::vector<RunConfig> expand_grid(const std::map<std::string, std::string>& grid);

/// Runs runs_per_cell seeds (base seed + k) for every cell on `jobs` worker threads.
/// Results do not depend on jobs.
SweepResult sweep(const std::vector<RunConfig>& cells, int runs_per_cell, int jobs);

void write_summary_csv(std::ostream& out, const std::vector<SweepCell>& cells);

/// Honours META_TRACE_JOBS when set.
int resolve_jobs(int requested);

/// Runs fn(i) for i in [0, n) on a pool of `jobs` threads.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace metatrace
