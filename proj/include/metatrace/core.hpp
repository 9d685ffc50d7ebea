#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace metatrace {

using FeatureVector = Eigen::VectorXd;

/// Raised when a learner produces a non-finite statistic. Carries the learner's
/// step index so the harness can record where the run blew up.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, std::int64_t step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

    std::int64_t step() const noexcept { return step_; }

private:
    std::int64_t step_;
};

/// One environment step as consumed by every learner.
struct Transition {
    FeatureVector x;
    int a = 0;
    double r = 0.0;
    FeatureVector x_next;
    double gamma_next = 0.0;
    double rho = 1.0;
    bool terminal = false;
    // Tabular state ids; -1 for continuous environments.
    int s = -1;
    int s_next = -1;
};

/// Table of action probabilities, one row per state.
class DiscretePolicy {
public:
    DiscretePolicy() = default;
    explicit DiscretePolicy(Eigen::MatrixXd probs);

    /// Every state shares the same action distribution.
    static DiscretePolicy uniform_rows(int n_states, const std::vector<double>& row);

    double prob(int state, int action) const { return probs_(state, action); }
    int n_states() const { return static_cast<int>(probs_.rows()); }
    int n_actions() const { return static_cast<int>(probs_.cols()); }
    const Eigen::MatrixXd& table() const { return probs_; }

    /// Inverse-CDF sample using a uniform draw in [0,1).
    int sample(int state, double u) const;

private:
    Eigen::MatrixXd probs_;
};

/// pi(a|s) / b(a|s). Throws std::domain_error when b does not cover pi.
double is_ratio(const DiscretePolicy& pi, const DiscretePolicy& b, int state, int action);

/// Running product of importance-sampling ratios within one episode.
struct EpisodeAccumulator {
    double rho_acc = 1.0;
    std::int64_t step_count = 0;
    double cap = 1e6;
    std::int64_t clamp_events = 0;

    void reset() {
        rho_acc = 1.0;
        step_count = 0;
    }

    void accumulate(double rho);
};

/// Dense tabular MDP. kernel[a](s, s') and reward[a](s, s').
struct TabularMDP {
    int n_states = 0;
    int n_actions = 0;
    std::vector<Eigen::MatrixXd> kernel;
    std::vector<Eigen::MatrixXd> reward;
    std::vector<bool> terminal;
    Eigen::VectorXd start;

    /// Checks stochasticity of every row, terminal self-absorption and the start distribution.
    void validate() const;

    bool is_terminal(int s) const { return terminal[static_cast<std::size_t>(s)]; }
};

}  // namespace metatrace
