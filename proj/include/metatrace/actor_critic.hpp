#pragma once

#include "metatrace/environments.hpp"
#include "metatrace/evaluator.hpp"
#include "metatrace/rng.hpp"

#include <cstdint>
#include <utility>

namespace metatrace {

/// Softmax over theta * x with theta an |A| x D matrix.
class SoftmaxPolicy {
public:
    SoftmaxPolicy(int n_actions, Eigen::Index dim) : theta_(Eigen::MatrixXd::Zero(n_actions, dim)) {}

    Eigen::VectorXd probabilities(const FeatureVector& x) const;
    /// Samples an action; returns it with its probability.
    std::pair<int, double> sample(const FeatureVector& x, Rng& rng) const;

    const Eigen::MatrixXd& theta() const { return theta_; }
    Eigen::MatrixXd& theta() { return theta_; }
    int n_actions() const { return static_cast<int>(theta_.rows()); }

private:
    Eigen::MatrixXd theta_;
};

inline std::pair<int, double> softmax_action(const SoftmaxPolicy& p, const FeatureVector& x, Rng& rng) {
    return p.sample(x, rng);
}

/// Gradient of log pi(a|x) with respect to theta.
Eigen::MatrixXd score_function(const SoftmaxPolicy& p, const FeatureVector& x, int action);

/// theta += eta * advantage * grad log pi(a|x).
void policy_gradient_step(SoftmaxPolicy& p, const FeatureVector& x, int action, double advantage,
                          double eta);

struct ActorConfig {
    double eta = 1.0;
};

struct EpisodeResult {
    double episode_return = 0.0;
    std::int64_t steps = 0;
    bool completed = false;
    double mean_lambda = 1.0;  // mean lambda(x_t) over the episode's visited states
};

/// On-policy actor-critic with a lambda-adapting critic. Per step: sample from
/// the policy, step the environment, let the critic (auxiliary learners, lambda
/// step, value learner) observe the transition, then take one policy-gradient
/// step with the critic's TD error as the advantage.
///
/// Stops early when max_steps environment steps have been taken; the returned
/// result then has completed = false.
EpisodeResult run_control_episode(Environment& env, SoftmaxPolicy& policy, PolicyEvaluator& critic,
                                  const ActorConfig& cfg, Rng& env_rng, Rng& policy_rng,
                                  std::int64_t max_steps);

}  // namespace metatrace
