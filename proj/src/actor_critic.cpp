#include "metatrace/actor_critic.hpp"

#include <cmath>

namespace metatrace {

Eigen::VectorXd SoftmaxPolicy::probabilities(const FeatureVector& x) const {
    if (x.size() != theta_.cols()) throw std::invalid_argument("policy feature dimension mismatch");
    Eigen::VectorXd logits = theta_ * x;
    logits.array() -= logits.maxCoeff();
    Eigen::VectorXd p = logits.array().exp().matrix();
    return p / p.sum();
}

std::pair<int, double> SoftmaxPolicy::sample(const FeatureVector& x, Rng& rng) const {
    const Eigen::VectorXd p = probabilities(x);
    const double u = uniform01(rng);
    double cdf = 0.0;
    for (int a = 0; a + 1 < n_actions(); ++a) {
        cdf += p[a];
        if (u < cdf) return {a, p[a]};
    }
    return {n_actions() - 1, p[n_actions() - 1]};
}

Eigen::MatrixXd score_function(const SoftmaxPolicy& p, const FeatureVector& x, int action) {
    const Eigen::VectorXd probs = p.probabilities(x);
    Eigen::MatrixXd grad = -probs * x.transpose();
    grad.row(action) += x.transpose();
    return grad;
}

void policy_gradient_step(SoftmaxPolicy& p, const FeatureVector& x, int action, double advantage,
                          double eta) {
    if (advantage == 0.0 || eta == 0.0) return;
    const Eigen::VectorXd probs = p.probabilities(x);
    const double scale = eta * advantage;
    // row a' -= pi(a'|x) x for every a', row a += x
    p.theta().noalias() -= scale * probs * x.transpose();
    p.theta().row(action) += scale * x.transpose();
}

EpisodeResult run_control_episode(Environment& env, SoftmaxPolicy& policy, PolicyEvaluator& critic,
                                  const ActorConfig& cfg, Rng& env_rng, Rng& policy_rng,
                                  std::int64_t max_steps) {
    EpisodeResult result;
    critic.begin_episode();
    FeatureVector x = env.reset(env_rng);
    double lambda_sum = 0.0;
    while (result.steps < max_steps) {
        const auto [action, prob] = policy.sample(x, policy_rng);
        (void)prob;
        Transition t = env.step(action, env_rng);
        t.rho = 1.0;
        lambda_sum += critic.lambda_at(t.x);
        const double delta = critic.observe(t, t.x, t.x_next);
        policy_gradient_step(policy, t.x, action, delta, cfg.eta);
        result.episode_return += t.r;
        ++result.steps;
        if (t.terminal) {
            result.completed = true;
            break;
        }
        x = std::move(t.x_next);
    }
    if (result.steps > 0) result.mean_lambda = lambda_sum / static_cast<double>(result.steps);
    return result;
}

}  // namespace metatrace
