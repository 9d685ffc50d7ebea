#include "metatrace/environments.hpp"
#include "metatrace/oracles.hpp"
#include "metatrace/rng.hpp"

#include "helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace metatrace;
using metatrace::testing::sample_episode;

namespace {

// 0 -> 1 deterministically, 1 -> {2: +1, 3: -1} with equal odds; 2 and 3 terminal.
TabularMDP lottery_chain() {
    TabularMDP m;
    m.n_states = 4;
    m.n_actions = 1;
    m.kernel.assign(1, Eigen::MatrixXd::Zero(4, 4));
    m.reward.assign(1, Eigen::MatrixXd::Zero(4, 4));
    m.kernel[0](0, 1) = 1.0;
    m.kernel[0](1, 2) = 0.5;
    m.kernel[0](1, 3) = 0.5;
    m.reward[0](1, 2) = 1.0;
    m.reward[0](1, 3) = -1.0;
    m.kernel[0](2, 2) = 1.0;
    m.kernel[0](3, 3) = 1.0;
    m.terminal = {false, false, true, true};
    m.start = Eigen::Vector4d(1, 0, 0, 0);
    m.validate();
    return m;
}

double sampled_lambda_return(const std::vector<Transition>& ep, const Eigen::VectorXd& lambda,
                             const Eigen::VectorXd& V) {
    double g = 0.0;
    for (std::size_t k = ep.size(); k-- > 0;) {
        const Transition& t = ep[k];
        g = t.r + t.gamma_next * ((1.0 - lambda[t.s_next]) * V[t.s_next] + lambda[t.s_next] * g);
    }
    return g;
}

}  // namespace

TEST(DpValues, ZeroDiscountIsExpectedReward) {
    RingWorldEnv env(11, 0.0);
    const auto pi = DiscretePolicy::uniform_rows(11, {0.35, 0.65});
    const Eigen::VectorXd v = dp_values(env.export_tabular(), pi, 0.0);
    EXPECT_NEAR(v[1], -0.35, 1e-14);
    EXPECT_NEAR(v[9], 0.65, 1e-14);
    EXPECT_NEAR(v[5], 0.0, 1e-14);
}

TEST(DpValues, SymmetricPolicyIsAntisymmetric) {
    RingWorldEnv env;
    const auto pi = DiscretePolicy::uniform_rows(11, {0.5, 0.5});
    const Eigen::VectorXd v = dp_values(env.export_tabular(), pi, 0.95);
    EXPECT_NEAR(v[5], 0.0, 1e-14);
    for (int s = 0; s < 11; ++s) EXPECT_NEAR(v[s], -v[10 - s], 1e-14);
}

TEST(DpValues, RightDriftMakesMiddlePositive) {
    RingWorldEnv env;
    const auto pi = DiscretePolicy::uniform_rows(11, {0.35, 0.65});
    const Eigen::VectorXd v = dp_values(env.export_tabular(), pi, 0.95);
    EXPECT_GT(v[5], 0.0);
    EXPECT_EQ(v[0], 0.0);
    EXPECT_EQ(v[10], 0.0);
    // Bellman residual
    for (int s = 1; s < 10; ++s) {
        const double left = s - 1 == 0 ? -1.0 : 0.95 * v[s - 1];
        const double right = s + 1 == 10 ? 1.0 : 0.95 * v[s + 1];
        EXPECT_NEAR(v[s], 0.35 * left + 0.65 * right, 1e-13);
    }
}

TEST(Occupancy, SingleState) {
    TabularMDP m;
    m.n_states = 2;
    m.n_actions = 1;
    m.kernel.assign(1, Eigen::MatrixXd::Zero(2, 2));
    m.reward.assign(1, Eigen::MatrixXd::Zero(2, 2));
    m.kernel[0](0, 1) = 1.0;
    m.kernel[0](1, 1) = 1.0;
    m.terminal = {false, true};
    m.start = Eigen::Vector2d(1, 0);
    const Eigen::VectorXd d = occupancy(m, DiscretePolicy::uniform_rows(2, {1.0}));
    EXPECT_DOUBLE_EQ(d[0], 1.0);
    EXPECT_DOUBLE_EQ(d[1], 0.0);
}

TEST(Occupancy, RingWorldSymmetryAndDrift) {
    const TabularMDP mdp = RingWorldEnv().export_tabular();
    const Eigen::VectorXd sym = occupancy(mdp, DiscretePolicy::uniform_rows(11, {0.5, 0.5}));
    EXPECT_NEAR(sym.sum(), 1.0, 1e-14);
    for (int s = 0; s < 11; ++s) EXPECT_NEAR(sym[s], sym[10 - s], 1e-14);
    const Eigen::VectorXd d = occupancy(mdp, DiscretePolicy::uniform_rows(11, {0.35, 0.65}));
    for (int k = 1; k <= 4; ++k) EXPECT_GT(d[5 + k], d[5 - k]);
    EXPECT_EQ(d[0], 0.0);
}

TEST(Occupancy, MatchesSampledVisits) {
    RingWorldEnv env;
    const auto pi = DiscretePolicy::uniform_rows(11, {0.35, 0.65});
    const Eigen::VectorXd visits = expected_visits(env.export_tabular(), pi);
    Rng rng(31);
    const int episodes = 20000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(11), sq = Eigen::VectorXd::Zero(11);
    for (int i = 0; i < episodes; ++i) {
        Eigen::VectorXd count = Eigen::VectorXd::Zero(11);
        for (const auto& t : sample_episode(env, pi, rng)) count[t.s] += 1;
        sum += count;
        sq += count.cwiseProduct(count);
    }
    for (int s = 1; s < 10; ++s) {
        const double mean = sum[s] / episodes;
        const double se = std::sqrt((sq[s] / episodes - mean * mean) / episodes);
        EXPECT_NEAR(mean, visits[s], 3.5 * se) << "state " << s;
    }
}

TEST(McReturnStats, DeterministicPathHasNoVariance) {
    RingWorldEnv env;
    const auto right = DiscretePolicy::uniform_rows(11, {0.0, 1.0});
    const ReturnStats st = mc_return_stats(env.export_tabular(), right, 0.95);
    EXPECT_LE(st.variance.cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(st.mean[9], 1.0, 1e-14);
    EXPECT_NEAR(st.mean[5], std::pow(0.95, 4), 1e-14);
}

TEST(McReturnStats, LotteryVarianceIsOne) {
    const TabularMDP m = lottery_chain();
    const ReturnStats st = mc_return_stats(m, DiscretePolicy::uniform_rows(4, {1.0}), 1.0);
    EXPECT_NEAR(st.mean[1], 0.0, 1e-15);
    EXPECT_NEAR(st.variance[1], 1.0, 1e-14);
    EXPECT_NEAR(st.variance[0], 1.0, 1e-14);
}

TEST(LambdaReturnStats, LambdaOneIsMonteCarlo) {
    const TabularMDP mdp = FrozenLakeEnv().export_tabular();
    const auto pi = DiscretePolicy::uniform_rows(16, {0.2, 0.3, 0.3, 0.2});
    const ReturnStats mc = mc_return_stats(mdp, pi, 0.95);
    const Eigen::VectorXd V = Eigen::VectorXd::Random(16);
    const ReturnStats l1 = lambda_return_stats(mdp, pi, 0.95, Eigen::VectorXd::Ones(16), V);
    EXPECT_LE((mc.mean - l1.mean).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((mc.variance - l1.variance).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(LambdaReturnStats, LambdaZeroIsOneStep) {
    RingWorldEnv env;
    const TabularMDP mdp = env.export_tabular();
    const auto pi = DiscretePolicy::uniform_rows(11, {0.35, 0.65});
    Eigen::VectorXd V = Eigen::VectorXd::Random(11);
    V[0] = V[10] = 0.0;
    const ReturnStats st = lambda_return_stats(mdp, pi, 0.95, Eigen::VectorXd::Zero(11), V);
    for (int s = 2; s < 9; ++s) {
        const double a = 0.95 * V[s - 1], b = 0.95 * V[s + 1];
        const double mean = 0.35 * a + 0.65 * b;
        EXPECT_NEAR(st.mean[s], mean, 1e-13);
        EXPECT_NEAR(st.variance[s], 0.35 * a * a + 0.65 * b * b - mean * mean, 1e-13);
    }
}

TEST(LambdaReturnStats, TrueValuesAreAFixedPoint) {
    const TabularMDP mdp = RingWorldEnv().export_tabular();
    const auto pi = DiscretePolicy::uniform_rows(11, {0.35, 0.65});
    const Eigen::VectorXd v = dp_values(mdp, pi, 0.95);
    Rng rng(5);
    Eigen::VectorXd lambda(11);
    for (int s = 0; s < 11; ++s) lambda[s] = uniform01(rng);
    EXPECT_LE((lambda_return_stats(mdp, pi, 0.95, lambda, v).mean - v).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(LambdaReturnStats, MatchesSampledReturns) {
    RingWorldEnv env;
    const TabularMDP mdp = env.export_tabular();
    const auto pi = DiscretePolicy::uniform_rows(11, {0.35, 0.65});
    Eigen::VectorXd lambda(11), V(11);
    Rng rng(41);
    for (int s = 0; s < 11; ++s) {
        lambda[s] = uniform01(rng);
        V[s] = uniform(rng, -1, 1);
    }
    const ReturnStats st = lambda_return_stats(mdp, pi, 0.95, lambda, V);
    const int episodes = 40000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < episodes; ++i) {
        const double g = sampled_lambda_return(sample_episode(env, pi, rng), lambda, V);
        sum += g;
        sq += g * g;
    }
    const double mean = sum / episodes, var = sq / episodes - mean * mean;
    EXPECT_NEAR(mean, st.mean[5], 3.5 * std::sqrt(var / episodes));
    EXPECT_NEAR(var, st.variance[5], 0.03 * st.variance[5]);
}

TEST(OverallValueError, Examples) {
    const TabularMDP mdp = RingWorldEnv().export_tabular();
    const auto pi = DiscretePolicy::uniform_rows(11, {0.35, 0.65});
    const OracleSolution sol = solve_oracle(mdp, pi, 0.95, Eigen::VectorXd::Ones(11));
    EXPECT_EQ(overall_value_error(sol.v, sol), 0.0);
    Eigen::VectorXd shifted = sol.v;
    for (int s = 1; s < 10; ++s) shifted[s] += 1.0;
    EXPECT_NEAR(overall_value_error(shifted, sol), 0.5, 1e-14);
    EXPECT_THROW(overall_value_error(Eigen::VectorXd::Zero(3), sol), std::invalid_argument);
}

TEST(OverallTargetError, LambdaOneIsHalfWeightedVariance) {
    const TabularMDP mdp = RingWorldEnv().export_tabular();
    const auto pi = DiscretePolicy::uniform_rows(11, {0.35, 0.65});
    const OracleSolution sol = solve_oracle(mdp, pi, 0.95, Eigen::VectorXd::Ones(11));
    const ReturnStats mc = mc_return_stats(mdp, pi, 0.95);
    const double expected = 0.5 * sol.d.dot(mc.variance);
    for (int k = 0; k < 3; ++k) {
        const Eigen::VectorXd V = Eigen::VectorXd::Random(11);
        EXPECT_NEAR(overall_target_error(Eigen::VectorXd::Ones(11), mdp, pi, 0.95, V, sol), expected, 1e-13);
    }
}

TEST(OverallTargetError, DeterministicOneStepIsZero) {
    const TabularMDP mdp = RingWorldEnv().export_tabular();
    const auto right = DiscretePolicy::uniform_rows(11, {0.0, 1.0});
    const OracleSolution sol = solve_oracle(mdp, right, 0.95, Eigen::VectorXd::Zero(11));
    EXPECT_NEAR(overall_target_error(Eigen::VectorXd::Zero(11), mdp, right, 0.95, sol.v, sol), 0.0, 1e-15);
}

TEST(OverallTargetError, SuccessorCoordinateGradient) {
    // lambda(1) only enters the target at state 0, whose successor statistics it does not move
    const TabularMDP m = lottery_chain();
    const auto pi = DiscretePolicy::uniform_rows(4, {1.0});
    const double gamma = 0.9;
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::VectorXd V = Eigen::VectorXd::Zero(4);
        V[0] = uniform(rng, -1, 1);
        V[1] = uniform(rng, -1, 1);
        Eigen::VectorXd lambda = Eigen::VectorXd::Ones(4);
        lambda[1] = uniform(rng, 0.05, 0.95);
        const OracleSolution sol = solve_oracle(m, pi, gamma, lambda);
        const ReturnStats st = lambda_return_stats(m, pi, gamma, lambda, V);
        const ReturnStats mc = mc_return_stats(m, pi, gamma);

        const double h = 1e-5;
        Eigen::VectorXd up = lambda, down = lambda;
        up[1] += h;
        down[1] -= h;
        const double fd = (overall_target_error(up, m, pi, gamma, V, sol) -
                           overall_target_error(down, m, pi, gamma, V, sol)) / (2 * h);

        const double b = st.mean[1] - V[1], c = mc.mean[1] - V[1];
        const double partial = gamma * gamma * (lambda[1] * (b * b + st.variance[1]) - b * c);
        EXPECT_NEAR(fd, sol.d[0] * partial, 1e-8);
    }
}

TEST(ForwardView, ZeroStepSizeIsConstant) {
    RingWorldEnv env;
    const auto pi = DiscretePolicy::uniform_rows(11, {0.35, 0.65});
    Rng rng(2);
    const auto ep = sample_episode(env, pi, rng);
    const std::vector<double> lam(ep.size() + 1, 0.6);
    const Eigen::VectorXd w0 = Eigen::VectorXd::Random(11);
    for (const auto& w : forward_view_reference(ep, lam, 0.0, w0)) EXPECT_EQ(w, w0);
}

TEST(ForwardView, LambdaZeroIsIteratedTD0) {
    RingWorldEnv env;
    const auto pi = DiscretePolicy::uniform_rows(11, {0.35, 0.65});
    Rng rng(3);
    const auto ep = sample_episode(env, pi, rng);
    const std::vector<double> lam(ep.size() + 1, 0.0);
    Eigen::VectorXd w = Eigen::VectorXd::Random(11);
    const auto fv = forward_view_reference(ep, lam, 0.1, w);
    for (std::size_t k = 0; k < ep.size(); ++k) {
        const auto& t = ep[k];
        w += 0.1 * (t.r + t.gamma_next * w.dot(t.x_next) - w.dot(t.x)) * t.x;
        EXPECT_LE((fv[k + 1] - w).cwiseAbs().maxCoeff(), 1e-14);
    }
}

TEST(ForwardView, LambdaSizeChecked) {
    RingWorldEnv env;
    Rng rng(3);
    const auto ep = sample_episode(env, DiscretePolicy::uniform_rows(11, {0.5, 0.5}), rng);
    const std::vector<double> lam(ep.size(), 0.0);
    EXPECT_THROW(forward_view_reference(ep, lam, 0.1, Eigen::VectorXd::Zero(11)), std::invalid_argument);
}
