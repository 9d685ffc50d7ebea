#include "metatrace/aux_estimators.hpp"
#include "metatrace/features.hpp"
#include "metatrace/meta_lambda.hpp"
#include "metatrace/rng.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace metatrace;

namespace {

AuxStats stats(double v, double e_glam, double var, double e_g) { return AuxStats{e_g, e_glam, var, v}; }

// frozen-statistics target error of one step, without the 1/2
double frozen_objective(const AuxStats& s, double lambda, double gamma) {
    const double bias = (1.0 - lambda) * s.v_next + lambda * s.e_glam - s.e_g;
    return gamma * gamma * (bias * bias + lambda * lambda * s.var_glam);
}

}  // namespace

TEST(VarMetaTransition, Examples) {
    const auto m = var_meta_transition(2.0, 0.9, 0.5);
    EXPECT_DOUBLE_EQ(m.reward, 4.0);
    EXPECT_NEAR(m.discount, 0.2025, 1e-15);
    EXPECT_EQ(var_meta_transition(0.0, 0.9, 0.5).reward, 0.0);
    EXPECT_EQ(var_meta_transition(1.5, 0.0, 0.7).discount, 0.0);
}

TEST(AuxBundle, DeterministicChainHasZeroVariance) {
    // every step goes right: returns are deterministic
    const int n = 7;
    AuxBundle aux(n, 0.05, 0.05);
    for (int episode = 0; episode < 3000; ++episode) {
        aux.reset_episode();
        double gamma_t = 0.0;
        for (int s = 3; s < n - 1; ++s) {
            Transition t;
            t.s = s;
            t.s_next = s + 1;
            t.x = onehot(s, n);
            t.x_next = onehot(s + 1, n);
            t.terminal = s + 1 == n - 1;
            t.r = t.terminal ? 1.0 : 0.0;
            t.gamma_next = t.terminal ? 0.0 : 0.95;
            aux.update(t, 0.5, 0.5, gamma_t, 0.0);
            gamma_t = t.gamma_next;
        }
    }
    for (int s = 3; s < n - 1; ++s) {
        EXPECT_NEAR(aux.variance(onehot(s, n)), 0.0, 1e-3);
        EXPECT_NEAR(aux.eg().predict(onehot(s, n)), std::pow(0.95, n - 2 - s), 1e-3);
    }
}

TEST(AuxBundle, LearningRateIsScaled) {
    AuxBundle aux(3, 0.01, 0.02, 2.0);
    EXPECT_DOUBLE_EQ(aux.eg().alpha(), 0.02);
    EXPECT_DOUBLE_EQ(aux.varglam().beta(), 0.04);
}

TEST(LambdaFunction, Evaluation) {
    LambdaFunction lf(5);
    EXPECT_EQ(lf(Eigen::VectorXd::Random(5)), 1.0);
    lf.weights()[2] = 0.3;
    EXPECT_DOUBLE_EQ(lf(onehot(2, 5)), 0.7);

    const auto cfg = TileCodingConfig::frozen_lake();
    const FeatureVector x = tile_code_discrete(1, 2, cfg);
    LambdaFunction tiles(cfg.dimension());
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] != 0.0) tiles.weights()[i] = 0.1;
    EXPECT_NEAR(tiles(x), 0.6, 1e-15);
    EXPECT_THROW(tiles(onehot(0, 3)), std::invalid_argument);
}

TEST(MetaPartial, VanishesWithoutBiasAndLambda) {
    EXPECT_EQ(meta_partial(stats(0.4, 0.4, 0.7, 1.0), 0.0, 0.9), 0.0);
}

TEST(MetaPartial, DirectSubstitution) {
    // gamma = 1, lambda = 0.5, V = 0, E[G^l] = 1, Var = 1, E[G] = 2
    EXPECT_DOUBLE_EQ(meta_partial(stats(0.0, 1.0, 1.0, 2.0), 0.5, 1.0), 0.5 * (1 + 1) - 1.0 * 2.0);
}

TEST(MetaPartial, MatchesFiniteDifferences) {
    Rng rng(21);
    for (int i = 0; i < 2000; ++i) {
        const AuxStats s = stats(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, 0, 3), uniform(rng, -2, 2));
        const double lambda = uniform(rng, 0, 1), gamma = uniform(rng, 0.1, 1);
        const double h = 1e-5;
        const double fd = 0.5 * (frozen_objective(s, lambda + h, gamma) - frozen_objective(s, lambda - h, gamma)) / (2 * h);
        const double an = meta_partial(s, lambda, gamma);
        EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST(MetaMinimizer, ZeroesThePartial) {
    Rng rng(22);
    for (int i = 0; i < 2000; ++i) {
        const AuxStats s = stats(uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, 0.01, 3), uniform(rng, -2, 2));
        const double l = meta_minimizer(s);
        if (l > 0.0 && l < 1.0) EXPECT_NEAR(meta_partial(s, l, 1.0), 0.0, 1e-12);
    }
}

TEST(MetaMinimizer, Examples) {
    EXPECT_DOUBLE_EQ(meta_minimizer(stats(0.0, 1.0, 1.0, 2.0)), 1.0);
    EXPECT_DOUBLE_EQ(meta_minimizer(stats(0.0, 1.0, 1.0, 0.0)), 0.0);
    EXPECT_DOUBLE_EQ(meta_minimizer(stats(0.5, 0.5, 0.0, 2.0)), 1.0);
}

TEST(MetaMinimizer, ReducesToGreedyWhenReturnsAgree) {
    Rng rng(23);
    for (int i = 0; i < 500; ++i) {
        const double v = uniform(rng, -1, 1), g = uniform(rng, -1, 1), var = uniform(rng, 0, 2);
        EXPECT_DOUBLE_EQ(meta_minimizer(stats(v, g, var, g)), greedy_lambda(g, var, v));
    }
}

TEST(GreedyLambda, Examples) {
    EXPECT_DOUBLE_EQ(greedy_lambda(1.0, 1.0, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(greedy_lambda(1.0, 0.0, 0.3), 1.0);
    EXPECT_DOUBLE_EQ(greedy_lambda(0.3, 2.0, 0.3), 0.0);
    EXPECT_DOUBLE_EQ(greedy_lambda(0.3, 0.0, 0.3), 1.0);
}

TEST(MetaStep, ZeroRhoLeavesLambda) {
    LambdaFunction lf(4);
    EXPECT_TRUE(meta_step(lf, onehot(1, 4), stats(0.0, 1.0, 1.0, 0.0), 1.0, 0.0, {0.1, 0}));
    EXPECT_EQ(lf.weights().norm(), 0.0);
}

TEST(MetaStep, PositivePartialLowersLambda) {
    LambdaFunction lf(4);
    const AuxStats s = stats(0.0, 1.0, 1.0, 0.0);
    ASSERT_GT(meta_partial(s, 1.0, 0.9), 0.0);
    EXPECT_TRUE(meta_step(lf, onehot(1, 4), s, 0.9, 1.0, {0.1, 0}));
    EXPECT_LT(lf(onehot(1, 4)), 1.0);
    EXPECT_EQ(lf(onehot(2, 4)), 1.0);
}

TEST(MetaStep, OutOfRangeIsCancelled) {
    LambdaFunction lf(4);
    // partial at lambda = 1 is 1.01, so the tentative lambda is -0.01
    const AuxStats s = stats(0.0, 0.0, 1.01, 0.0);
    EXPECT_FALSE(meta_step(lf, onehot(3, 4), s, 1.0, 1.0, {1.0, 0}));
    EXPECT_EQ(lf(onehot(3, 4)), 1.0);
    EXPECT_EQ(lf.cancellations(), 1);
}

TEST(MetaStep, AboveOneIsCancelled) {
    LambdaFunction lf(2);
    const AuxStats s = stats(0.0, 1.0, 0.0, 5.0);
    EXPECT_LT(meta_partial(s, 1.0, 1.0), 0.0);
    EXPECT_FALSE(meta_step(lf, onehot(0, 2), s, 1.0, 1.0, {0.1, 0}));
    EXPECT_EQ(lf.cancellations(), 1);
}

TEST(MetaStep, NonFiniteIsCancelled) {
    LambdaFunction lf(2);
    const AuxStats s = stats(0.0, 1.0, std::numeric_limits<double>::infinity(), 0.0);
    EXPECT_FALSE(meta_step(lf, onehot(0, 2), s, 1.0, 1.0, {0.1, 0}));
    EXPECT_EQ(lf.weights().norm(), 0.0);
}

TEST(GreedyStep, OneHotAssignsTarget) {
    LambdaFunction lf(5, false);
    greedy_step(lf, onehot(2, 5), 1.0, 1.0, 0.0);
    EXPECT_DOUBLE_EQ(lf(onehot(2, 5)), 0.5);
    EXPECT_DOUBLE_EQ(lf(onehot(1, 5)), 1.0);
    greedy_step(lf, onehot(2, 5), 1.0, 1.0, 0.0);
    EXPECT_DOUBLE_EQ(lf(onehot(2, 5)), 0.5);
    greedy_step(lf, onehot(3, 5), 1.0, 0.0, 0.0);
    EXPECT_DOUBLE_EQ(lf(onehot(3, 5)), 1.0);
}

TEST(GreedyStep, TileFeaturesHitTarget) {
    const auto cfg = TileCodingConfig::frozen_lake();
    LambdaFunction lf(cfg.dimension());
    const FeatureVector x = tile_code_discrete(2, 1, cfg);
    greedy_step(lf, x, 0.2, 0.5, 0.7);
    EXPECT_NEAR(lf(x), greedy_lambda(0.2, 0.5, 0.7), 1e-15);
}
