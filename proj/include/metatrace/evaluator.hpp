#pragma once

#include "metatrace/aux_estimators.hpp"
#include "metatrace/learners.hpp"
#include "metatrace/meta_lambda.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace metatrace {

enum class Method { Baseline, Greedy, Meta, MetaNp };
enum class LearnerKind { TrueOnlineTD, TrueOnlineGTD };

Method parse_method(const std::string& name);
std::string to_string(Method m);

struct EvaluatorConfig {
    Method method = Method::Baseline;
    LearnerKind learner = LearnerKind::TrueOnlineGTD;
    double alpha = 0.01;
    double beta = 0.01;
    double lambda = 1.0;  // baseline only
    double kappa = 0.0;   // meta only
    std::int64_t buffer_steps = 0;
    double aux_multiplier = 2.0;
    double lambda_var = 0.0;
};

/// Trace-based policy evaluation with optional lambda adaptation.
///
/// Per step, in order: accumulate rho, advance the auxiliary learners, adapt
/// lambda(x_{t+1}) (after the buffer period), then advance the value learner.
class PolicyEvaluator {
public:
    PolicyEvaluator(Eigen::Index feature_dim, Eigen::Index lambda_dim, const EvaluatorConfig& cfg);

    void begin_episode();

    /// lx and lx_next are the features seen by lambda(.) for x_t and x_{t+1}.
    /// Returns the value learner's TD error.
    double observe(const Transition& t, const FeatureVector& lx, const FeatureVector& lx_next);

    double lambda_at(const FeatureVector& lx) const;
    double predict(const FeatureVector& x) const { return value_.predict(x); }

    const LinearLearner& value() const { return value_; }
    const LambdaFunction& lambda_function() const { return lambda_; }
    LambdaFunction& lambda_function() { return lambda_; }
    const std::optional<AuxBundle>& aux() const { return aux_; }
    const EvaluatorConfig& config() const { return cfg_; }
    double rho_acc() const { return episode_.rho_acc; }

    std::int64_t steps() const { return steps_; }
    std::int64_t lambda_violations() const { return lambda_violations_; }
    std::int64_t cancellations() const { return lambda_.cancellations(); }
    std::int64_t rho_clamps() const { return episode_.clamp_events; }

private:
    double value_step(const Transition& t, double lambda_t, double lambda_next);

    EvaluatorConfig cfg_;
    LinearLearner value_;
    std::optional<AuxBundle> aux_;
    LambdaFunction lambda_;
    EpisodeAccumulator episode_;
    double gamma_t_ = 0.0;
    std::int64_t steps_ = 0;
    std::int64_t lambda_violations_ = 0;
};

}  // namespace metatrace
