#pragma once

#include "metatrace/aux_estimators.hpp"

#include <cstdint>

namespace metatrace {

/// lambda(x) = 1 - w^T x. Weights start at zero so lambda starts at 1 everywhere.
class LambdaFunction {
public:
    explicit LambdaFunction(Eigen::Index dim, bool parametric = true)
        : w_(Eigen::VectorXd::Zero(dim)), parametric_(parametric) {}

    double operator()(const FeatureVector& x) const;

    const Eigen::VectorXd& weights() const { return w_; }
    Eigen::VectorXd& weights() { return w_; }
    bool parametric() const { return parametric_; }
    Eigen::Index dim() const { return w_.size(); }

    std::int64_t cancellations() const { return cancellations_; }
    void count_cancellation() { ++cancellations_; }

private:
    Eigen::VectorXd w_;
    bool parametric_;
    std::int64_t cancellations_ = 0;
};

struct MetaConfig {
    double kappa = 0.0;
    std::int64_t buffer_steps = 0;
};

inline double lambda_eval(const LambdaFunction& lf, const FeatureVector& x) { return lf(x); }

/// Semi-partial derivative of the half squared target error at x_t with respect
/// to lambda_{t+1}, holding the successor statistics fixed:
///   gamma^2 [ lambda ((V - E[G^l])^2 + Var[G^l]) - (E[G^l] - V)(E[G] - V) ].
double meta_partial(const AuxStats& stats, double lambda_next, double gamma_next);

/// Zero of meta_partial, clipped to [0,1]; 1 when the curvature vanishes.
double meta_minimizer(const AuxStats& stats);

/// lambda-greedy minimizer (V - E[G])^2 / ((V - E[G])^2 + Var[G]); 1 when both vanish.
double greedy_lambda(double e_g, double var_g, double v_next);

/// One META step on lambda(x_next):
///   w += kappa * rho_acc * meta_partial * x_next
/// reverted when lambda(x_next) would leave [0,1] or the step is not finite.
/// Returns whether the step was kept.
bool meta_step(LambdaFunction& lf, const FeatureVector& x_next, const AuxStats& stats,
               double gamma_next, double rho_acc, const MetaConfig& cfg);

/// Sets lambda(x_next) to the lambda-greedy target with the least-norm weight change.
void greedy_step(LambdaFunction& lf, const FeatureVector& x_next, double e_g, double var_g,
                 double v_next);

}  // namespace metatrace
