#pragma once

#include "metatrace/core.hpp"

#include <cstdint>

namespace metatrace {

/// Linear value estimator with dutch eligibility traces.
///
/// Supports true online TD(lambda) and true online GTD(lambda), both with
/// per-step discount and trace-decay parameters. The decay applied to the trace
/// when entering state x_t is gamma_t * lambda_t, where gamma_t is the discount
/// that came with the transition into x_t and lambda_t = lambda(x_t).
class LinearLearner {
public:
    LinearLearner(Eigen::Index dim, double alpha, double beta);
    LinearLearner(Eigen::Index dim, double alpha) : LinearLearner(dim, alpha, alpha) {}

    double predict(const FeatureVector& x) const;

    /// On-policy true online TD(lambda). Returns the TD error computed with the
    /// pre-update weights. lambda_next is not needed by the on-policy recursion.
    double totd_step(const Transition& t, double lambda_t, double lambda_next, double gamma_t);

    /// Off-policy true online GTD(lambda) with importance ratio t.rho.
    double togtd_step(const Transition& t, double lambda_t, double lambda_next, double gamma_t);

    // Same updates on raw components; used for the meta-transitions of the variance learner.
    double totd_update(const FeatureVector& x, double reward, const FeatureVector& x_next,
                       double gamma_next, double lambda_t, double gamma_t);
    double togtd_update(const FeatureVector& x, double reward, const FeatureVector& x_next,
                        double gamma_next, double rho, double lambda_t, double lambda_next,
                        double gamma_t);

    /// Clears traces and true-online bookkeeping; weights are kept.
    void reset_episode();

    const Eigen::VectorXd& weights() const { return w_; }
    Eigen::VectorXd& weights() { return w_; }
    const Eigen::VectorXd& trace() const { return e_; }
    const Eigen::VectorXd& secondary_weights() const { return h_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    std::int64_t steps() const { return steps_; }
    Eigen::Index dim() const { return w_.size(); }

private:
    void check_dim(const FeatureVector& x) const;
    void check_finite(double delta) const;

    double alpha_;
    double beta_;
    Eigen::VectorXd w_;
    Eigen::VectorXd e_;
    // GTD only
    Eigen::VectorXd h_;
    Eigen::VectorXd e_grad_;
    Eigen::VectorXd e_h_;
    double rho_prev_ = 1.0;
    double v_old_ = 0.0;
    std::int64_t steps_ = 0;
};

}  // namespace metatrace
