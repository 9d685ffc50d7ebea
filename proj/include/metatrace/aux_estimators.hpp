#pragma once

#include "metatrace/learners.hpp"

namespace metatrace {

/// Return statistics at x_{t+1}, the inputs of the lambda meta-gradient.
struct AuxStats {
    double e_g = 0.0;       // E[G_{t+1}]
    double e_glam = 0.0;    // E[G^lambda_{t+1}]
    double var_glam = 0.0;  // Var[G^lambda_{t+1}], clamped at 0
    double v_next = 0.0;    // V(x_{t+1}) of the value learner
};

struct MetaTransition {
    double reward = 0.0;
    double discount = 0.0;
};

/// Direct-VTD meta transition: reward delta^2, discount (gamma * lambda)^2.
MetaTransition var_meta_transition(double delta, double gamma_next, double lambda_next);

/// The three auxiliary learners that estimate E[G], E[G^lambda] and Var[G^lambda].
///
/// All three run true online GTD(lambda) with learning rate aux_multiplier * alpha.
/// The variance learner consumes the squared TD error of the E[G^lambda] learner,
/// weighted by rho^2, with its own trace parameter lambda_var.
class AuxBundle {
public:
    AuxBundle(Eigen::Index dim, double alpha, double beta, double aux_multiplier = 2.0,
              double lambda_var = 0.0);

    /// Advances all three learners on one transition and reads their estimates at
    /// x_{t+1}. v_next is the value learner's (pre-update) prediction at x_{t+1}.
    AuxStats update(const Transition& t, double lambda_t, double lambda_next, double gamma_t,
                    double v_next);

    void reset_episode();

    const LinearLearner& eg() const { return eg_; }
    const LinearLearner& eglam() const { return eglam_; }
    const LinearLearner& varglam() const { return varglam_; }
    double aux_multiplier() const { return aux_multiplier_; }

    /// Variance estimate at x, clamped to be non-negative.
    double variance(const FeatureVector& x) const;

private:
    double aux_multiplier_;
    double lambda_var_;
    LinearLearner eg_;
    LinearLearner eglam_;
    LinearLearner varglam_;
    double meta_discount_prev_ = 0.0;
};

}  // namespace metatrace
