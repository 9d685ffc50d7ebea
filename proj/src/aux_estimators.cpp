#include "metatrace/aux_estimators.hpp"

#include <algorithm>

namespace metatrace {

MetaTransition var_meta_transition(double delta, double gamma_next, double lambda_next) {
    const double gl = gamma_next * lambda_next;
    return {delta * delta, gl * gl};
}

AuxBundle::AuxBundle(Eigen::Index dim, double alpha, double beta, double aux_multiplier,
                     double lambda_var)
    : aux_multiplier_(aux_multiplier),
      lambda_var_(lambda_var),
      eg_(dim, aux_multiplier * alpha, aux_multiplier * beta),
      eglam_(dim, aux_multiplier * alpha, aux_multiplier * beta),
      varglam_(dim, aux_multiplier * alpha, aux_multiplier * beta) {}

AuxStats AuxBundle::update(const Transition& t, double lambda_t, double lambda_next, double gamma_t,
                           double v_next) {
    eg_.togtd_step(t, 1.0, 1.0, gamma_t);
    const double delta = eglam_.togtd_step(t, lambda_t, lambda_next, gamma_t);

    const MetaTransition meta = var_meta_transition(delta, t.gamma_next, lambda_next);
    varglam_.togtd_update(t.x, meta.reward, t.x_next, meta.discount, t.rho * t.rho, lambda_var_,
                          lambda_var_, meta_discount_prev_);
    meta_discount_prev_ = meta.discount;

    return AuxStats{eg_.predict(t.x_next), eglam_.predict(t.x_next), variance(t.x_next), v_next};
}

double AuxBundle::variance(const FeatureVector& x) const {
    return std::max(0.0, varglam_.predict(x));
}

void AuxBundle::reset_episode() {
    eg_.reset_episode();
    eglam_.reset_episode();
    varglam_.reset_episode();
    meta_discount_prev_ = 0.0;
}

}  // namespace metatrace
