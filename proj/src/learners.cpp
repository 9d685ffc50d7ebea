#include "metatrace/learners.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace metatrace {

LinearLearner::LinearLearner(Eigen::Index dim, double alpha, double beta)
    : alpha_(alpha),
      beta_(beta),
      w_(Eigen::VectorXd::Zero(dim)),
      e_(Eigen::VectorXd::Zero(dim)),
      h_(Eigen::VectorXd::Zero(dim)),
      e_grad_(Eigen::VectorXd::Zero(dim)),
      e_h_(Eigen::VectorXd::Zero(dim)) {
    if (dim <= 0) throw std::invalid_argument("learner dimension must be positive");
}

void LinearLearner::check_dim(const FeatureVector& x) const {
    if (x.size() != w_.size()) {
        throw std::invalid_argument("feature dimension " + std::to_string(x.size()) +
                                    " does not match learner dimension " + std::to_string(w_.size()));
    }
}

void LinearLearner::check_finite(double delta) const {
    if (!std::isfinite(delta)) throw DivergenceError("non-finite TD error", steps_);
    if (!w_.allFinite()) throw DivergenceError("non-finite weights", steps_);
}

double LinearLearner::predict(const FeatureVector& x) const {
    check_dim(x);
    return w_.dot(x);
}

double LinearLearner::totd_step(const Transition& t, double lambda_t, double /*lambda_next*/,
                                double gamma_t) {
    return totd_update(t.x, t.r, t.x_next, t.gamma_next, lambda_t, gamma_t);
}

double LinearLearner::togtd_step(const Transition& t, double lambda_t, double lambda_next,
                                 double gamma_t) {
    return togtd_update(t.x, t.r, t.x_next, t.gamma_next, t.rho, lambda_t, lambda_next, gamma_t);
}

double LinearLearner::totd_update(const FeatureVector& x, double reward, const FeatureVector& x_next,
                                  double gamma_next, double lambda_t, double gamma_t) {
    check_dim(x);
    check_dim(x_next);
    const double v = w_.dot(x);
    const double v_next = w_.dot(x_next);
    const double delta = reward + gamma_next * v_next - v;
    const double decay = gamma_t * lambda_t;

    e_ = decay * e_ + (1.0 - alpha_ * decay * e_.dot(x)) * x;
    w_ += alpha_ * (delta + v - v_old_) * e_ - alpha_ * (v - v_old_) * x;
    v_old_ = v_next;
    ++steps_;
    check_finite(delta);
    return delta;
}

double LinearLearner::togtd_update(const FeatureVector& x, double reward, const FeatureVector& x_next,
                                   double gamma_next, double rho, double lambda_t,
                                   double lambda_next, double gamma_t) {
    check_dim(x);
    check_dim(x_next);
    const double v = w_.dot(x);
    const double v_next = w_.dot(x_next);
    const double delta = reward + gamma_next * v_next - v;
    const double decay = gamma_t * lambda_t;

    // e holds alpha inside, unlike the on-policy trace above.
    e_ = rho * (decay * e_ + alpha_ * (1.0 - rho * decay * e_.dot(x)) * x);
    e_grad_ = rho * (decay * e_grad_ + x);
    e_h_ = rho_prev_ * decay * e_h_ + beta_ * (1.0 - rho_prev_ * decay * e_h_.dot(x)) * x;

    const double h_dot_egrad = h_.dot(e_grad_);
    const double h_dot_x = h_.dot(x);
    w_ += delta * e_ + (v - v_old_) * (e_ - alpha_ * rho * x) -
          alpha_ * gamma_next * (1.0 - lambda_next) * h_dot_egrad * x_next;
    h_ += rho * delta * e_h_ - beta_ * h_dot_x * x;

    v_old_ = v_next;
    rho_prev_ = rho;
    ++steps_;
    check_finite(delta);
    if (!h_.allFinite()) throw DivergenceError("non-finite secondary weights", steps_);
    return delta;
}

void LinearLearner::reset_episode() {
    e_.setZero();
    e_grad_.setZero();
    e_h_.setZero();
    v_old_ = 0.0;
    rho_prev_ = 1.0;
}

}  // namespace metatrace
