#include "metatrace/meta_lambda.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metatrace {

double LambdaFunction::operator()(const FeatureVector& x) const {
    if (x.size() != w_.size()) throw std::invalid_argument("lambda feature dimension mismatch");
    return 1.0 - w_.dot(x);
}

double meta_partial(const AuxStats& stats, double lambda_next, double gamma_next) {
    const double bias_lambda = stats.e_glam - stats.v_next;
    const double bias_mc = stats.e_g - stats.v_next;
    const double curvature = bias_lambda * bias_lambda + stats.var_glam;
    return gamma_next * gamma_next * (lambda_next * curvature - bias_lambda * bias_mc);
}

double meta_minimizer(const AuxStats& stats) {
    const double bias_lambda = stats.v_next - stats.e_glam;
    const double bias_mc = stats.v_next - stats.e_g;
    const double denom = bias_lambda * bias_lambda + stats.var_glam;
    if (!(denom > 0.0)) return 1.0;
    return std::clamp(bias_lambda * bias_mc / denom, 0.0, 1.0);
}

double greedy_lambda(double e_g, double var_g, double v_next) {
    const double bias_sq = (v_next - e_g) * (v_next - e_g);
    const double denom = bias_sq + var_g;
    if (!(denom > 0.0)) return 1.0;
    return bias_sq / denom;
}

bool meta_step(LambdaFunction& lf, const FeatureVector& x_next, const AuxStats& stats,
               double gamma_next, double rho_acc, const MetaConfig& cfg) {
    const double lambda_next = lf(x_next);
    const double g = cfg.kappa * rho_acc * meta_partial(stats, lambda_next, gamma_next);
    if (!std::isfinite(g)) {
        lf.count_cancellation();
        return false;
    }
    if (g == 0.0) return true;

    Eigen::VectorXd& w = lf.weights();
    const Eigen::VectorXd saved = w;
    w += g * x_next;
    const double updated = lf(x_next);
    if (!(updated >= 0.0 && updated <= 1.0)) {
        w = saved;
        lf.count_cancellation();
        return false;
    }
    return true;
}

void greedy_step(LambdaFunction& lf, const FeatureVector& x_next, double e_g, double var_g,
                 double v_next) {
    const double norm_sq = x_next.squaredNorm();
    if (norm_sq == 0.0) return;
    const double gap = greedy_lambda(e_g, var_g, v_next) - lf(x_next);
    // lambda = 1 - w^T x: w moves against x
    lf.weights() -= (gap / norm_sq) * x_next;
}

}  // namespace metatrace
