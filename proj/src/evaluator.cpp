#include "metatrace/evaluator.hpp"

#include <stdexcept>

namespace metatrace {

Method parse_method(const std::string& name) {
    if (name == "baseline") return Method::Baseline;
    if (name == "greedy") return Method::Greedy;
    if (name == "meta") return Method::Meta;
    if (name == "meta-np") return Method::MetaNp;
    throw std::invalid_argument("unknown method '" + name + "'");
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Baseline: return "baseline";
        case Method::Greedy: return "greedy";
        case Method::Meta: return "meta";
        case Method::MetaNp: return "meta-np";
    }
    return "?";
}

PolicyEvaluator::PolicyEvaluator(Eigen::Index feature_dim, Eigen::Index lambda_dim,
                                 const EvaluatorConfig& cfg)
    : cfg_(cfg),
      value_(feature_dim, cfg.alpha, cfg.beta),
      lambda_(lambda_dim, cfg.method != Method::MetaNp) {
    if (cfg.method == Method::Baseline) {
        if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) throw std::invalid_argument("lambda outside [0,1]");
    } else {
        aux_.emplace(feature_dim, cfg.alpha, cfg.beta, cfg.aux_multiplier, cfg.lambda_var);
    }
    if (cfg.kappa < 0.0) throw std::invalid_argument("kappa must be non-negative");
}

void PolicyEvaluator::begin_episode() {
    value_.reset_episode();
    if (aux_) aux_->reset_episode();
    episode_.reset();
    gamma_t_ = 0.0;
}

double PolicyEvaluator::lambda_at(const FeatureVector& lx) const {
    if (cfg_.method == Method::Baseline) return cfg_.lambda;
    return lambda_(lx);
}

double PolicyEvaluator::value_step(const Transition& t, double lambda_t, double lambda_next) {
    if (cfg_.learner == LearnerKind::TrueOnlineTD) return value_.totd_step(t, lambda_t, lambda_next, gamma_t_);
    return value_.togtd_step(t, lambda_t, lambda_next, gamma_t_);
}

double PolicyEvaluator::observe(const Transition& t, const FeatureVector& lx,
                                const FeatureVector& lx_next) {
    episode_.accumulate(t.rho);
    const bool adapt = steps_ >= cfg_.buffer_steps;

    const double lambda_t = lambda_at(lx);
    if (!(lambda_t >= 0.0 && lambda_t <= 1.0)) ++lambda_violations_;

    switch (cfg_.method) {
        case Method::Baseline:
            break;
        case Method::Greedy: {
            // aux learners run at lambda = 1: eglam tracks E[G], varglam tracks Var[G]
            const AuxStats stats = aux_->update(t, 1.0, 1.0, gamma_t_, value_.predict(t.x_next));
            if (adapt && !t.terminal) greedy_step(lambda_, lx_next, stats.e_g, stats.var_glam, stats.v_next);
            break;
        }
        case Method::Meta:
        case Method::MetaNp: {
            const AuxStats stats =
                aux_->update(t, lambda_t, lambda_(lx_next), gamma_t_, value_.predict(t.x_next));
            if (adapt && !t.terminal) {
                meta_step(lambda_, lx_next, stats, t.gamma_next, episode_.rho_acc,
                          MetaConfig{cfg_.kappa, cfg_.buffer_steps});
            }
            break;
        }
    }

    const double delta = value_step(t, lambda_at(lx), lambda_at(lx_next));
    gamma_t_ = t.gamma_next;
    ++steps_;
    return delta;
}

}  // namespace metatrace
