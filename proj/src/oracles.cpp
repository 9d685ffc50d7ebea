#include "metatrace/oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace metatrace {

namespace {

void check_inputs(const TabularMDP& mdp, const DiscretePolicy& pi) {
    if (pi.n_states() != mdp.n_states || pi.n_actions() != mdp.n_actions) {
        throw std::invalid_argument("policy shape does not match MDP");
    }
}

// One expanded (s -> s') edge of the policy-induced chain.
struct Edge {
    int to;
    double prob;
    double reward;
};

// Edges of P_pi from every non-terminal state, merged over actions when the
// reward agrees. Terminal rows are left empty.
std::vector<std::vector<Edge>> policy_edges(const TabularMDP& mdp, const DiscretePolicy& pi) {
    std::vector<std::vector<Edge>> edges(static_cast<std::size_t>(mdp.n_states));
    for (int s = 0; s < mdp.n_states; ++s) {
        if (mdp.is_terminal(s)) continue;
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double pa = pi.prob(s, a);
            if (pa == 0.0) continue;
            for (int sp = 0; sp < mdp.n_states; ++sp) {
                const double p = mdp.kernel[a](s, sp);
                if (p == 0.0) continue;
                edges[static_cast<std::size_t>(s)].push_back({sp, pa * p, mdp.reward[a](s, sp)});
            }
        }
    }
    return edges;
}

double discount_into(const TabularMDP& mdp, int sp, double gamma) {
    return mdp.is_terminal(sp) ? 0.0 : gamma;
}

Eigen::VectorXd solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const char* what) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw std::runtime_error(std::string(what) + ": singular linear system");
    return lu.solve(b);
}

}  // namespace

Eigen::VectorXd dp_values(const TabularMDP& mdp, const DiscretePolicy& pi, double gamma) {
    check_inputs(mdp, pi);
    const int n = mdp.n_states;
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    const auto edges = policy_edges(mdp, pi);
    for (int s = 0; s < n; ++s) {
        for (const Edge& e : edges[static_cast<std::size_t>(s)]) {
            b[s] += e.prob * e.reward;
            A(s, e.to) -= e.prob * discount_into(mdp, e.to, gamma);
        }
    }
    return solve(A, b, "dp_values");
}

Eigen::VectorXd expected_visits(const TabularMDP& mdp, const DiscretePolicy& pi) {
    check_inputs(mdp, pi);
    const int n = mdp.n_states;
    // N^T = d0^T + N^T Q with Q the non-terminal block of P_pi
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd d0 = Eigen::VectorXd::Zero(n);
    const auto edges = policy_edges(mdp, pi);
    for (int s = 0; s < n; ++s) {
        if (mdp.is_terminal(s)) continue;
        d0[s] = mdp.start[s];
        for (const Edge& e : edges[static_cast<std::size_t>(s)]) {
            if (!mdp.is_terminal(e.to)) A(e.to, s) -= e.prob;
        }
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible()) throw std::runtime_error("occupancy: chain does not terminate");
    Eigen::VectorXd visits = lu.solve(d0);
    if (!visits.allFinite() || (visits.array() < -1e-9).any()) {
        throw std::runtime_error("occupancy: chain does not terminate");
    }
    return visits;
}

Eigen::VectorXd occupancy(const TabularMDP& mdp, const DiscretePolicy& pi) {
    Eigen::VectorXd visits = expected_visits(mdp, pi);
    const double total = visits.sum();
    if (!(total > 0.0)) throw std::runtime_error("occupancy: no non-terminal state is visited");
    return visits / total;
}

ReturnStats mc_return_stats(const TabularMDP& mdp, const DiscretePolicy& pi, double gamma) {
    const int n = mdp.n_states;
    ReturnStats out;
    out.mean = dp_values(mdp, pi, gamma);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    const auto edges = policy_edges(mdp, pi);
    for (int s = 0; s < n; ++s) {
        for (const Edge& e : edges[static_cast<std::size_t>(s)]) {
            const double g = discount_into(mdp, e.to, gamma);
            const double td = e.reward + g * out.mean[e.to] - out.mean[s];
            b[s] += e.prob * td * td;
            A(s, e.to) -= e.prob * g * g;
        }
    }
    out.variance = solve(A, b, "mc_return_stats");
    return out;
}

ReturnStats lambda_return_stats(const TabularMDP& mdp, const DiscretePolicy& pi, double gamma,
                                const Eigen::VectorXd& lambda, const Eigen::VectorXd& V) {
    check_inputs(mdp, pi);
    const int n = mdp.n_states;
    if (lambda.size() != n || V.size() != n) throw std::invalid_argument("lambda/V size mismatch");
    for (int s = 0; s < n; ++s) {
        if (!(lambda[s] >= 0.0 && lambda[s] <= 1.0)) throw std::invalid_argument("lambda outside [0,1]");
    }
    const auto edges = policy_edges(mdp, pi);

    // G(s) = c + k G(s') with c = r + g (1 - l') V(s'), k = g l'
    Eigen::MatrixXd A1 = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b1 = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
        for (const Edge& e : edges[static_cast<std::size_t>(s)]) {
            const double g = discount_into(mdp, e.to, gamma);
            const double c = e.reward + g * (1.0 - lambda[e.to]) * V[e.to];
            b1[s] += e.prob * c;
            A1(s, e.to) -= e.prob * g * lambda[e.to];
        }
    }
    ReturnStats out;
    out.mean = solve(A1, b1, "lambda_return_stats");

    // E[G^2](s) = sum p [c^2 + 2 c k m(s') + k^2 E[G^2](s')]
    Eigen::MatrixXd A2 = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b2 = Eigen::VectorXd::Zero(n);
    for (int s = 0; s < n; ++s) {
        for (const Edge& e : edges[static_cast<std::size_t>(s)]) {
            const double g = discount_into(mdp, e.to, gamma);
            const double c = e.reward + g * (1.0 - lambda[e.to]) * V[e.to];
            const double k = g * lambda[e.to];
            b2[s] += e.prob * (c * c + 2.0 * c * k * out.mean[e.to]);
            A2(s, e.to) -= e.prob * k * k;
        }
    }
    const Eigen::VectorXd second = solve(A2, b2, "lambda_return_stats");
    out.variance = (second.array() - out.mean.array().square()).max(0.0).matrix();
    return out;
}

OracleSolution solve_oracle(const TabularMDP& mdp, const DiscretePolicy& pi, double gamma,
                            const Eigen::VectorXd& lambda) {
    OracleSolution sol;
    sol.v = dp_values(mdp, pi, gamma);
    sol.d = occupancy(mdp, pi);
    const ReturnStats stats = lambda_return_stats(mdp, pi, gamma, lambda, sol.v);
    sol.e_glam = stats.mean;
    sol.var_glam = stats.variance;
    return sol;
}

double overall_value_error(const Eigen::VectorXd& V, const OracleSolution& sol) {
    if (V.size() != sol.v.size()) throw std::invalid_argument("value vector size mismatch");
    return 0.5 * (sol.d.array() * (V - sol.v).array().square()).sum();
}

double overall_target_error(const Eigen::VectorXd& lambda, const TabularMDP& mdp,
                            const DiscretePolicy& pi, double gamma, const Eigen::VectorXd& V,
                            const OracleSolution& sol) {
    const ReturnStats stats = lambda_return_stats(mdp, pi, gamma, lambda, V);
    const Eigen::ArrayXd bias = stats.mean.array() - sol.v.array();
    return 0.5 * (sol.d.array() * (bias.square() + stats.variance.array())).sum();
}

std::vector<Eigen::VectorXd> forward_view_reference(std::span<const Transition> episode,
                                                    std::span<const double> lambda_at, double alpha,
                                                    const Eigen::VectorXd& w0) {
    const std::size_t T = episode.size();
    if (lambda_at.size() != T + 1) throw std::invalid_argument("need one lambda per visited state");

    // online[t]: weights at time t, i.e. the final weights of horizon t
    std::vector<Eigen::VectorXd> online{w0};
    online.reserve(T + 1);
    std::vector<double> target(T);
    for (std::size_t h = 1; h <= T; ++h) {
        // interim lambda-returns truncated at h, bootstrapping at x_{j+1} with online[j]
        const Transition& last = episode[h - 1];
        target[h - 1] = last.r + last.gamma_next * online[h - 1].dot(last.x_next);
        for (std::size_t j = h - 1; j-- > 0;) {
            const Transition& tr = episode[j];
            const double l = lambda_at[j + 1];
            target[j] = tr.r + tr.gamma_next * ((1.0 - l) * online[j].dot(tr.x_next) + l * target[j + 1]);
        }
        Eigen::VectorXd w = w0;
        for (std::size_t k = 0; k < h; ++k) {
            const Eigen::VectorXd& x = episode[k].x;
            w += alpha * (target[k] - w.dot(x)) * x;
        }
        online.push_back(std::move(w));
    }
    return online;
}

}  // namespace metatrace
