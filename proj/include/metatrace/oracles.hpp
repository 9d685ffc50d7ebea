#pragma once

#include "metatrace/core.hpp"

#include <span>
#include <vector>

namespace metatrace {

/// Mean and variance of a return, per state. Terminal states carry zeros.
struct ReturnStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

/// Ground truth for one (MDP, target policy, gamma, lambda, V) combination.
struct OracleSolution {
    Eigen::VectorXd v;         // v_pi
    Eigen::VectorXd d;         // d_pi over non-terminal states, sums to 1
    Eigen::VectorXd e_glam;    // E[G^lambda]
    Eigen::VectorXd var_glam;  // Var[G^lambda]
};

// Every oracle treats transitions into terminal states as undiscounted-free
// (gamma_{t+1} = 0) and pins terminal values to zero, so gamma only acts on
// non-terminal successors.

/// Solves (I - gamma P_pi) v = r_pi directly.
Eigen::VectorXd dp_values(const TabularMDP& mdp, const DiscretePolicy& pi, double gamma);

/// Normalised expected visit counts N = (I - P_pi^T)^{-1} d0 over non-terminal states.
Eigen::VectorXd occupancy(const TabularMDP& mdp, const DiscretePolicy& pi);

/// Expected visit counts per episode (unnormalised occupancy).
Eigen::VectorXd expected_visits(const TabularMDP& mdp, const DiscretePolicy& pi);

/// Mean and variance of the Monte-Carlo return. The variance comes from the
/// variance Bellman equation Var(s) = E[(r + gamma v(s') - v(s))^2 + gamma^2 Var(s')].
ReturnStats mc_return_stats(const TabularMDP& mdp, const DiscretePolicy& pi, double gamma);

/// Mean and variance of the state-based lambda-return
///   G(s) = r + gamma [(1 - lambda(s')) V(s') + lambda(s') G(s')]
/// via its first- and second-moment linear systems.
ReturnStats lambda_return_stats(const TabularMDP& mdp, const DiscretePolicy& pi, double gamma,
                                const Eigen::VectorXd& lambda, const Eigen::VectorXd& V);

OracleSolution solve_oracle(const TabularMDP& mdp, const DiscretePolicy& pi, double gamma,
                            const Eigen::VectorXd& lambda);

/// 1/2 sum_s d(s) (V(s) - v(s))^2; terminal states have d = 0.
double overall_value_error(const Eigen::VectorXd& V, const OracleSolution& sol);

/// 1/2 sum_s d(s) [(E[G^lambda](s) - v(s))^2 + Var[G^lambda](s)].
double overall_target_error(const Eigen::VectorXd& lambda, const TabularMDP& mdp,
                            const DiscretePolicy& pi, double gamma, const Eigen::VectorXd& V,
                            const OracleSolution& sol);

/// Interim forward-view online lambda-return algorithm over one recorded
/// episode. lambda_at[t] is lambda(x_t) for t = 0..T (T = episode length).
/// Returns the weights after each step: result[t] are the weights after t updates.
std::vector<Eigen::VectorXd> forward_view_reference(std::span<const Transition> episode,
                                                    std::span<const double> lambda_at, double alpha,
                                                    const Eigen::VectorXd& w0);

}  // namespace metatrace
