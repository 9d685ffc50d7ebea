#include "metatrace/core.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace metatrace {

namespace {
constexpr double kRowTolerance = 1e-12;
}

DiscretePolicy::DiscretePolicy(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
    for (Eigen::Index s = 0; s < probs_.rows(); ++s) {
        for (Eigen::Index a = 0; a < probs_.cols(); ++a) {
            const double p = probs_(s, a);
            if (!(p >= 0.0 && p <= 1.0)) {
                std::ostringstream msg;
                msg << "policy probability out of [0,1] at state " << s << ", action " << a;
                throw std::invalid_argument(msg.str());
            }
        }
        if (std::abs(probs_.row(s).sum() - 1.0) > kRowTolerance) {
            throw std::invalid_argument("policy row " + std::to_string(s) + " does not sum to 1");
        }
    }
}

DiscretePolicy DiscretePolicy::uniform_rows(int n_states, const std::vector<double>& row) {
    Eigen::MatrixXd probs(n_states, static_cast<Eigen::Index>(row.size()));
    for (int s = 0; s < n_states; ++s) {
        for (std::size_t a = 0; a < row.size(); ++a) probs(s, static_cast<Eigen::Index>(a)) = row[a];
    }
    return DiscretePolicy(std::move(probs));
}

int DiscretePolicy::sample(int state, double u) const {
    double cdf = 0.0;
    const int last = n_actions() - 1;
    for (int a = 0; a < last; ++a) {
        cdf += probs_(state, a);
        if (u < cdf) return a;
    }
    return last;
}

double is_ratio(const DiscretePolicy& pi, const DiscretePolicy& b, int state, int action) {
    const double target = pi.prob(state, action);
    const double behavior = b.prob(state, action);
    if (behavior == 0.0) {
        if (target > 0.0) {
            std::ostringstream msg;
            msg << "behavior policy does not cover target policy at state " << state << ", action "
                << action;
            throw std::domain_error(msg.str());
        }
        return 0.0;
    }
    return target / behavior;
}

void EpisodeAccumulator::accumulate(double rho) {
    rho_acc *= rho;
    ++step_count;
    if (rho_acc > cap) {
        if (clamp_events == 0) {
            std::clog << "warning: cumulative importance ratio clamped to " << cap << " at episode step "
                      << step_count << '\n';
        }
        ++clamp_events;
        rho_acc = cap;
    }
}

void TabularMDP::validate() const {
    if (n_states <= 0 || n_actions <= 0) throw std::invalid_argument("empty MDP");
    if (kernel.size() != static_cast<std::size_t>(n_actions) ||
        reward.size() != static_cast<std::size_t>(n_actions)) {
        throw std::invalid_argument("kernel/reward must have one matrix per action");
    }
    if (terminal.size() != static_cast<std::size_t>(n_states) || start.size() != n_states) {
        throw std::invalid_argument("terminal set or start distribution has wrong size");
    }
    for (int a = 0; a < n_actions; ++a) {
        for (int s = 0; s < n_states; ++s) {
            if (std::abs(kernel[a].row(s).sum() - 1.0) > kRowTolerance) {
                throw std::invalid_argument("kernel row (s=" + std::to_string(s) +
                                            ", a=" + std::to_string(a) + ") does not sum to 1");
            }
            if (is_terminal(s) && (kernel[a](s, s) != 1.0 || reward[a](s, s) != 0.0)) {
                throw std::invalid_argument("terminal state " + std::to_string(s) +
                                            " must self-absorb with zero reward");
            }
        }
    }
    if (std::abs(start.sum() - 1.0) > kRowTolerance) {
        throw std::invalid_argument("start distribution does not sum to 1");
    }
}

}  // namespace metatrace
