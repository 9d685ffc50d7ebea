#pragma once

#include "metatrace/environments.hpp"
#include "metatrace/rng.hpp"

#include <vector>

namespace metatrace::testing {

/// One episode under `pi`, starting from the environment's reset state.
inline std::vector<Transition> sample_episode(TabularEnvironment& env, const DiscretePolicy& pi, Rng& rng,
                                              const DiscretePolicy* behavior = nullptr, int max_steps = 100000) {
    const DiscretePolicy& b = behavior ? *behavior : pi;
    std::vector<Transition> out;
    env.reset(rng);
    while (!env.done() && static_cast<int>(out.size()) < max_steps) {
        const int s = env.state();
        const int a = b.sample(s, uniform01(rng));
        Transition t = env.step(a, rng);
        t.rho = behavior ? is_ratio(pi, b, s, a) : 1.0;
        out.push_back(std::move(t));
    }
    return out;
}

inline std::vector<double> lambdas_along(const std::vector<Transition>& ep, const Eigen::VectorXd& lambda) {
    std::vector<double> out;
    out.push_back(lambda[ep.front().s]);
    for (const auto& t : ep) out.push_back(lambda[t.s_next]);
    return out;
}

}  // namespace metatrace::testing
