#include "metatrace/environments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace metatrace {

namespace {

void require_running(const Environment& env) {
    if (env.done()) throw std::logic_error(env.name() + ": step called on a terminated episode");
}

TabularMDP empty_mdp(int n_states, int n_actions) {
    TabularMDP mdp;
    mdp.n_states = n_states;
    mdp.n_actions = n_actions;
    mdp.kernel.assign(static_cast<std::size_t>(n_actions), Eigen::MatrixXd::Zero(n_states, n_states));
    mdp.reward.assign(static_cast<std::size_t>(n_actions), Eigen::MatrixXd::Zero(n_states, n_states));
    mdp.terminal.assign(static_cast<std::size_t>(n_states), false);
    mdp.start = Eigen::VectorXd::Zero(n_states);
    return mdp;
}

}  // namespace

// RingWorld ------------------------------------------------------------------

RingWorldEnv::RingWorldEnv(int n_states, double gamma) : n_states_(n_states), gamma_(gamma) {
    if (n_states < 3 || n_states % 2 == 0) {
        throw std::invalid_argument("RingWorld needs an odd number of states >= 3");
    }
    pos_ = start_state();
    for (int s = 0; s < n_states_; ++s) features_.push_back(onehot(s, n_states_));
}

FeatureVector RingWorldEnv::reset(Rng&) {
    pos_ = start_state();
    return features_[static_cast<std::size_t>(pos_)];
}

std::pair<int, double> RingWorldEnv::move(int s, int action) const {
    const int next = action == 0 ? s - 1 : s + 1;
    double r = 0.0;
    if (next == 0) r = -1.0;
    if (next == n_states_ - 1) r = 1.0;
    return {next, r};
}

Transition RingWorldEnv::step(int action, Rng&) {
    require_running(*this);
    if (action != 0 && action != 1) throw std::invalid_argument("RingWorld action must be 0 or 1");
    Transition t;
    t.s = pos_;
    t.x = features_[static_cast<std::size_t>(pos_)];
    t.a = action;
    const auto [next, r] = move(pos_, action);
    pos_ = next;
    t.s_next = next;
    t.r = r;
    t.x_next = features_[static_cast<std::size_t>(next)];
    t.terminal = is_terminal_state(next);
    t.gamma_next = t.terminal ? 0.0 : gamma_;
    return t;
}

TabularMDP RingWorldEnv::export_tabular() const {
    TabularMDP mdp = empty_mdp(n_states_, 2);
    for (int s = 0; s < n_states_; ++s) {
        mdp.terminal[static_cast<std::size_t>(s)] = is_terminal_state(s);
        for (int a = 0; a < 2; ++a) {
            if (is_terminal_state(s)) {
                mdp.kernel[a](s, s) = 1.0;
                continue;
            }
            const auto [next, r] = move(s, a);
            mdp.kernel[a](s, next) = 1.0;
            mdp.reward[a](s, next) = r;
        }
    }
    mdp.start[start_state()] = 1.0;
    mdp.validate();
    return mdp;
}

// FrozenLake -----------------------------------------------------------------

FrozenLakeEnv::FrozenLakeEnv(double gamma, TileCodingConfig coding)
    : gamma_(gamma), coding_(std::move(coding)) {
    constexpr const char* kLayout = "SFFF" "FHFH" "FFFH" "HFFG";
    for (int s = 0; s < kSide * kSide; ++s) map_[static_cast<std::size_t>(s)] = static_cast<Cell>(kLayout[s]);
    for (int s = 0; s < kSide * kSide; ++s) {
        features_.push_back(tile_code_discrete(s / kSide, s % kSide, coding_));
    }
}

bool FrozenLakeEnv::is_terminal_state(int s) const {
    const Cell c = cell(s);
    return c == Cell::Hole || c == Cell::Goal;
}

FeatureVector FrozenLakeEnv::reset(Rng&) {
    pos_ = 0;
    return features_[0];
}

int FrozenLakeEnv::shift(int s, int direction) const {
    int row = s / kSide;
    int col = s % kSide;
    switch (direction) {
        case 0: col = std::max(col - 1, 0); break;
        case 1: row = std::min(row + 1, kSide - 1); break;
        case 2: col = std::min(col + 1, kSide - 1); break;
        case 3: row = std::max(row - 1, 0); break;
        default: throw std::invalid_argument("FrozenLake action must be in [0, 4)");
    }
    return row * kSide + col;
}

Transition FrozenLakeEnv::step(int action, Rng& rng) {
    require_running(*this);
    if (action < 0 || action >= 4) throw std::invalid_argument("FrozenLake action must be in [0, 4)");
    Transition t;
    t.s = pos_;
    t.x = features_[static_cast<std::size_t>(pos_)];
    t.a = action;
    // slip: one of {action-1, action, action+1} uniformly
    const int direction = (action + uniform_int(rng, 3) + 3) % 4;
    pos_ = shift(pos_, direction);
    t.s_next = pos_;
    t.r = cell(pos_) == Cell::Goal ? 1.0 : 0.0;
    t.x_next = features_[static_cast<std::size_t>(pos_)];
    t.terminal = is_terminal_state(pos_);
    t.gamma_next = t.terminal ? 0.0 : gamma_;
    return t;
}

TabularMDP FrozenLakeEnv::export_tabular() const {
    const int n = kSide * kSide;
    TabularMDP mdp = empty_mdp(n, 4);
    for (int s = 0; s < n; ++s) {
        mdp.terminal[static_cast<std::size_t>(s)] = is_terminal_state(s);
        for (int a = 0; a < 4; ++a) {
            if (is_terminal_state(s)) {
                mdp.kernel[a](s, s) = 1.0;
                continue;
            }
            for (int k = 0; k < 3; ++k) {
                const int next = shift(s, (a + k + 3) % 4);
                mdp.kernel[a](s, next) += 1.0 / 3.0;
                mdp.reward[a](s, next) = cell(next) == Cell::Goal ? 1.0 : 0.0;
            }
        }
    }
    mdp.start[0] = 1.0;
    mdp.validate();
    return mdp;
}

// MountainCar ----------------------------------------------------------------

MountainCarEnv::MountainCarEnv(double noise_prob, TileCodingConfig coding)
    : noise_prob_(noise_prob), coding_(std::move(coding)) {
    if (!(noise_prob >= 0.0 && noise_prob <= 1.0)) throw std::invalid_argument("noise_prob outside [0,1]");
}

FeatureVector MountainCarEnv::features() const {
    return tile_code_continuous(position_, velocity_, coding_);
}

FeatureVector MountainCarEnv::reset(Rng& rng) {
    position_ = uniform(rng, kMinPosition, kMaxPosition);
    velocity_ = 0.0;
    return features();
}

void MountainCarEnv::apply_dynamics(int action) {
    velocity_ += 0.001 * (action - 1) - 0.0025 * std::cos(3.0 * position_);
    velocity_ = std::clamp(velocity_, -kMaxSpeed, kMaxSpeed);
    position_ += velocity_;
    if (position_ <= kMinPosition) {
        position_ = kMinPosition;
        velocity_ = 0.0;
    }
    position_ = std::min(position_, kMaxPosition);
}

Transition MountainCarEnv::step(int action, Rng& rng) {
    require_running(*this);
    if (action < 0 || action >= 3) throw std::invalid_argument("MountainCar action must be in [0, 3)");
    Transition t;
    t.x = features();
    t.a = action;
    int applied = action;
    if (uniform01(rng) < noise_prob_) applied = uniform_int(rng, 3);
    apply_dynamics(applied);
    t.r = -1.0;
    t.x_next = features();
    t.terminal = done();
    t.gamma_next = t.terminal ? 0.0 : 1.0;
    return t;
}

// ----------------------------------------------------------------------------

TabularMDP export_tabular(const Environment& env) {
    const auto* tabular = dynamic_cast<const TabularEnvironment*>(&env);
    if (tabular == nullptr) {
        throw std::invalid_argument("export_tabular: unsupported environment '" + env.name() + "'");
    }
    return tabular->export_tabular();
}

std::unique_ptr<Environment> make_environment(const std::string& name) {
    if (name == "ringworld") return std::make_unique<RingWorldEnv>();
    if (name == "frozenlake") return std::make_unique<FrozenLakeEnv>();
    if (name == "mountaincar") return std::make_unique<MountainCarEnv>();
    throw std::invalid_argument("unknown environment '" + name + "'");
}

}  // namespace metatrace
