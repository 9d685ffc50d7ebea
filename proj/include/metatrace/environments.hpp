#pragma once

#include "metatrace/core.hpp"
#include "metatrace/features.hpp"
#include "metatrace/rng.hpp"

#include <array>
#include <memory>
#include <string>

namespace metatrace {

/// Episodic simulator. All randomness comes from the caller's stream, so two
/// instances driven by equal streams and actions produce equal trajectories.
class Environment {
public:
    virtual ~Environment() = default;

    virtual FeatureVector reset(Rng& rng) = 0;
    /// Throws std::logic_error when the episode has already terminated.
    virtual Transition step(int action, Rng& rng) = 0;

    virtual int n_actions() const = 0;
    virtual int feature_dim() const = 0;
    virtual bool done() const = 0;
    virtual std::string name() const = 0;
};

/// Environments with a finite state space that can be exported for the oracles.
class TabularEnvironment : public Environment {
public:
    virtual int n_states() const = 0;
    virtual int state() const = 0;
    virtual bool is_terminal_state(int s) const = 0;
    virtual const FeatureVector& features_of(int s) const = 0;
    virtual TabularMDP export_tabular() const = 0;
    virtual double gamma() const = 0;
};

/// Two-tailed random walk: terminals at both ends, -1 on the left tail and +1 on
/// the right tail, start in the middle. Actions: 0 = left, 1 = right.
class RingWorldEnv final : public TabularEnvironment {
public:
    explicit RingWorldEnv(int n_states = 11, double gamma = 0.95);

    FeatureVector reset(Rng& rng) override;
    Transition step(int action, Rng& rng) override;
    int n_actions() const override { return 2; }
    int feature_dim() const override { return n_states_; }
    bool done() const override { return is_terminal_state(pos_); }
    std::string name() const override { return "ringworld"; }

    int n_states() const override { return n_states_; }
    int state() const override { return pos_; }
    void set_state(int s) { pos_ = s; }
    bool is_terminal_state(int s) const override { return s == 0 || s == n_states_ - 1; }
    const FeatureVector& features_of(int s) const override { return features_.at(static_cast<std::size_t>(s)); }
    TabularMDP export_tabular() const override;
    double gamma() const override { return gamma_; }

    int start_state() const { return n_states_ / 2; }
    /// Successor and reward of a deterministic move.
    std::pair<int, double> move(int s, int action) const;

private:
    int n_states_;
    double gamma_;
    int pos_;
    std::vector<FeatureVector> features_;
};

/// 4x4 FrozenLake without an episode limit. Actions follow the gym convention
/// (0 = west, 1 = south, 2 = east, 3 = north). Each move goes in the intended
/// direction or either perpendicular direction with probability 1/3; moves that
/// would leave the grid keep the agent in place.
class FrozenLakeEnv final : public TabularEnvironment {
public:
    enum class Cell : char { Start = 'S', Frozen = 'F', Hole = 'H', Goal = 'G' };
    static constexpr int kSide = 4;

    explicit FrozenLakeEnv(double gamma = 0.95,
                           TileCodingConfig coding = TileCodingConfig::frozen_lake());

    FeatureVector reset(Rng& rng) override;
    Transition step(int action, Rng& rng) override;
    int n_actions() const override { return 4; }
    int feature_dim() const override { return coding_.dimension(); }
    bool done() const override { return is_terminal_state(pos_); }
    std::string name() const override { return "frozenlake"; }

    int n_states() const override { return kSide * kSide; }
    int state() const override { return pos_; }
    void set_state(int s) { pos_ = s; }
    bool is_terminal_state(int s) const override;
    const FeatureVector& features_of(int s) const override { return features_.at(static_cast<std::size_t>(s)); }
    TabularMDP export_tabular() const override;
    double gamma() const override { return gamma_; }

    Cell cell(int s) const { return map_[static_cast<std::size_t>(s)]; }
    /// Deterministic result of moving in a compass direction.
    int shift(int s, int direction) const;

private:
    double gamma_;
    TileCodingConfig coding_;
    std::array<Cell, 16> map_;
    int pos_ = 0;
    std::vector<FeatureVector> features_;
};

/// Mountain car with the episode limit removed and 20% action noise. Actions:
/// 0 = reverse, 1 = coast, 2 = forward. Reward -1 per step, gamma = 1.
class MountainCarEnv final : public Environment {
public:
    static constexpr double kMinPosition = -1.2;
    static constexpr double kMaxPosition = 0.5;
    static constexpr double kMaxSpeed = 0.07;

    explicit MountainCarEnv(double noise_prob = 0.2,
                            TileCodingConfig coding = TileCodingConfig::mountain_car());

    FeatureVector reset(Rng& rng) override;
    Transition step(int action, Rng& rng) override;
    int n_actions() const override { return 3; }
    int feature_dim() const override { return coding_.dimension(); }
    bool done() const override { return position_ >= kMaxPosition; }
    std::string name() const override { return "mountaincar"; }

    double position() const { return position_; }
    double velocity() const { return velocity_; }
    void set_state(double position, double velocity) {
        position_ = position;
        velocity_ = velocity;
    }
    FeatureVector features() const;
    /// Noise-free dynamics, exposed for tests.
    void apply_dynamics(int action);

private:
    double noise_prob_;
    TileCodingConfig coding_;
    double position_ = -0.5;
    double velocity_ = 0.0;
};

/// Builds the exact transition kernel of a tabular environment. Throws
/// std::invalid_argument for environments without a finite state space.
TabularMDP export_tabular(const Environment& env);

std::unique_ptr<Environment> make_environment(const std::string& name);

}  // namespace metatrace
