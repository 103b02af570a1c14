#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rng.hpp"

namespace slfd {

using State = std::vector<double>;
using Action = std::vector<double>;

enum class ActionKind { Discrete, ContinuousBox };

// Static description of an MDP. Ground-truth reward is deliberately absent:
// it lives in GroundTruthEvaluator so learning code cannot reach it.
struct MdpSpec {
    std::string id;
    ActionKind action_kind = ActionKind::Discrete;
    int state_dim = 1;            // entries in the raw state vector
    int action_dim = 1;           // entries in the raw action vector
    int state_count = 0;          // discrete state spaces only
    int action_count = 0;         // discrete action spaces only
    std::vector<double> action_low;   // continuous boxes only
    std::vector<double> action_high;
    int horizon = 1;
    double discount = 0.99;
    int state_feature_dim = 0;    // featurized input width for approximators
    int action_feature_dim = 0;

    void validate() const;
};

// An ordered state/action record of one episode. states has one more entry
// than actions.
struct Trajectory {
    std::vector<State> states;
    std::vector<Action> actions;

    std::size_t length() const { return actions.size(); }
    void validate(const MdpSpec& spec) const;
};

class Environment {
public:
    virtual ~Environment() = default;

    const MdpSpec& spec() const { return spec_; }

    virtual State reset(Rng& rng) const = 0;

    // Deterministic transition. done=true when a terminal condition is met;
    // horizon bookkeeping belongs to rollout.
    virtual std::pair<State, bool> step(const State& state, const Action& action) const = 0;

    // Encodings fed to function approximators (policies and reward models).
    virtual std::vector<double> state_features(const State& state) const = 0;
    virtual std::vector<double> action_features(const Action& action) const = 0;

    // Task-completion predicate; fixed-horizon tasks count every episode.
    virtual bool trajectory_successful(const Trajectory& traj) const { return !traj.actions.empty(); }

    void check_action(const Action& action) const;

protected:
    MdpSpec spec_;
};

// N x N deterministic gridworld. Discrete states are cell indices
// (y * n + x) carried as a single-entry vector; four actions
// {0:right, 1:up, 2:left, 3:down}; episode ends on reaching the goal cell.
class GridNavEnv final : public Environment {
public:
    explicit GridNavEnv(int n = 8);

    State reset(Rng& rng) const override;
    std::pair<State, bool> step(const State& state, const Action& action) const override;
    std::vector<double> state_features(const State& state) const override;
    std::vector<double> action_features(const Action& action) const override;
    bool trajectory_successful(const Trajectory& traj) const override;

    int n() const { return n_; }
    int start_cell() const { return 0; }
    int goal_cell() const { return n_ * n_ - 1; }
    int cell_of(const State& state) const;

private:
    int n_;
};

// 2-D point mass with damped linear dynamics. State is
// (px, py, vx, vy); action is a bounded acceleration in [-1,1]^2.
// Accelerations are clipped to the box inside the dynamics; log-densities
// are evaluated on the action as stored.
class PointReachEnv final : public Environment {
public:
    PointReachEnv();

    State reset(Rng& rng) const override;
    std::pair<State, bool> step(const State& state, const Action& action) const override;
    std::vector<double> state_features(const State& state) const override;
    std::vector<double> action_features(const Action& action) const override;

    double damping() const { return 0.95; }
    double accel_gain() const { return 0.1; }
    double target_x() const { return 0.0; }
    double target_y() const { return 0.0; }
    // initial positions are drawn uniformly from this box, velocity zero
    double init_low() const { return -1.0; }
    double init_high() const { return 1.0; }
};

std::unique_ptr<Environment> make_environment(const std::string& id);

// Holds the hidden per-step reward R(s, a). Only evaluation, experiment
// harness, and test code may construct one; learners receive reward models,
// never this. (Boundary is by convention; nothing in training code paths
// takes this type.)
class GroundTruthEvaluator {
public:
    explicit GroundTruthEvaluator(const Environment& env);

    double reward(const State& state, const Action& action) const;

    // Undiscounted sum of per-step rewards over the trajectory.
    double trajectory_return(const Trajectory& trajectory) const;

    const Environment& environment() const { return env_; }

private:
    const Environment& env_;
    const GridNavEnv* grid_ = nullptr;
    const PointReachEnv* point_ = nullptr;
};

// Minimal interface every sampler/trainer consumes; concrete policies live
// in policy.hpp, noise-injected mixtures in noise.hpp.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Action sample(const State& state, Rng& rng) const = 0;
    virtual double log_prob(const State& state, const Action& action) const = 0;
};

// Runs one episode. Same seed and same policy parameters reproduce the
// trajectory bit-for-bit.
Trajectory rollout(const Environment& env, const Policy& policy, Rng& rng);

} // namespace slfd
