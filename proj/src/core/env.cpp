#include "env.hpp"

#include <algorithm>
#include <cmath>

namespace slfd {

void MdpSpec::validate() const {
    if (horizon < 1) throw std::invalid_argument("MdpSpec: horizon must be >= 1");
    if (discount < 0.0 || discount > 1.0) throw std::invalid_argument("MdpSpec: discount must be in [0,1]");
    if (action_kind == ActionKind::ContinuousBox) {
        if (action_low.size() != static_cast<std::size_t>(action_dim) ||
            action_high.size() != static_cast<std::size_t>(action_dim))
            throw std::invalid_argument("MdpSpec: action bounds must match action_dim");
        for (int d = 0; d < action_dim; ++d) {
            if (!(action_low[d] < action_high[d]) || !std::isfinite(action_low[d]) || !std::isfinite(action_high[d]))
                throw std::invalid_argument("MdpSpec: continuous bounds must be finite with low < high");
        }
    }
}

void Trajectory::validate(const MdpSpec& spec) const {
    if (states.size() != actions.size() + 1)
        throw std::invalid_argument("Trajectory: states must have exactly one more entry than actions");
    if (actions.empty() || actions.size() > static_cast<std::size_t>(spec.horizon))
        throw std::invalid_argument("Trajectory: length must be in [1, horizon]");
    for (const auto& s : states)
        if (s.size() != static_cast<std::size_t>(spec.state_dim))
            throw std::invalid_argument("Trajectory: state dimension mismatch");
    for (const auto& a : actions)
        if (a.size() != static_cast<std::size_t>(spec.action_dim))
            throw std::invalid_argument("Trajectory: action dimension mismatch");
}

void Environment::check_action(const Action& action) const {
    if (action.size() != static_cast<std::size_t>(spec_.action_dim))
        throw std::invalid_argument("action dimension mismatch for environment " + spec_.id);
    if (spec_.action_kind == ActionKind::Discrete) {
        int a = static_cast<int>(action[0]);
        if (a < 0 || a >= spec_.action_count)
            throw std::invalid_argument("invalid discrete action " + std::to_string(a) +
                                        " for environment " + spec_.id);
    }
}

// ---------------------------------------------------------------------------
// GridNav

GridNavEnv::GridNavEnv(int n) : n_(n) {
    if (n < 2) throw std::invalid_argument("GridNavEnv: n must be >= 2");
    spec_.id = "gridnav";
    spec_.action_kind = ActionKind::Discrete;
    spec_.state_dim = 1;
    spec_.action_dim = 1;
    spec_.state_count = n * n;
    spec_.action_count = 4;
    spec_.horizon = 64;
    spec_.discount = 0.99;
    spec_.state_feature_dim = 2;
    spec_.action_feature_dim = 4;
    spec_.validate();
}

int GridNavEnv::cell_of(const State& state) const {
    if (state.size() != 1) throw std::invalid_argument("GridNavEnv: state must be a single cell index");
    int c = static_cast<int>(state[0]);
    if (c < 0 || c >= n_ * n_) throw std::invalid_argument("GridNavEnv: cell index out of range");
    return c;
}

State GridNavEnv::reset(Rng& /*rng*/) const {
    return {static_cast<double>(start_cell())};
}

std::pair<State, bool> GridNavEnv::step(const State& state, const Action& action) const {
    check_action(action);
    int c = cell_of(state);
    int x = c % n_;
    int y = c / n_;
    switch (static_cast<int>(action[0])) {
        case 0: x = std::min(x + 1, n_ - 1); break;
        case 1: y = std::min(y + 1, n_ - 1); break;
        case 2: x = std::max(x - 1, 0); break;
        case 3: y = std::max(y - 1, 0); break;
    }
    int next = y * n_ + x;
    return {State{static_cast<double>(next)}, next == goal_cell()};
}

std::vector<double> GridNavEnv::state_features(const State& state) const {
    int c = cell_of(state);
    double denom = static_cast<double>(n_ - 1);
    return {static_cast<double>(c % n_) / denom, static_cast<double>(c / n_) / denom};
}

std::vector<double> GridNavEnv::action_features(const Action& action) const {
    check_action(action);
    std::vector<double> f(4, 0.0);
    f[static_cast<std::size_t>(action[0])] = 1.0;
    return f;
}

bool GridNavEnv::trajectory_successful(const Trajectory& traj) const {
    return !traj.states.empty() && cell_of(traj.states.back()) == goal_cell();
}

// ---------------------------------------------------------------------------
// PointReach

PointReachEnv::PointReachEnv() {
    spec_.id = "pointreach";
    spec_.action_kind = ActionKind::ContinuousBox;
    spec_.state_dim = 4;
    spec_.action_dim = 2;
    spec_.action_low = {-1.0, -1.0};
    spec_.action_high = {1.0, 1.0};
    spec_.horizon = 100;
    spec_.discount = 0.99;
    spec_.state_feature_dim = 4;
    spec_.action_feature_dim = 2;
    spec_.validate();
}

State PointReachEnv::reset(Rng& rng) const {
    double px = rng.uniform(init_low(), init_high());
    double py = rng.uniform(init_low(), init_high());
    return {px, py, 0.0, 0.0};
}

std::pair<State, bool> PointReachEnv::step(const State& state, const Action& action) const {
    check_action(action);
    if (state.size() != 4) throw std::invalid_argument("PointReachEnv: state must have 4 entries");
    double ax = std::clamp(action[0], spec_.action_low[0], spec_.action_high[0]);
    double ay = std::clamp(action[1], spec_.action_low[1], spec_.action_high[1]);
    double vx = damping() * state[2] + accel_gain() * ax;
    double vy = damping() * state[3] + accel_gain() * ay;
    double px = state[0] + vx;
    double py = state[1] + vy;
    return {State{px, py, vx, vy}, false}; // fixed horizon, never terminal
}

std::vector<double> PointReachEnv::state_features(const State& state) const {
    return state;
}

std::vector<double> PointReachEnv::action_features(const Action& action) const {
    return action;
}

std::unique_ptr<Environment> make_environment(const std::string& id) {
    if (id == "gridnav") return std::make_unique<GridNavEnv>();
    if (id == "pointreach") return std::make_unique<PointReachEnv>();
    throw std::invalid_argument("unknown environment id: " + id);
}

// ---------------------------------------------------------------------------
// Ground truth

GroundTruthEvaluator::GroundTruthEvaluator(const Environment& env) : env_(env) {
    grid_ = dynamic_cast<const GridNavEnv*>(&env);
    point_ = dynamic_cast<const PointReachEnv*>(&env);
    if (!grid_ && !point_)
        throw std::invalid_argument("GroundTruthEvaluator: no ground-truth reward for environment " + env.spec().id);
}

double GroundTruthEvaluator::reward(const State& state, const Action& action) const {
    if (grid_) {
        // -1 per step, +20 on the step that enters the goal
        auto [next, done] = grid_->step(state, action);
        (void)next;
        return done ? 19.0 : -1.0;
    }
    // -distance to target, quadratic action cost
    double dx = state[0] - point_->target_x();
    double dy = state[1] - point_->target_y();
    return -std::sqrt(dx * dx + dy * dy) - 0.01 * (action[0] * action[0] + action[1] * action[1]);
}

double GroundTruthEvaluator::trajectory_return(const Trajectory& trajectory) const {
    if (trajectory.states.size() != trajectory.actions.size() + 1)
        throw std::invalid_argument("trajectory_return: malformed trajectory");
    double total = 0.0;
    for (std::size_t t = 0; t < trajectory.actions.size(); ++t) {
        if (trajectory.states[t].size() != static_cast<std::size_t>(env_.spec().state_dim))
            throw std::invalid_argument("trajectory_return: state dimension mismatch");
        total += reward(trajectory.states[t], trajectory.actions[t]);
    }
    return total;
}

// ---------------------------------------------------------------------------

Trajectory rollout(const Environment& env, const Policy& policy, Rng& rng) {
    Trajectory traj;
    State s = env.reset(rng);
    traj.states.push_back(s);
    for (int t = 0; t < env.spec().horizon; ++t) {
        Action a = policy.sample(s, rng);
        auto [next, done] = env.step(s, a);
        traj.actions.push_back(std::move(a));
        traj.states.push_back(next);
        s = next;
        if (done) break;
    }
    return traj;
}

} // namespace slfd
