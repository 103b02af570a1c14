#include "noise.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace slfd {

NoisyPolicy::NoisyPolicy(const Environment& env, const Policy& base, double eta)
    : env_(&env), base_(&base), eta_(eta) {
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("NoisyPolicy: eta must be in [0,1]");
    const auto& spec = env.spec();
    if (spec.action_kind == ActionKind::Discrete) {
        log_uniform_ = -std::log(static_cast<double>(spec.action_count));
    } else {
        double log_volume = 0.0;
        for (int d = 0; d < spec.action_dim; ++d)
            log_volume += std::log(spec.action_high[d] - spec.action_low[d]);
        log_uniform_ = -log_volume;
    }
}

Action NoisyPolicy::sample_uniform(Rng& rng) const {
    const auto& spec = env_->spec();
    if (spec.action_kind == ActionKind::Discrete)
        return {static_cast<double>(rng.uniform_int(spec.action_count))};
    Action a(spec.action_dim);
    for (int d = 0; d < spec.action_dim; ++d)
        a[d] = rng.uniform(spec.action_low[d], spec.action_high[d]);
    return a;
}

Action NoisyPolicy::sample(const State& state, Rng& rng) const {
    // eta == 0 must leave the base policy's draw sequence untouched
    if (eta_ <= 0.0) return base_->sample(state, rng);
    if (eta_ >= 1.0) return sample_uniform(rng);
    if (rng.bernoulli(eta_)) return sample_uniform(rng);
    return base_->sample(state, rng);
}

double NoisyPolicy::log_prob(const State& state, const Action& action) const {
    if (eta_ <= 0.0) return base_->log_prob(state, action);
    double lu = std::log(eta_) + log_uniform_;
    if (eta_ >= 1.0) return lu;
    double lb = std::log1p(-eta_) + base_->log_prob(state, action);
    double m = std::max(lu, lb);
    return m + std::log(std::exp(lu - m) + std::exp(lb - m));
}

// ---------------------------------------------------------------------------

std::string provenance_signature(const DatasetProvenance& p) {
    return p.generator + ":" + p.env_id + ":" + std::to_string(p.seed);
}

std::vector<double> NoisyDataset::distinct_levels() const {
    std::set<double> s;
    for (const auto& t : trajectories) s.insert(t.eta);
    return {s.begin(), s.end()};
}

void NoisyDataset::validate() const {
    std::set<double> grid(noise_grid.begin(), noise_grid.end());
    for (const auto& t : trajectories) {
        if (!grid.count(t.eta))
            throw std::invalid_argument("NoisyDataset: trajectory eta not in noise grid");
        if (t.initial_rewards.size() != t.traj.actions.size())
            throw std::invalid_argument("NoisyDataset: initial_rewards length must match actions");
    }
    if (provenance.generator.empty() || provenance.env_id.empty())
        throw std::invalid_argument("NoisyDataset: provenance not recorded");
}

std::vector<double> default_noise_grid(int levels) {
    if (levels < 2) throw std::invalid_argument("default_noise_grid: need at least 2 levels");
    std::vector<double> grid(levels);
    for (int i = 0; i < levels; ++i)
        grid[i] = static_cast<double>(i) / static_cast<double>(levels - 1);
    return grid;
}

NoisyDataset synthesize_dataset(const RewardFn& initial_reward, const Policy& base_policy,
                                const Environment& env, const std::vector<double>& noise_grid,
                                int episodes_per_level, Rng& rng,
                                const DatasetProvenance& provenance) {
    if (episodes_per_level < 1)
        throw std::invalid_argument("synthesize_dataset: episodes_per_level must be >= 1");
    for (double eta : noise_grid)
        if (eta < 0.0 || eta > 1.0)
            throw std::invalid_argument("synthesize_dataset: noise levels must lie in [0,1]");

    NoisyDataset ds;
    ds.provenance = provenance;
    ds.noise_grid = noise_grid;
    std::uint64_t root = rng.next_u64();
    for (std::size_t level = 0; level < noise_grid.size(); ++level) {
        NoisyPolicy noisy(env, base_policy, noise_grid[level]);
        for (int e = 0; e < episodes_per_level; ++e) {
            Rng episode_rng(derive_seed(root, "noise-episode", static_cast<std::uint64_t>(e)));
            NoisyTrajectory nt;
            nt.eta = noise_grid[level];
            nt.traj = rollout(env, noisy, episode_rng);
            nt.initial_rewards.reserve(nt.traj.actions.size());
            for (std::size_t t = 0; t < nt.traj.actions.size(); ++t)
                nt.initial_rewards.push_back(
                    initial_reward.reward(nt.traj.states[t], nt.traj.actions[t]));
            ds.trajectories.push_back(std::move(nt));
        }
    }
    ds.validate();
    return ds;
}

} // namespace slfd
