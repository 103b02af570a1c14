#pragma once

#include <string>
#include <vector>

#include "env.hpp"
#include "policy.hpp"

namespace slfd {

// Mixture of a base policy with the uniform action distribution:
// pi_eta(a|s) = eta * U(a) + (1 - eta) * pi(a|s). U is uniform over the
// discrete action set or over the continuous action box.
class NoisyPolicy final : public Policy {
public:
    NoisyPolicy(const Environment& env, const Policy& base, double eta);

    Action sample(const State& state, Rng& rng) const override;
    double log_prob(const State& state, const Action& action) const override;

    double eta() const { return eta_; }
    double log_uniform() const { return log_uniform_; }
    const Policy& base() const { return *base_; }

private:
    Action sample_uniform(Rng& rng) const;

    const Environment* env_;
    const Policy* base_;
    double eta_;
    double log_uniform_;
};

// One noise-annotated episode: the injection level, the rollout, and the
// per-step scores assigned by the initial reward at generation time.
struct NoisyTrajectory {
    double eta = 0.0;
    Trajectory traj;
    std::vector<double> initial_rewards;

    double initial_return() const {
        double s = 0.0;
        for (double r : initial_rewards) s += r;
        return s;
    }
};

struct DatasetProvenance {
    std::string generator; // bc | airl | noisy-airl
    std::uint64_t seed = 0;
    std::string env_id;
};

std::string provenance_signature(const DatasetProvenance& p);

struct NoisyDataset {
    DatasetProvenance provenance;
    std::vector<double> noise_grid;
    std::vector<NoisyTrajectory> trajectories;

    std::vector<double> distinct_levels() const;
    void validate() const;
};

// 20 equally spaced levels covering [0, 1].
std::vector<double> default_noise_grid(int levels = 20);

// Rolls episodes_per_level episodes at every grid level with noise-injected
// copies of the base policy and scores each step with the supplied initial
// reward. Assembly order is (level index, episode index). Episode streams
// derive from one root draw of rng by episode index, shared across levels,
// so level means are positively coupled (paired draws sharpen the
// noise-performance curve).
NoisyDataset synthesize_dataset(const RewardFn& initial_reward, const Policy& base_policy,
                                const Environment& env, const std::vector<double>& noise_grid,
                                int episodes_per_level, Rng& rng,
                                const DatasetProvenance& provenance);

} // namespace slfd
