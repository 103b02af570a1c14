#pragma once

#include <span>
#include <vector>

#include "noise.hpp"
#include "policy.hpp"

namespace slfd {

// Same-length snippet slices from two trajectories at strictly different
// noise levels; `better` comes from the lower level.
struct RankedPair {
    int better_traj = 0;
    int better_start = 0;
    int worse_traj = 0;
    int worse_start = 0;
    int length = 0;
};

struct DrexConfig {
    int snippet_len_min = 0; // 0: ceil(horizon * 0.05)
    int snippet_len_max = 0; // 0: horizon / 2
    int pairs_per_epoch = 2000;
    int batch_size = 32;
    int epochs = 50;
    double step_size = 1e-3;
    std::uint64_t seed = 0;
    std::vector<int> hidden = {64, 64};

    void validate() const;
};

// Draws ranked same-length snippet pairs across distinct noise levels.
// Requires at least two distinct levels in the dataset.
std::vector<RankedPair> build_pairs(const NoisyDataset& dataset, int pairs_count,
                                    const DrexConfig& config, int horizon, Rng& rng);

// Pairwise ranking loss over state-only reward sums:
// -(1/|P|) sum log [ exp(S_better) / (exp(S_better) + exp(S_worse)) ],
// computed with log-sum-exp stabilization. Accumulates the exact gradient.
double drex_loss(const MlpReward& reward, const NoisyDataset& dataset,
                 std::span<const RankedPair> pairs, std::span<double> grad);

// Numerically minimizes the three-trajectory ranking loss over the middle
// trajectory's cumulative reward with the outer two fixed, by golden-section
// search. Exposed for checking against the analytic midpoint.
double optimal_middle_return(double r_first, double r_last);

// The scalar objective the minimizer searches: mean ranking loss of the
// (first > middle > last) triple as a function of the middle return.
double three_trajectory_rank_loss(double r_first, double r_middle, double r_last);

struct DrexResult {
    std::unique_ptr<MlpReward> reward; // state-only
    std::vector<double> epoch_loss;
};

// End-to-end baseline: ranking-loss training on noise-ranked snippet pairs
// resampled each epoch.
DrexResult drex_train(const NoisyDataset& dataset, const Environment& env,
                      const DrexConfig& config);

} // namespace slfd
