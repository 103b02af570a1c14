#pragma once

#include <span>
#include <vector>

#include "noise.hpp"
#include "policy.hpp"
#include "sigmoid.hpp"

namespace slfd {

// Consecutive slice [start, end] (inclusive step indices) of one dataset
// trajectory, with the regression target scaled by the length ratio:
// target = (slice length / trajectory length) * sigma(eta).
struct Snippet {
    int traj_index = 0;
    int start = 0;
    int end = 0;
    double target = 0.0;

    int length() const { return end - start + 1; }
};

struct SsrrConfig {
    int snippet_len_min = 0;   // 0: ceil(horizon * 0.05)
    int snippet_len_max = 0;   // 0: horizon / 2
    int snippets_per_epoch = 2000;
    int batch_size = 32;
    int epochs = 50;
    double l2_weight = 0.1;
    double step_size = 1e-3;
    std::uint64_t seed = 0;
    bool full_trajectories = false; // ablation: regress whole episodes instead
    std::vector<int> hidden = {64, 64};

    void validate() const;
    int effective_min(int horizon) const;
    int effective_max(int horizon) const;
};

// Draws snippets with lengths uniform in [min, effective max] and starts
// uniform over valid offsets. Trajectories shorter than the minimum
// contribute their full length. Targets satisfy the scaling identity
// exactly: one division for the ratio, one multiply by sigma(eta).
std::vector<Snippet> sample_snippets(const NoisyDataset& dataset, const SigmoidParams& sigma,
                                     const SsrrConfig& config, int horizon, Rng& rng);

// Mean squared error between predicted snippet reward sums and targets plus
// l2_weight * ||theta||^2. Accumulates the exact gradient into grad.
double ssrr_loss(const MlpReward& reward, const NoisyDataset& dataset,
                 std::span<const Snippet> batch, double l2_weight, std::span<double> grad);

struct SsrrResult {
    std::unique_ptr<MlpReward> reward;
    std::vector<double> epoch_loss;
};

// Phase 3: regress a per-step reward over (state, action) so snippet sums
// track the fitted noise-performance curve. The fit report must carry the
// dataset's provenance signature (see provenance_signature) or training is
// refused.
SsrrResult ssrr_train(const NoisyDataset& dataset, const FitReport& fit,
                      const Environment& env, const SsrrConfig& config);

// (eta, cumulative initial reward) regression points for Phase 2.
std::vector<FitPoint> dataset_fit_points(const NoisyDataset& dataset);

} // namespace slfd
