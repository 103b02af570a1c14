#pragma once

#include <optional>
#include <string>
#include <vector>

#include "env.hpp"
#include "noise.hpp"
#include "policy.hpp"

namespace slfd {

// Adapter exposing the hidden reward as a RewardFn. Constructing one marks
// code as evaluation/harness side; learners only ever see learned models.
class GroundTruthReward final : public RewardFn {
public:
    explicit GroundTruthReward(const Environment& env) : eval_(env) {}
    double reward(const State& state, const Action& action) const override {
        return eval_.reward(state, action);
    }
    const GroundTruthEvaluator& evaluator() const { return eval_; }

private:
    GroundTruthEvaluator eval_;
};

// Trajectories spanning low-to-high performance with precomputed hidden
// returns, used to score learned rewards.
struct TrajectorySpectrum {
    std::vector<Trajectory> trajectories;
    std::vector<double> gt_returns;
    std::string provenance; // checkpoint-spectrum | noise-spectrum

    void validate() const; // >= 10 trajectories over >= 3 return deciles
};

struct EvalReport {
    std::optional<double> pearson_train;
    std::optional<double> pearson_test;
    std::optional<double> pearson_pooled;
    std::optional<double> ranking_accuracy;
    std::optional<double> policy_mean_return;
    std::optional<double> policy_std_return;
    std::optional<double> demo_mean_return;
    std::optional<double> improvement_ratio; // policy return / demo return
    // Scale-aware improvement: policy/demo on positive-return scales,
    // demo/policy (cost reduction) when both are negative. Absent on mixed
    // signs.
    std::optional<double> improvement_factor;
    std::optional<double> random_baseline_return;
};

// Pearson correlation coefficient; throws (rather than returning NaN) when
// either side has zero variance.
double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Pearson between per-trajectory learned reward sums and hidden returns.
double correlation_report(const RewardFn& reward, const TrajectorySpectrum& spectrum);

// Undiscounted learned sum over a trajectory.
double learned_return(const RewardFn& reward, const Trajectory& traj);

// All (i, j) trajectory index pairs with eta_i < eta_j.
std::vector<std::pair<int, int>> cross_level_pairs(const NoisyDataset& dataset);

// Fraction of cross-level pairs where the lower-noise trajectory receives
// the strictly higher learned sum; ties count as incorrect.
double ranking_accuracy(const RewardFn& reward, const NoisyDataset& dataset);

struct PolicyEvalResult {
    double mean = 0.0;
    double stddev = 0.0;
};

// Mean and standard deviation of hidden returns over seeded episodes.
PolicyEvalResult policy_eval(const Policy& policy, const Environment& env, int episodes, Rng& rng);

// Builds a low-to-high spectrum from policy checkpoints saved while training
// against the hidden reward (one rollout per checkpoint). train_base supplies
// the optimizer settings; iteration counts are derived from count and
// interval.
TrajectorySpectrum build_checkpoint_spectrum(const Environment& env, int count, std::uint64_t seed,
                                             int iterations_per_checkpoint = 10,
                                             const RlConfig& train_base = RlConfig{});

// CSV export payloads for the noise-performance curve and the
// learned-vs-hidden scatter. Learned returns in the scatter are affinely
// mapped onto the hidden-return range at export time only.
struct NoiseCurvePoint {
    double eta = 0.0;
    double mean_gt_return = 0.0;
    double sigmoid_fit = 0.0;
};
struct ScatterPoint {
    double gt_return = 0.0;
    double learned_return = 0.0;
    std::string split; // train | test
};
std::vector<ScatterPoint> correlation_scatter(const RewardFn& reward,
                                              const TrajectorySpectrum& train,
                                              const TrajectorySpectrum& test);

} // namespace slfd
