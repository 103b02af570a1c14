#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace slfd {

void TrajectorySpectrum::validate() const {
    if (trajectories.size() != gt_returns.size())
        throw std::invalid_argument("TrajectorySpectrum: returns not aligned with trajectories");
    if (trajectories.size() < 10)
        throw std::invalid_argument("TrajectorySpectrum: need at least 10 trajectories");
    double lo = *std::min_element(gt_returns.begin(), gt_returns.end());
    double hi = *std::max_element(gt_returns.begin(), gt_returns.end());
    if (hi <= lo)
        throw std::invalid_argument("TrajectorySpectrum: returns are constant");
    std::set<int> deciles;
    for (double r : gt_returns)
        deciles.insert(std::min(9, static_cast<int>(10.0 * (r - lo) / (hi - lo))));
    if (deciles.size() < 3)
        throw std::invalid_argument("TrajectorySpectrum: returns span fewer than 3 deciles");
}

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("pearson: length mismatch");
    if (xs.size() < 2)
        throw std::invalid_argument("pearson: need at least 2 samples");
    double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double dx = xs[i] - mx;
        double dy = ys[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw std::invalid_argument("pearson: zero variance input");
    return sxy / std::sqrt(sxx * syy);
}

double learned_return(const RewardFn& reward, const Trajectory& traj) {
    double s = 0.0;
    for (std::size_t t = 0; t < traj.actions.size(); ++t)
        s += reward.reward(traj.states[t], traj.actions[t]);
    return s;
}

double correlation_report(const RewardFn& reward, const TrajectorySpectrum& spectrum) {
    spectrum.validate();
    std::vector<double> learned(spectrum.trajectories.size());
    for (std::size_t i = 0; i < spectrum.trajectories.size(); ++i)
        learned[i] = learned_return(reward, spectrum.trajectories[i]);
    return pearson(learned, spectrum.gt_returns);
}

std::vector<std::pair<int, int>> cross_level_pairs(const NoisyDataset& dataset) {
    std::vector<std::pair<int, int>> pairs;
    int n = static_cast<int>(dataset.trajectories.size());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (dataset.trajectories[i].eta < dataset.trajectories[j].eta)
                pairs.emplace_back(i, j);
    return pairs;
}

double ranking_accuracy(const RewardFn& reward, const NoisyDataset& dataset) {
    if (dataset.distinct_levels().size() < 2)
        throw std::invalid_argument("ranking_accuracy: need at least 2 noise levels");
    auto pairs = cross_level_pairs(dataset);
    std::vector<double> sums(dataset.trajectories.size());
    for (std::size_t i = 0; i < dataset.trajectories.size(); ++i)
        sums[i] = learned_return(reward, dataset.trajectories[i].traj);
    int correct = 0;
    for (const auto& [lo, hi] : pairs)
        if (sums[lo] > sums[hi]) ++correct; // ties are incorrect
    return static_cast<double>(correct) / static_cast<double>(pairs.size());
}

PolicyEvalResult policy_eval(const Policy& policy, const Environment& env, int episodes, Rng& rng) {
    if (episodes < 1) throw std::invalid_argument("policy_eval: episodes must be >= 1");
    GroundTruthEvaluator gt(env);
    std::vector<double> returns(episodes);
    for (int e = 0; e < episodes; ++e)
        returns[e] = gt.trajectory_return(rollout(env, policy, rng));
    double mean = 0.0;
    for (double r : returns) mean += r;
    mean /= static_cast<double>(episodes);
    double var = 0.0;
    for (double r : returns) var += (r - mean) * (r - mean);
    var /= static_cast<double>(episodes);
    return {mean, std::sqrt(var)};
}

TrajectorySpectrum build_checkpoint_spectrum(const Environment& env, int count, std::uint64_t seed,
                                             int iterations_per_checkpoint,
                                             const RlConfig& train_base) {
    RlConfig config = train_base;
    config.iterations = count * iterations_per_checkpoint;
    config.checkpoint_interval = iterations_per_checkpoint;
    config.seed = derive_seed(seed, "spectrum-train");
    GroundTruthReward gt(env);
    PgResult pg = pg_train(env, gt, config);

    TrajectorySpectrum spectrum;
    spectrum.provenance = "checkpoint-spectrum";
    Rng roll_rng(derive_seed(seed, "spectrum-rollout"));
    for (const auto& checkpoint : pg.checkpoints) {
        Trajectory traj = rollout(env, *checkpoint, roll_rng);
        spectrum.gt_returns.push_back(gt.evaluator().trajectory_return(traj));
        spectrum.trajectories.push_back(std::move(traj));
    }
    spectrum.validate();
    return spectrum;
}

std::vector<ScatterPoint> correlation_scatter(const RewardFn& reward,
                                              const TrajectorySpectrum& train,
                                              const TrajectorySpectrum& test) {
    double gt_lo = std::numeric_limits<double>::infinity(), gt_hi = -gt_lo;
    double le_lo = gt_lo, le_hi = -gt_lo;
    std::vector<ScatterPoint> points;
    auto add = [&](const TrajectorySpectrum& spec, const char* tag) {
        for (std::size_t i = 0; i < spec.trajectories.size(); ++i) {
            ScatterPoint p;
            p.gt_return = spec.gt_returns[i];
            p.learned_return = learned_return(reward, spec.trajectories[i]);
            p.split = tag;
            gt_lo = std::min(gt_lo, p.gt_return);
            gt_hi = std::max(gt_hi, p.gt_return);
            le_lo = std::min(le_lo, p.learned_return);
            le_hi = std::max(le_hi, p.learned_return);
            points.push_back(std::move(p));
        }
    };
    add(train, "train");
    add(test, "test");
    // affine map of learned sums onto the hidden-return range, export only
    double scale = le_hi > le_lo ? (gt_hi - gt_lo) / (le_hi - le_lo) : 1.0;
    for (auto& p : points)
        p.learned_return = gt_lo + (p.learned_return - le_lo) * scale;
    return points;
}

} // namespace slfd
