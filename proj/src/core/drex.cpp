#include "drex.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace slfd {

namespace {

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

void DrexConfig::validate() const {
    if (pairs_per_epoch < 1 || batch_size < 1 || epochs < 1)
        throw std::invalid_argument("DrexConfig: counts must be positive");
    if (step_size <= 0.0) throw std::invalid_argument("DrexConfig: step_size must be positive");
    if (snippet_len_min < 0 || snippet_len_max < 0)
        throw std::invalid_argument("DrexConfig: snippet lengths must be non-negative");
}

std::vector<RankedPair> build_pairs(const NoisyDataset& dataset, int pairs_count,
                                    const DrexConfig& config, int horizon, Rng& rng) {
    // bucket trajectory indices by level
    std::map<double, std::vector<int>> by_level;
    for (std::size_t i = 0; i < dataset.trajectories.size(); ++i)
        by_level[dataset.trajectories[i].eta].push_back(static_cast<int>(i));
    if (by_level.size() < 2)
        throw std::invalid_argument("build_pairs: need at least 2 distinct noise levels");
    std::vector<double> levels;
    for (const auto& [eta, idx] : by_level) levels.push_back(eta);

    int len_min = config.snippet_len_min > 0 ? config.snippet_len_min
                                             : static_cast<int>(std::ceil(horizon * 0.05));
    int len_max = config.snippet_len_max > 0 ? config.snippet_len_max
                                             : std::max(horizon / 2, len_min);

    std::vector<RankedPair> pairs;
    pairs.reserve(pairs_count);
    int n_levels = static_cast<int>(levels.size());
    for (int i = 0; i < pairs_count; ++i) {
        int la = rng.uniform_int(n_levels);
        int lb = rng.uniform_int(n_levels - 1);
        if (lb >= la) ++lb; // distinct levels, strict ranking
        int lo = std::min(la, lb), hi = std::max(la, lb);

        const auto& lo_pool = by_level[levels[lo]];
        const auto& hi_pool = by_level[levels[hi]];
        int bi = lo_pool[rng.uniform_int(static_cast<int>(lo_pool.size()))];
        int wi = hi_pool[rng.uniform_int(static_cast<int>(hi_pool.size()))];

        int blen = static_cast<int>(dataset.trajectories[bi].traj.actions.size());
        int wlen = static_cast<int>(dataset.trajectories[wi].traj.actions.size());
        int cap = std::min({len_max, blen, wlen});
        int lenlo = std::min(len_min, cap);
        int len = lenlo + (cap > lenlo ? rng.uniform_int(cap - lenlo + 1) : 0);

        RankedPair pr;
        pr.better_traj = bi;
        pr.worse_traj = wi;
        pr.length = len;
        pr.better_start = blen - len > 0 ? rng.uniform_int(blen - len + 1) : 0;
        pr.worse_start = wlen - len > 0 ? rng.uniform_int(wlen - len + 1) : 0;
        pairs.push_back(pr);
    }
    return pairs;
}

double drex_loss(const MlpReward& reward, const NoisyDataset& dataset,
                 std::span<const RankedPair> pairs, std::span<double> grad) {
    if (pairs.empty()) throw std::invalid_argument("drex_loss: no pairs");
    if (reward.uses_action())
        throw std::invalid_argument("drex_loss: reward model must be state-only");
    static const Action kNoAction;
    double loss = 0.0;
    double inv = 1.0 / static_cast<double>(pairs.size());
    std::vector<MlpReward::TracedEval> better_evals, worse_evals;
    for (const RankedPair& pr : pairs) {
        const NoisyTrajectory& better = dataset.trajectories.at(pr.better_traj);
        const NoisyTrajectory& worse = dataset.trajectories.at(pr.worse_traj);
        std::size_t len = static_cast<std::size_t>(pr.length);
        if (better_evals.size() < len) {
            better_evals.resize(len);
            worse_evals.resize(len);
        }
        double sb = 0.0, sw = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
            sb += reward.reward_traced(better.traj.states[pr.better_start + static_cast<int>(i)],
                                       kNoAction, better_evals[i]);
            sw += reward.reward_traced(worse.traj.states[pr.worse_start + static_cast<int>(i)],
                                       kNoAction, worse_evals[i]);
        }
        loss += inv * softplus(sw - sb); // -log softmax(better)
        if (!grad.empty()) {
            double d = inv * sigmoid(sw - sb);
            for (std::size_t i = 0; i < len; ++i) {
                reward.add_traced_grad(better_evals[i], -d, grad);
                reward.add_traced_grad(worse_evals[i], d, grad);
            }
        }
    }
    if (!std::isfinite(loss)) throw std::runtime_error("drex_loss: non-finite value");
    return loss;
}

double three_trajectory_rank_loss(double r_first, double r_middle, double r_last) {
    // pairs: (first, middle), (first, last), (middle, last)
    return (softplus(r_middle - r_first) + softplus(r_last - r_first) +
            softplus(r_last - r_middle)) / 3.0;
}

double optimal_middle_return(double r_first, double r_last) {
    double lo = std::min(r_first, r_last) - 1.0;
    double hi = std::max(r_first, r_last) + 1.0;
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = three_trajectory_rank_loss(r_first, x1, r_last);
    double f2 = three_trajectory_rank_loss(r_first, x2, r_last);
    for (int i = 0; i < 200 && (b - a) > 1e-10; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = three_trajectory_rank_loss(r_first, x1, r_last);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = three_trajectory_rank_loss(r_first, x2, r_last);
        }
    }
    return 0.5 * (a + b);
}

DrexResult drex_train(const NoisyDataset& dataset, const Environment& env,
                      const DrexConfig& config) {
    config.validate();
    dataset.validate();

    auto reward = std::make_unique<MlpReward>(
        MlpReward::create(env, /*uses_action=*/false, config.hidden,
                          derive_seed(config.seed, "drex-init")));
    AdamState opt(reward->net().params().size(), config.step_size);
    Rng rng(derive_seed(config.seed, "drex-pairs"));

    DrexResult result;
    std::vector<double> grad(reward->net().params().size());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto pairs = build_pairs(dataset, config.pairs_per_epoch, config, env.spec().horizon, rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t ofs = 0; ofs < pairs.size(); ofs += config.batch_size) {
            std::size_t n = std::min<std::size_t>(config.batch_size, pairs.size() - ofs);
            std::fill(grad.begin(), grad.end(), 0.0);
            epoch_loss += drex_loss(*reward, dataset,
                                    std::span<const RankedPair>(pairs.data() + ofs, n), grad);
            adam_step(opt, reward->net().params(), grad);
            ++batches;
        }
        result.epoch_loss.push_back(epoch_loss / std::max(batches, 1));
    }
    result.reward = std::move(reward);
    return result;
}

} // namespace slfd
