#include "ssrr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace slfd {

void SsrrConfig::validate() const {
    if (snippet_len_min < 0 || snippet_len_max < 0)
        throw std::invalid_argument("SsrrConfig: snippet lengths must be non-negative");
    if (snippet_len_min > 0 && snippet_len_max > 0 && snippet_len_min > snippet_len_max)
        throw std::invalid_argument("SsrrConfig: snippet_len_min must be <= snippet_len_max");
    if (snippets_per_epoch < 1 || batch_size < 1 || epochs < 1)
        throw std::invalid_argument("SsrrConfig: counts must be positive");
    if (l2_weight < 0.0) throw std::invalid_argument("SsrrConfig: l2_weight must be >= 0");
    if (step_size <= 0.0) throw std::invalid_argument("SsrrConfig: step_size must be positive");
}

int SsrrConfig::effective_min(int horizon) const {
    if (snippet_len_min > 0) return snippet_len_min;
    return static_cast<int>(std::ceil(horizon * 0.05));
}

int SsrrConfig::effective_max(int horizon) const {
    if (snippet_len_max > 0) return snippet_len_max;
    return std::max(horizon / 2, effective_min(horizon));
}

std::vector<Snippet> sample_snippets(const NoisyDataset& dataset, const SigmoidParams& sigma,
                                     const SsrrConfig& config, int horizon, Rng& rng) {
    if (dataset.trajectories.empty())
        throw std::invalid_argument("sample_snippets: dataset is empty");
    int len_min = config.effective_min(horizon);
    int len_max = config.effective_max(horizon);

    std::vector<Snippet> out;
    out.reserve(config.snippets_per_epoch);
    int n_traj = static_cast<int>(dataset.trajectories.size());
    for (int i = 0; i < config.snippets_per_epoch; ++i) {
        int ti = rng.uniform_int(n_traj);
        const NoisyTrajectory& nt = dataset.trajectories[ti];
        int traj_len = static_cast<int>(nt.traj.actions.size());

        Snippet sn;
        sn.traj_index = ti;
        if (config.full_trajectories || traj_len <= len_min) {
            sn.start = 0;
            sn.end = traj_len - 1;
        } else {
            int hi = std::min(len_max, traj_len);
            int len = len_min + rng.uniform_int(hi - len_min + 1);
            sn.start = rng.uniform_int(traj_len - len + 1);
            sn.end = sn.start + len - 1;
        }
        double ratio = static_cast<double>(sn.length()) / static_cast<double>(traj_len);
        sn.target = ratio * sigmoid_eval(sigma, nt.eta);
        out.push_back(sn);
    }
    return out;
}

double ssrr_loss(const MlpReward& reward, const NoisyDataset& dataset,
                 std::span<const Snippet> batch, double l2_weight, std::span<double> grad) {
    if (batch.empty()) throw std::invalid_argument("ssrr_loss: batch is empty");
    double loss = 0.0;
    double inv = 1.0 / static_cast<double>(batch.size());
    std::vector<MlpReward::TracedEval> evals;
    for (const Snippet& sn : batch) {
        const NoisyTrajectory& nt = dataset.trajectories.at(sn.traj_index);
        std::size_t len = static_cast<std::size_t>(sn.length());
        if (evals.size() < len) evals.resize(len);
        double pred = 0.0;
        for (int t = sn.start; t <= sn.end; ++t)
            pred += reward.reward_traced(nt.traj.states[t], nt.traj.actions[t],
                                         evals[static_cast<std::size_t>(t - sn.start)]);
        double err = pred - sn.target;
        loss += inv * err * err;
        if (!grad.empty()) {
            double cot = 2.0 * inv * err;
            for (std::size_t i = 0; i < len; ++i) reward.add_traced_grad(evals[i], cot, grad);
        }
    }
    loss += l2_penalty(reward.net().params(), l2_weight, grad);
    if (!std::isfinite(loss)) throw std::runtime_error("ssrr_loss: non-finite value");
    return loss;
}

SsrrResult ssrr_train(const NoisyDataset& dataset, const FitReport& fit,
                      const Environment& env, const SsrrConfig& config) {
    config.validate();
    dataset.validate();
    if (fit.source != provenance_signature(dataset.provenance))
        throw std::invalid_argument(
            "ssrr_train: fit report provenance '" + fit.source +
            "' does not match dataset '" + provenance_signature(dataset.provenance) + "'");

    auto reward = std::make_unique<MlpReward>(
        MlpReward::create(env, /*uses_action=*/true, config.hidden,
                          derive_seed(config.seed, "ssrr-init")));
    AdamState opt(reward->net().params().size(), config.step_size);
    Rng rng(derive_seed(config.seed, "ssrr-snippets"));

    SsrrResult result;
    std::vector<double> grad(reward->net().params().size());
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        auto snippets = sample_snippets(dataset, fit.params, config, env.spec().horizon, rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (std::size_t ofs = 0; ofs < snippets.size(); ofs += config.batch_size) {
            std::size_t n = std::min<std::size_t>(config.batch_size, snippets.size() - ofs);
            std::fill(grad.begin(), grad.end(), 0.0);
            epoch_loss += ssrr_loss(*reward, dataset,
                                    std::span<const Snippet>(snippets.data() + ofs, n),
                                    config.l2_weight, grad);
            adam_step(opt, reward->net().params(), grad);
            ++batches;
        }
        result.epoch_loss.push_back(epoch_loss / std::max(batches, 1));
    }
    result.reward = std::move(reward);
    return result;
}

std::vector<FitPoint> dataset_fit_points(const NoisyDataset& dataset) {
    std::vector<FitPoint> pts;
    pts.reserve(dataset.trajectories.size());
    for (const auto& nt : dataset.trajectories)
        pts.push_back({nt.eta, nt.initial_return()});
    return pts;
}

} // namespace slfd
