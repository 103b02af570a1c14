#include "airl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
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

// Shared kernel: loss = -mean log D(expert) - mean w * log(1-D(gen)).
double disc_loss_weighted(const Discriminator& disc, const Policy& policy,
                          std::span<const Transition> expert_batch,
                          std::span<const Transition> policy_batch,
                          std::span<const double> weights,
                          std::span<double> grad) {
    if (expert_batch.empty() || policy_batch.empty())
        throw std::invalid_argument("discriminator loss: batches must be non-empty");
    double loss = 0.0;
    MlpReward::TracedEval eval;
    double inv_e = 1.0 / static_cast<double>(expert_batch.size());
    for (const auto& tr : expert_batch) {
        double z = disc.f.reward_traced(tr.state, tr.action, eval) -
                   policy.log_prob(tr.state, tr.action);
        loss += inv_e * softplus(-z); // -log D
        if (!grad.empty()) disc.f.add_traced_grad(eval, inv_e * (sigmoid(z) - 1.0), grad);
    }
    double inv_p = 1.0 / static_cast<double>(policy_batch.size());
    for (std::size_t j = 0; j < policy_batch.size(); ++j) {
        const auto& tr = policy_batch[j];
        double w = weights.empty() ? 1.0 : weights[j];
        double z = disc.f.reward_traced(tr.state, tr.action, eval) -
                   policy.log_prob(tr.state, tr.action);
        loss += inv_p * w * softplus(z); // -log (1 - D)
        if (!grad.empty()) disc.f.add_traced_grad(eval, inv_p * w * sigmoid(z), grad);
    }
    if (!std::isfinite(loss))
        throw std::runtime_error("discriminator loss: non-finite value");
    return loss;
}

} // namespace

Discriminator Discriminator::create(const Environment& env, std::vector<int> hidden, std::uint64_t seed) {
    return Discriminator(MlpReward::create(env, /*uses_action=*/true, std::move(hidden), seed));
}

double discriminator_prob(const Discriminator& disc, const Policy& policy,
                          const State& state, const Action& action) {
    double log_pi = policy.log_prob(state, action);
    if (std::isinf(log_pi) && log_pi < 0.0) return 1.0;
    return sigmoid(disc.f.reward(state, action) - log_pi);
}

double airl_disc_loss(const Discriminator& disc, const Policy& policy,
                      std::span<const Transition> expert_batch,
                      std::span<const Transition> policy_batch,
                      std::span<double> grad) {
    return disc_loss_weighted(disc, policy, expert_batch, policy_batch, {}, grad);
}

double noisy_airl_disc_loss(const Discriminator& disc, const Policy& policy,
                            const NoisyPolicy& eta_policy,
                            std::span<const Transition> expert_batch,
                            std::span<const Transition> noisy_batch,
                            std::span<double> grad) {
    std::vector<double> weights(noisy_batch.size(), 1.0);
    if (eta_policy.eta() > 0.0) {
        for (std::size_t j = 0; j < noisy_batch.size(); ++j) {
            double log_base = policy.log_prob(noisy_batch[j].state, noisy_batch[j].action);
            double log_noisy = eta_policy.log_prob(noisy_batch[j].state, noisy_batch[j].action);
            if (!std::isfinite(log_noisy))
                throw std::runtime_error("noisy_airl_disc_loss: zero density under the noisy policy");
            weights[j] = std::exp(log_base - log_noisy);
        }
    }
    return disc_loss_weighted(disc, policy, expert_batch, noisy_batch, weights, grad);
}

// ---------------------------------------------------------------------------

void AirlConfig::validate() const {
    if (train_steps < 1 || episodes_per_step < 1 || discriminator_updates_per_step < 1 || disc_batch < 1)
        throw std::invalid_argument("AirlConfig: counts must be positive");
    if (noisy) {
        if (noise_schedule.size() != static_cast<std::size_t>(episodes_per_step))
            throw std::invalid_argument("AirlConfig: noise_schedule length must equal episodes_per_step");
        for (double eta : noise_schedule)
            if (eta < 0.0 || eta > 1.0)
                throw std::invalid_argument("AirlConfig: noise levels must lie in [0,1]");
    }
}

std::vector<double> AirlConfig::default_noise_schedule(int episodes) {
    static const double base[10] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.05, 0.10, 0.15, 0.20, 0.25};
    std::vector<double> schedule(episodes);
    for (int i = 0; i < episodes; ++i)
        schedule[i] = base[(i * 10) / episodes];
    return schedule;
}

AirlResult airl_train(const std::vector<Trajectory>& demos, const Environment& env,
                      const AirlConfig& config, const GroundTruthEvaluator* gt_eval) {
    config.validate();
    if (demos.empty()) throw std::invalid_argument("airl_train: demonstration set is empty");
    for (const auto& d : demos) d.validate(env.spec());

    std::vector<Transition> expert;
    for (const auto& d : demos)
        for (std::size_t t = 0; t < d.actions.size(); ++t)
            expert.push_back({d.states[t], d.actions[t]});

    Discriminator disc = Discriminator::create(env, config.reward_hidden,
                                               derive_seed(config.seed, "airl-disc-init"));
    auto policy = make_policy(env, derive_seed(config.seed, "airl-policy-init"));

    AdamState disc_opt(disc.f.net().params().size(), config.disc_step_size);
    AdamState policy_opt(policy->params().size(), config.policy_step_size);

    Rng collect_rng(derive_seed(config.seed, "airl-collect"));
    Rng sample_rng(derive_seed(config.seed, "airl-batch"));

    AirlResult result;
    std::vector<double> disc_grad(disc.f.net().params().size());
    std::vector<double> policy_grad(policy->params().size());

    for (int step = 0; step < config.train_steps; ++step) {
        // collect generator episodes, noise-injected per schedule when noisy
        std::vector<Trajectory> episodes;
        std::vector<Transition> generated;
        std::vector<double> weights;
        for (int e = 0; e < config.episodes_per_step; ++e) {
            double eta = config.noisy ? config.noise_schedule[e] : 0.0;
            NoisyPolicy behavior(env, *policy, eta);
            Trajectory traj = rollout(env, behavior, collect_rng);
            for (std::size_t t = 0; t < traj.actions.size(); ++t) {
                generated.push_back({traj.states[t], traj.actions[t]});
                double w = 1.0;
                if (eta > 0.0) {
                    double lb = policy->log_prob(traj.states[t], traj.actions[t]);
                    double ln = behavior.log_prob(traj.states[t], traj.actions[t]);
                    w = std::exp(lb - ln);
                }
                weights.push_back(w);
            }
            episodes.push_back(std::move(traj));
        }

        // discriminator updates on resampled minibatches
        double disc_loss = 0.0;
        for (int u = 0; u < config.discriminator_updates_per_step; ++u) {
            std::vector<Transition> expert_batch(config.disc_batch);
            std::vector<Transition> gen_batch(config.disc_batch);
            std::vector<double> w_batch(config.disc_batch);
            for (int b = 0; b < config.disc_batch; ++b) {
                expert_batch[b] = expert[sample_rng.uniform_int(static_cast<int>(expert.size()))];
                int j = sample_rng.uniform_int(static_cast<int>(generated.size()));
                gen_batch[b] = generated[j];
                w_batch[b] = weights[j];
            }
            std::fill(disc_grad.begin(), disc_grad.end(), 0.0);
            disc_loss = disc_loss_weighted(disc, *policy, expert_batch, gen_batch, w_batch, disc_grad);
            adam_step(disc_opt, disc.f.net().params(), disc_grad);
        }

        // one policy-gradient step on the pseudo-reward f(s, a)
        std::vector<double> returns(episodes.size());
        double mean_pseudo = 0.0;
        for (std::size_t e = 0; e < episodes.size(); ++e) {
            double g = 0.0, w = 1.0, undiscounted = 0.0;
            const auto& traj = episodes[e];
            for (std::size_t t = 0; t < traj.actions.size(); ++t) {
                double r = disc.f.reward(traj.states[t], traj.actions[t]);
                g += w * r;
                undiscounted += r;
                w *= config.discount;
            }
            returns[e] = g;
            mean_pseudo += undiscounted;
        }
        mean_pseudo /= static_cast<double>(episodes.size());
        std::vector<double> advantages = normalized_advantages(returns);

        std::fill(policy_grad.begin(), policy_grad.end(), 0.0);
        double inv = 1.0 / static_cast<double>(episodes.size());
        for (std::size_t e = 0; e < episodes.size(); ++e) {
            for (std::size_t t = 0; t < episodes[e].actions.size(); ++t) {
                policy->add_log_prob_grad(episodes[e].states[t], episodes[e].actions[t],
                                          -advantages[e] * inv, policy_grad);
                if (config.entropy_weight > 0.0)
                    policy->add_entropy_grad(episodes[e].states[t], -config.entropy_weight * inv,
                                             policy_grad);
            }
        }
        adam_step(policy_opt, policy->params(), policy_grad);

        AirlMetricsRow row;
        row.step = step;
        row.disc_loss = disc_loss;
        row.mean_pseudo_return = mean_pseudo;
        if (gt_eval) {
            double gt = 0.0;
            for (const auto& traj : episodes) gt += gt_eval->trajectory_return(traj);
            row.mean_gt_return = gt / static_cast<double>(episodes.size());
        }
        result.metrics.push_back(row);
    }

    result.reward = std::make_unique<MlpReward>(disc.f);
    result.policy = std::move(policy);
    return result;
}

} // namespace slfd
