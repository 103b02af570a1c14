#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "env.hpp"
#include "noise.hpp"
#include "policy.hpp"

namespace slfd {

// Adversarial discriminator built from a learned scalar reward f(s, a):
// D(s, a) = e^f / (e^f + pi(a|s)), evaluated in log space as
// sigmoid(f - log pi). Gradients flow into f only; the policy density is a
// fixed input.
struct Discriminator {
    MlpReward f;

    explicit Discriminator(MlpReward reward_net) : f(std::move(reward_net)) {}
    static Discriminator create(const Environment& env, std::vector<int> hidden, std::uint64_t seed);
};

struct Transition {
    State state;
    Action action;
};

// Strictly inside (0,1) for finite f and positive policy density; returns 1
// in the log pi = -inf limit (the expert-certain case).
double discriminator_prob(const Discriminator& disc, const Policy& policy,
                          const State& state, const Action& action);

// Binary cross-entropy between expert pairs (label: expert) and generator
// pairs. Returns the loss and accumulates d(loss)/d(f params) into grad.
double airl_disc_loss(const Discriminator& disc, const Policy& policy,
                      std::span<const Transition> expert_batch,
                      std::span<const Transition> policy_batch,
                      std::span<double> grad);

// Same objective with the generator expectation taken under the noisy policy
// and corrected per sample by pi(a|s) / pi_eta(a|s). The weight multiplies
// only each generator sample's log(1 - D) term. At eta = 0 this equals
// airl_disc_loss exactly, value and gradient.
double noisy_airl_disc_loss(const Discriminator& disc, const Policy& policy,
                            const NoisyPolicy& eta_policy,
                            std::span<const Transition> expert_batch,
                            std::span<const Transition> noisy_batch,
                            std::span<double> grad);

struct AirlConfig {
    int train_steps = 200;
    int episodes_per_step = 10;
    int discriminator_updates_per_step = 10;
    bool noisy = false;
    // per-episode injection levels within one train step; must match
    // episodes_per_step when noisy
    std::vector<double> noise_schedule;
    std::uint64_t seed = 0;
    int disc_batch = 64;
    double disc_step_size = 1e-3;
    double policy_step_size = 0.05;
    double entropy_weight = 0.02;
    double discount = 0.99;
    std::vector<int> reward_hidden = {64, 64};

    void validate() const;
    // half zero, then an even ramp up to 0.25, stretched over `episodes`
    static std::vector<double> default_noise_schedule(int episodes);
};

struct AirlMetricsRow {
    int step = 0;
    double disc_loss = 0.0;
    double mean_pseudo_return = 0.0;
    std::optional<double> mean_gt_return;
};

struct AirlResult {
    std::unique_ptr<MlpReward> reward;          // final f
    std::unique_ptr<TrainablePolicy> policy;    // final generator
    std::vector<AirlMetricsRow> metrics;
};

// Alternates generator episode collection, discriminator updates, and one
// policy-gradient step on the pseudo-reward f(s, a) per train step. When
// noisy, episodes are collected through NoisyPolicy per the schedule and the
// discriminator update uses the importance-corrected loss. gt_eval, when
// provided, only fills the metrics column; it never reaches training.
AirlResult airl_train(const std::vector<Trajectory>& demos, const Environment& env,
                      const AirlConfig& config,
                      const GroundTruthEvaluator* gt_eval = nullptr);

} // namespace slfd
