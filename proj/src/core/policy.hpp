#pragma once

#include <memory>
#include <span>
#include <vector>

#include "env.hpp"
#include "mlp.hpp"

namespace slfd {

// Reward signal consumed by trainers. Implemented by learned reward models
// and by the evaluation-side ground-truth adapter.
class RewardFn {
public:
    virtual ~RewardFn() = default;
    virtual double reward(const State& state, const Action& action) const = 0;
};

// Scalar MLP reward over featurized state (optionally concatenated with the
// featurized action).
class MlpReward final : public RewardFn {
public:
    MlpReward(const Environment& env, Mlp net, bool uses_action);
    static MlpReward create(const Environment& env, bool uses_action,
                            std::vector<int> hidden, std::uint64_t seed);

    double reward(const State& state, const Action& action) const override;

    // Accumulates scale * d(reward)/d(params) into grad.
    void add_reward_grad(const State& state, const Action& action, double scale,
                         std::span<double> grad) const;

    // Forward pass that keeps the activations so the backward pass can run
    // without re-evaluating; the workhorse of the batched losses.
    struct TracedEval {
        std::vector<double> features;
        Mlp::Trace trace;
        double value = 0.0;
    };
    double reward_traced(const State& state, const Action& action, TracedEval& out) const;
    void add_traced_grad(const TracedEval& eval, double scale, std::span<double> grad) const;

    bool uses_action() const { return uses_action_; }
    Mlp& net() { return net_; }
    const Mlp& net() const { return net_; }
    const Environment& environment() const { return *env_; }

private:
    std::vector<double> features(const State& state, const Action& action) const;

    const Environment* env_;
    Mlp net_;
    bool uses_action_;
};

// Policy whose parameters a gradient trainer can touch.
class TrainablePolicy : public Policy {
public:
    virtual std::vector<double>& params() = 0;
    virtual const std::vector<double>& params() const = 0;
    virtual void add_log_prob_grad(const State& state, const Action& action, double scale,
                                   std::span<double> grad) const = 0;
    virtual double entropy(const State& state) const = 0;
    virtual void add_entropy_grad(const State& state, double scale, std::span<double> grad) const = 0;
    virtual std::unique_ptr<TrainablePolicy> clone() const = 0;
    virtual std::string kind() const = 0;
};

// Softmax over a logits table, one row per discrete state. Zero logits give
// the uniform policy.
class TabularSoftmaxPolicy final : public TrainablePolicy {
public:
    TabularSoftmaxPolicy(int state_count, int action_count);

    Action sample(const State& state, Rng& rng) const override;
    double log_prob(const State& state, const Action& action) const override;

    std::vector<double>& params() override { return logits_; }
    const std::vector<double>& params() const override { return logits_; }
    void add_log_prob_grad(const State& state, const Action& action, double scale,
                           std::span<double> grad) const override;
    double entropy(const State& state) const override;
    void add_entropy_grad(const State& state, double scale, std::span<double> grad) const override;
    std::unique_ptr<TrainablePolicy> clone() const override;
    std::string kind() const override { return "tabular-softmax"; }

    int state_count() const { return state_count_; }
    int action_count() const { return action_count_; }
    // normalized action probabilities at one state
    std::vector<double> action_probs(const State& state) const;

private:
    int state_index(const State& state) const;
    std::vector<double> log_probs_at(int s) const;

    int state_count_;
    int action_count_;
    std::vector<double> logits_; // state-major, action minor
};

// Diagonal Gaussian over continuous actions: MLP mean over state features,
// state-independent log-std vector. Parameters are the flat MLP vector
// followed by the log-stds. Stddev is floored at 0.01 so densities stay
// proper.
class GaussianMlpPolicy final : public TrainablePolicy {
public:
    GaussianMlpPolicy(const Environment& env, Mlp mean_net, std::vector<double> log_std);
    static GaussianMlpPolicy create(const Environment& env, std::vector<int> hidden,
                                    std::uint64_t seed, double init_std = 0.5);

    Action sample(const State& state, Rng& rng) const override;
    double log_prob(const State& state, const Action& action) const override;

    std::vector<double>& params() override { return params_; }
    const std::vector<double>& params() const override { return params_; }
    void add_log_prob_grad(const State& state, const Action& action, double scale,
                           std::span<double> grad) const override;
    double entropy(const State& state) const override;
    void add_entropy_grad(const State& state, double scale, std::span<double> grad) const override;
    std::unique_ptr<TrainablePolicy> clone() const override;
    std::string kind() const override { return "gaussian-mlp"; }

    Action mean_action(const State& state) const;
    const Mlp& mean_net() const { return mean_net_; }
    int action_dim() const { return action_dim_; }
    std::vector<double> stddevs() const;
    const Environment& environment() const { return *env_; }

    static constexpr double kStdFloor = 0.01;

private:
    void sync_views() const;

    const Environment* env_;
    mutable Mlp mean_net_;       // materialized view over the front of params_
    int action_dim_;
    std::vector<double> params_; // [mlp params..., log_std...]
};

// Fresh policy of the kind matching the environment's action space.
std::unique_ptr<TrainablePolicy> make_policy(const Environment& env, std::uint64_t seed);

struct BcConfig {
    int epochs = 200;
    double step_size = 1e-2;
    std::uint64_t seed = 0;
};

// Behavioral cloning: maximum-likelihood fit of a policy on demonstration
// transitions. Returns the parameters with the lowest demo NLL seen, so the
// result is never worse than the initial policy.
std::unique_ptr<TrainablePolicy> bc_train(const Environment& env,
                                          const std::vector<Trajectory>& demos,
                                          const BcConfig& config);

double mean_negative_log_likelihood(const Policy& policy, const std::vector<Trajectory>& demos);

struct RlConfig {
    int iterations = 200;
    int episodes_per_iteration = 20;
    double discount = 0.99;
    double entropy_weight = 0.02;
    double step_size = 0.05;
    std::uint64_t seed = 0;
    int eval_episodes = 8;      // held-out rollouts per iteration for best-checkpoint selection
    int checkpoint_interval = 10;

    void validate() const;
};

struct PgResult {
    std::unique_ptr<TrainablePolicy> policy;            // best under supplied reward
    std::vector<std::unique_ptr<TrainablePolicy>> checkpoints; // every checkpoint_interval iterations
    std::vector<double> eval_returns;                   // held-out mean model return per iteration
    int best_iteration = -1;
};

// Entropy-regularized policy gradient (score-function estimator with a mean
// return baseline and scale-normalized advantages). The reward argument is
// the training signal; ground truth never enters unless the caller
// deliberately passes its adapter.
PgResult pg_train(const Environment& env, const RewardFn& reward, const RlConfig& config);

std::vector<double> normalized_advantages(const std::vector<double>& returns);

} // namespace slfd
