#include "policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace slfd {

namespace {
constexpr double kLogTwoPi = 1.8378770664093453; // log(2*pi)

double log_sum_exp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - m);
    return m + std::log(acc);
}
} // namespace

// ---------------------------------------------------------------------------
// MlpReward

MlpReward::MlpReward(const Environment& env, Mlp net, bool uses_action)
    : env_(&env), net_(std::move(net)), uses_action_(uses_action) {
    int want = env.spec().state_feature_dim + (uses_action ? env.spec().action_feature_dim : 0);
    if (net_.input_dim() != want)
        throw std::invalid_argument("MlpReward: network input width does not match feature width");
    if (net_.output_dim() != 1)
        throw std::invalid_argument("MlpReward: network must be scalar-valued");
}

MlpReward MlpReward::create(const Environment& env, bool uses_action,
                            std::vector<int> hidden, std::uint64_t seed) {
    std::vector<int> widths;
    widths.push_back(env.spec().state_feature_dim + (uses_action ? env.spec().action_feature_dim : 0));
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(1);
    return MlpReward(env, Mlp::create(std::move(widths), Activation::Tanh, seed), uses_action);
}

std::vector<double> MlpReward::features(const State& state, const Action& action) const {
    std::vector<double> f = env_->state_features(state);
    if (uses_action_) {
        auto af = env_->action_features(action);
        f.insert(f.end(), af.begin(), af.end());
    }
    return f;
}

double MlpReward::reward(const State& state, const Action& action) const {
    return net_.forward(features(state, action))[0];
}

void MlpReward::add_reward_grad(const State& state, const Action& action, double scale,
                                std::span<double> grad) const {
    TracedEval eval;
    reward_traced(state, action, eval);
    add_traced_grad(eval, scale, grad);
}

double MlpReward::reward_traced(const State& state, const Action& action, TracedEval& out) const {
    out.features = features(state, action);
    out.value = net_.forward(out.features, out.trace)[0];
    return out.value;
}

void MlpReward::add_traced_grad(const TracedEval& eval, double scale, std::span<double> grad) const {
    double cotangent[1] = {scale};
    net_.backward(eval.features, eval.trace, cotangent, grad);
}

// ---------------------------------------------------------------------------
// TabularSoftmaxPolicy

TabularSoftmaxPolicy::TabularSoftmaxPolicy(int state_count, int action_count)
    : state_count_(state_count), action_count_(action_count),
      logits_(static_cast<std::size_t>(state_count) * action_count, 0.0) {
    if (state_count < 1 || action_count < 1)
        throw std::invalid_argument("TabularSoftmaxPolicy: counts must be positive");
}

int TabularSoftmaxPolicy::state_index(const State& state) const {
    if (state.size() != 1)
        throw std::invalid_argument("TabularSoftmaxPolicy: expected a single-entry discrete state");
    int s = static_cast<int>(state[0]);
    if (s < 0 || s >= state_count_)
        throw std::invalid_argument("TabularSoftmaxPolicy: state index out of range");
    return s;
}

std::vector<double> TabularSoftmaxPolicy::log_probs_at(int s) const {
    std::vector<double> lp(logits_.begin() + static_cast<std::size_t>(s) * action_count_,
                           logits_.begin() + static_cast<std::size_t>(s + 1) * action_count_);
    double z = log_sum_exp(lp);
    for (double& x : lp) x -= z;
    return lp;
}

std::vector<double> TabularSoftmaxPolicy::action_probs(const State& state) const {
    auto lp = log_probs_at(state_index(state));
    std::vector<double> p(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) p[i] = std::exp(lp[i]);
    return p;
}

Action TabularSoftmaxPolicy::sample(const State& state, Rng& rng) const {
    auto p = action_probs(state);
    double u = rng.next_double();
    double acc = 0.0;
    for (int a = 0; a < action_count_; ++a) {
        acc += p[a];
        if (u < acc) return {static_cast<double>(a)};
    }
    return {static_cast<double>(action_count_ - 1)};
}

double TabularSoftmaxPolicy::log_prob(const State& state, const Action& action) const {
    int a = static_cast<int>(action.at(0));
    if (a < 0 || a >= action_count_)
        throw std::invalid_argument("TabularSoftmaxPolicy: action index out of range");
    return log_probs_at(state_index(state))[a];
}

void TabularSoftmaxPolicy::add_log_prob_grad(const State& state, const Action& action, double scale,
                                             std::span<double> grad) const {
    int s = state_index(state);
    int a = static_cast<int>(action.at(0));
    auto lp = log_probs_at(s);
    std::size_t base = static_cast<std::size_t>(s) * action_count_;
    for (int j = 0; j < action_count_; ++j)
        grad[base + j] += scale * ((j == a ? 1.0 : 0.0) - std::exp(lp[j]));
}

double TabularSoftmaxPolicy::entropy(const State& state) const {
    auto lp = log_probs_at(state_index(state));
    double h = 0.0;
    for (double l : lp) h -= std::exp(l) * l;
    return h;
}

void TabularSoftmaxPolicy::add_entropy_grad(const State& state, double scale, std::span<double> grad) const {
    int s = state_index(state);
    auto lp = log_probs_at(s);
    double h = 0.0;
    for (double l : lp) h -= std::exp(l) * l;
    std::size_t base = static_cast<std::size_t>(s) * action_count_;
    for (int j = 0; j < action_count_; ++j) {
        double p = std::exp(lp[j]);
        grad[base + j] += scale * (-p * (lp[j] + h));
    }
}

std::unique_ptr<TrainablePolicy> TabularSoftmaxPolicy::clone() const {
    return std::make_unique<TabularSoftmaxPolicy>(*this);
}

// ---------------------------------------------------------------------------
// GaussianMlpPolicy

GaussianMlpPolicy::GaussianMlpPolicy(const Environment& env, Mlp mean_net, std::vector<double> log_std)
    : env_(&env), mean_net_(std::move(mean_net)),
      action_dim_(env.spec().action_dim) {
    if (mean_net_.input_dim() != env.spec().state_feature_dim)
        throw std::invalid_argument("GaussianMlpPolicy: mean network input width mismatch");
    if (mean_net_.output_dim() != action_dim_)
        throw std::invalid_argument("GaussianMlpPolicy: mean network output width mismatch");
    if (log_std.size() != static_cast<std::size_t>(action_dim_))
        throw std::invalid_argument("GaussianMlpPolicy: log_std size mismatch");
    params_ = mean_net_.params();
    params_.insert(params_.end(), log_std.begin(), log_std.end());
}

GaussianMlpPolicy GaussianMlpPolicy::create(const Environment& env, std::vector<int> hidden,
                                            std::uint64_t seed, double init_std) {
    std::vector<int> widths;
    widths.push_back(env.spec().state_feature_dim);
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(env.spec().action_dim);
    Mlp net = Mlp::create(std::move(widths), Activation::Tanh, seed);
    std::vector<double> log_std(env.spec().action_dim, std::log(init_std));
    return GaussianMlpPolicy(env, std::move(net), std::move(log_std));
}

void GaussianMlpPolicy::sync_views() const {
    std::copy(params_.begin(), params_.end() - action_dim_, mean_net_.params().begin());
}

std::vector<double> GaussianMlpPolicy::stddevs() const {
    std::vector<double> s(action_dim_);
    for (int d = 0; d < action_dim_; ++d)
        s[d] = std::max(std::exp(params_[params_.size() - action_dim_ + d]), kStdFloor);
    return s;
}

Action GaussianMlpPolicy::mean_action(const State& state) const {
    sync_views();
    return mean_net_.forward(env_->state_features(state));
}

Action GaussianMlpPolicy::sample(const State& state, Rng& rng) const {
    Action mu = mean_action(state);
    auto sd = stddevs();
    for (int d = 0; d < action_dim_; ++d) mu[d] += sd[d] * rng.normal();
    return mu;
}

double GaussianMlpPolicy::log_prob(const State& state, const Action& action) const {
    if (action.size() != static_cast<std::size_t>(action_dim_))
        throw std::invalid_argument("GaussianMlpPolicy: action dimension mismatch");
    Action mu = mean_action(state);
    auto sd = stddevs();
    double lp = 0.0;
    for (int d = 0; d < action_dim_; ++d) {
        double z = (action[d] - mu[d]) / sd[d];
        lp += -0.5 * z * z - std::log(sd[d]) - 0.5 * kLogTwoPi;
    }
    return lp;
}

void GaussianMlpPolicy::add_log_prob_grad(const State& state, const Action& action, double scale,
                                          std::span<double> grad) const {
    sync_views();
    auto features = env_->state_features(state);
    Mlp::Trace trace;
    auto mu = mean_net_.forward(features, trace);
    auto sd = stddevs();

    std::size_t ls_base = static_cast<std::size_t>(mean_net_.param_count());
    std::vector<double> dmu(action_dim_);
    for (int d = 0; d < action_dim_; ++d) {
        double z = (action[d] - mu[d]) / sd[d];
        dmu[d] = scale * z / sd[d];
        // d logp / d log_std is zero where the stddev floor is active
        if (std::exp(params_[ls_base + d]) > kStdFloor)
            grad[ls_base + d] += scale * (z * z - 1.0);
    }
    mean_net_.backward(features, trace, dmu, grad.subspan(0, mean_net_.param_count()));
}

double GaussianMlpPolicy::entropy(const State& /*state*/) const {
    auto sd = stddevs();
    double h = 0.0;
    for (double s : sd) h += std::log(s) + 0.5 * (1.0 + kLogTwoPi);
    return h;
}

void GaussianMlpPolicy::add_entropy_grad(const State& /*state*/, double scale, std::span<double> grad) const {
    std::size_t ls_base = static_cast<std::size_t>(mean_net_.param_count());
    for (int d = 0; d < action_dim_; ++d) {
        if (std::exp(params_[ls_base + d]) > kStdFloor)
            grad[ls_base + d] += scale;
    }
}

std::unique_ptr<TrainablePolicy> GaussianMlpPolicy::clone() const {
    return std::make_unique<GaussianMlpPolicy>(*this);
}

std::unique_ptr<TrainablePolicy> make_policy(const Environment& env, std::uint64_t seed) {
    if (env.spec().action_kind == ActionKind::Discrete)
        return std::make_unique<TabularSoftmaxPolicy>(env.spec().state_count, env.spec().action_count);
    return std::make_unique<GaussianMlpPolicy>(GaussianMlpPolicy::create(env, {64, 64}, seed));
}

// ---------------------------------------------------------------------------
// Behavioral cloning

double mean_negative_log_likelihood(const Policy& policy, const std::vector<Trajectory>& demos) {
    double nll = 0.0;
    std::size_t n = 0;
    for (const auto& demo : demos) {
        for (std::size_t t = 0; t < demo.actions.size(); ++t) {
            nll -= policy.log_prob(demo.states[t], demo.actions[t]);
            ++n;
        }
    }
    if (n == 0) throw std::invalid_argument("mean_negative_log_likelihood: no transitions");
    return nll / static_cast<double>(n);
}

std::unique_ptr<TrainablePolicy> bc_train(const Environment& env,
                                          const std::vector<Trajectory>& demos,
                                          const BcConfig& config) {
    if (demos.empty()) throw std::invalid_argument("bc_train: demonstration set is empty");
    for (const auto& d : demos) d.validate(env.spec());

    auto policy = make_policy(env, derive_seed(config.seed, "bc-init"));
    std::size_t n_params = policy->params().size();
    AdamState opt(n_params, config.step_size);

    std::size_t transitions = 0;
    for (const auto& d : demos) transitions += d.actions.size();

    double best_nll = mean_negative_log_likelihood(*policy, demos);
    std::vector<double> best_params = policy->params();

    std::vector<double> grad(n_params);
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        // full-batch gradient of the mean NLL
        double inv = 1.0 / static_cast<double>(transitions);
        for (const auto& demo : demos)
            for (std::size_t t = 0; t < demo.actions.size(); ++t)
                policy->add_log_prob_grad(demo.states[t], demo.actions[t], -inv, grad);
        adam_step(opt, policy->params(), grad);

        double nll = mean_negative_log_likelihood(*policy, demos);
        if (nll < best_nll) {
            best_nll = nll;
            best_params = policy->params();
        }
    }
    policy->params() = best_params;
    return policy;
}

// ---------------------------------------------------------------------------
// Policy gradient

void RlConfig::validate() const {
    if (iterations < 1 || episodes_per_iteration < 1 || eval_episodes < 1 || checkpoint_interval < 1)
        throw std::invalid_argument("RlConfig: counts must be positive");
    if (discount < 0.0 || discount > 1.0) throw std::invalid_argument("RlConfig: discount must be in [0,1]");
    if (entropy_weight < 0.0) throw std::invalid_argument("RlConfig: entropy_weight must be >= 0");
    if (step_size <= 0.0) throw std::invalid_argument("RlConfig: step_size must be positive");
}

namespace {
double model_return(const RewardFn& reward, const Trajectory& traj, double discount) {
    double g = 0.0, w = 1.0;
    for (std::size_t t = 0; t < traj.actions.size(); ++t) {
        double r = reward.reward(traj.states[t], traj.actions[t]);
        if (!std::isfinite(r))
            throw std::runtime_error("pg_train: reward model produced non-finite value " + std::to_string(r));
        g += w * r;
        w *= discount;
    }
    return g;
}
} // namespace

// Mean-centered, scale-normalized batch advantages. Normalization keeps the
// update magnitude independent of the reward scale, which matters when the
// reward itself is a drifting learned model.
std::vector<double> normalized_advantages(const std::vector<double>& returns) {
    double mean = 0.0;
    for (double g : returns) mean += g;
    mean /= static_cast<double>(returns.size());
    double var = 0.0;
    for (double g : returns) var += (g - mean) * (g - mean);
    double sd = std::sqrt(var / static_cast<double>(returns.size()));
    std::vector<double> adv(returns.size());
    for (std::size_t i = 0; i < returns.size(); ++i)
        adv[i] = (returns[i] - mean) / (sd + 1e-8);
    return adv;
}

PgResult pg_train(const Environment& env, const RewardFn& reward, const RlConfig& config) {
    config.validate();
    PgResult result;
    auto policy = make_policy(env, derive_seed(config.seed, "pg-init"));
    std::size_t n_params = policy->params().size();
    AdamState opt(n_params, config.step_size);

    Rng collect_rng(derive_seed(config.seed, "pg-collect"));
    double best_eval = -std::numeric_limits<double>::infinity();
    std::vector<double> best_params = policy->params();

    std::vector<double> grad(n_params);
    for (int iter = 0; iter < config.iterations; ++iter) {
        std::vector<Trajectory> episodes;
        episodes.reserve(config.episodes_per_iteration);
        for (int e = 0; e < config.episodes_per_iteration; ++e)
            episodes.push_back(rollout(env, *policy, collect_rng));

        std::vector<double> returns(episodes.size());
        for (std::size_t e = 0; e < episodes.size(); ++e)
            returns[e] = model_return(reward, episodes[e], config.discount);
        std::vector<double> advantages = normalized_advantages(returns);

        std::fill(grad.begin(), grad.end(), 0.0);
        double inv = 1.0 / static_cast<double>(episodes.size());
        for (std::size_t e = 0; e < episodes.size(); ++e) {
            const auto& traj = episodes[e];
            for (std::size_t t = 0; t < traj.actions.size(); ++t) {
                // minimize the negated objective
                policy->add_log_prob_grad(traj.states[t], traj.actions[t], -advantages[e] * inv, grad);
                if (config.entropy_weight > 0.0)
                    policy->add_entropy_grad(traj.states[t], -config.entropy_weight * inv, grad);
            }
        }
        adam_step(opt, policy->params(), grad);

        // held-out evaluation under the training reward, undiscounted
        Rng eval_rng(derive_seed(config.seed, "pg-eval", static_cast<std::uint64_t>(iter)));
        double eval_mean = 0.0;
        for (int e = 0; e < config.eval_episodes; ++e) {
            Trajectory traj = rollout(env, *policy, eval_rng);
            eval_mean += model_return(reward, traj, 1.0);
        }
        eval_mean /= static_cast<double>(config.eval_episodes);
        result.eval_returns.push_back(eval_mean);
        if (eval_mean > best_eval) {
            best_eval = eval_mean;
            best_params = policy->params();
            result.best_iteration = iter;
        }
        if ((iter + 1) % config.checkpoint_interval == 0)
            result.checkpoints.push_back(policy->clone());
    }

    policy->params() = best_params;
    result.policy = std::move(policy);
    return result;
}

} // namespace slfd
