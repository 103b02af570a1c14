#include "pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <set>
#include <stdexcept>

namespace slfd {

namespace fs = std::filesystem;

namespace {

void check_keys(const Json& j, const std::string& section, const std::set<std::string>& allowed) {
    if (!j.is_object())
        throw std::invalid_argument("config section '" + section + "' must be an object");
    for (const auto& [key, value] : j.items())
        if (!allowed.count(key))
            throw std::invalid_argument("config section '" + section + "': unknown key '" + key + "'");
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    return j.at(key).get<T>();
}

RlConfig rl_from_json(const Json& j, const RlConfig& base) {
    RlConfig c = base;
    c.iterations = get_or(j, "iterations", c.iterations);
    c.episodes_per_iteration = get_or(j, "episodes_per_iteration", c.episodes_per_iteration);
    c.discount = get_or(j, "discount", c.discount);
    c.entropy_weight = get_or(j, "entropy_weight", c.entropy_weight);
    c.step_size = get_or(j, "step_size", c.step_size);
    c.eval_episodes = get_or(j, "eval_episodes", c.eval_episodes);
    c.checkpoint_interval = get_or(j, "checkpoint_interval", c.checkpoint_interval);
    return c;
}

Json rl_to_json(const RlConfig& c) {
    return Json{{"iterations", c.iterations},
                {"episodes_per_iteration", c.episodes_per_iteration},
                {"discount", c.discount},
                {"entropy_weight", c.entropy_weight},
                {"step_size", c.step_size},
                {"eval_episodes", c.eval_episodes},
                {"checkpoint_interval", c.checkpoint_interval}};
}

const std::set<std::string> kRlKeys = {"iterations", "episodes_per_iteration", "discount",
                                       "entropy_weight", "step_size", "eval_episodes",
                                       "checkpoint_interval"};

std::set<std::string> with_keys(std::set<std::string> base, std::initializer_list<const char*> extra) {
    for (const char* k : extra) base.insert(k);
    return base;
}

} // namespace

double DemoStageConfig::stop_threshold(double best_return, double random_baseline, double fraction) {
    if (best_return > 0.0) return fraction * best_return;
    return random_baseline + fraction * (best_return - random_baseline);
}

void PipelineConfig::validate() const {
    make_environment(env_id); // throws on unknown id
    if (seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
    for (const auto& g : generators)
        if (g != "bc" && g != "airl" && g != "noisy-airl")
            throw std::invalid_argument("config: unknown generator '" + g + "'");
    for (const auto& l : learners)
        if (l != "ssrr" && l != "drex")
            throw std::invalid_argument("config: unknown learner '" + l + "'");
    if (generators.empty() || learners.empty())
        throw std::invalid_argument("config: generators and learners must be non-empty");
    if (demo.count < 1) throw std::invalid_argument("config: demo.count must be >= 1");
    if (demo.stop_fraction <= 0.0 || demo.stop_fraction > 1.0)
        throw std::invalid_argument("config: demo.stop_fraction must be in (0,1]");
    if (noise.levels < 2 || noise.episodes_per_level < 1)
        throw std::invalid_argument("config: noise grid needs >= 2 levels and >= 1 episode per level");
    if (jobs < 1) throw std::invalid_argument("config: jobs must be >= 1");
    demo.train.validate();
    rl.train.validate();
    ssrr.validate();
    drex.validate();
    AirlConfig a = airl;
    if (a.noisy && a.noise_schedule.empty())
        a.noise_schedule = AirlConfig::default_noise_schedule(a.episodes_per_step);
    a.validate();
}

PipelineConfig parse_pipeline_config(const Json& j) {
    check_keys(j, "top-level",
               {"env", "seed", "seeds", "generators", "learners", "out", "jobs", "demos", "demo",
                "bc", "airl", "noise", "fit", "ssrr", "drex", "rl", "eval"});
    PipelineConfig c;
    c.env_id = get_or<std::string>(j, "env", c.env_id);
    c.seed = get_or<std::uint64_t>(j, "seed", c.seed);
    c.seeds = get_or(j, "seeds", c.seeds);
    c.generators = get_or(j, "generators", c.generators);
    c.learners = get_or(j, "learners", c.learners);
    c.out_dir = get_or<std::string>(j, "out", c.out_dir);
    c.jobs = get_or(j, "jobs", c.jobs);
    c.demos_path = get_or<std::string>(j, "demos", c.demos_path);

    if (j.contains("demo")) {
        const Json& d = j.at("demo");
        check_keys(d, "demo", with_keys(kRlKeys, {"count", "stop_fraction"}));
        c.demo.count = get_or(d, "count", c.demo.count);
        c.demo.stop_fraction = get_or(d, "stop_fraction", c.demo.stop_fraction);
        c.demo.train = rl_from_json(d, c.demo.train);
    }
    if (j.contains("bc")) {
        const Json& b = j.at("bc");
        check_keys(b, "bc", {"epochs", "step_size"});
        c.bc.epochs = get_or(b, "epochs", c.bc.epochs);
        c.bc.step_size = get_or(b, "step_size", c.bc.step_size);
    }
    if (j.contains("airl")) {
        const Json& a = j.at("airl");
        check_keys(a, "airl",
                   {"train_steps", "episodes_per_step", "discriminator_updates_per_step", "noisy",
                    "noise_schedule", "disc_batch", "disc_step_size", "policy_step_size",
                    "entropy_weight", "discount"});
        c.airl.train_steps = get_or(a, "train_steps", c.airl.train_steps);
        c.airl.episodes_per_step = get_or(a, "episodes_per_step", c.airl.episodes_per_step);
        c.airl.discriminator_updates_per_step =
            get_or(a, "discriminator_updates_per_step", c.airl.discriminator_updates_per_step);
        c.airl.noisy = get_or(a, "noisy", c.airl.noisy);
        c.airl.noise_schedule = get_or(a, "noise_schedule", c.airl.noise_schedule);
        c.airl.disc_batch = get_or(a, "disc_batch", c.airl.disc_batch);
        c.airl.disc_step_size = get_or(a, "disc_step_size", c.airl.disc_step_size);
        c.airl.policy_step_size = get_or(a, "policy_step_size", c.airl.policy_step_size);
        c.airl.entropy_weight = get_or(a, "entropy_weight", c.airl.entropy_weight);
        c.airl.discount = get_or(a, "discount", c.airl.discount);
    }
    if (j.contains("noise")) {
        const Json& n = j.at("noise");
        check_keys(n, "noise", {"levels", "episodes_per_level", "generator", "policy", "reward"});
        c.noise.levels = get_or(n, "levels", c.noise.levels);
        c.noise.episodes_per_level = get_or(n, "episodes_per_level", c.noise.episodes_per_level);
        c.noise.generator = get_or<std::string>(n, "generator", c.noise.generator);
        c.noise.policy_path = get_or<std::string>(n, "policy", c.noise.policy_path);
        c.noise.reward_path = get_or<std::string>(n, "reward", c.noise.reward_path);
    }
    if (j.contains("fit")) {
        const Json& f = j.at("fit");
        check_keys(f, "fit", {"dataset"});
        c.fit.dataset_path = get_or<std::string>(f, "dataset", c.fit.dataset_path);
    }
    if (j.contains("ssrr")) {
        const Json& s = j.at("ssrr");
        check_keys(s, "ssrr",
                   {"snippet_len_min", "snippet_len_max", "snippets_per_epoch", "batch_size",
                    "epochs", "l2_weight", "step_size", "full_trajectories", "dataset", "fit"});
        c.ssrr.snippet_len_min = get_or(s, "snippet_len_min", c.ssrr.snippet_len_min);
        c.ssrr.snippet_len_max = get_or(s, "snippet_len_max", c.ssrr.snippet_len_max);
        c.ssrr.snippets_per_epoch = get_or(s, "snippets_per_epoch", c.ssrr.snippets_per_epoch);
        c.ssrr.batch_size = get_or(s, "batch_size", c.ssrr.batch_size);
        c.ssrr.epochs = get_or(s, "epochs", c.ssrr.epochs);
        c.ssrr.l2_weight = get_or(s, "l2_weight", c.ssrr.l2_weight);
        c.ssrr.step_size = get_or(s, "step_size", c.ssrr.step_size);
        c.ssrr.full_trajectories = get_or(s, "full_trajectories", c.ssrr.full_trajectories);
        c.ssrr_io.dataset_path = get_or<std::string>(s, "dataset", c.ssrr_io.dataset_path);
        c.ssrr_io.fit_path = get_or<std::string>(s, "fit", c.ssrr_io.fit_path);
    }
    if (j.contains("drex")) {
        const Json& d = j.at("drex");
        check_keys(d, "drex",
                   {"snippet_len_min", "snippet_len_max", "pairs_per_epoch", "batch_size", "epochs",
                    "step_size", "dataset"});
        c.drex.snippet_len_min = get_or(d, "snippet_len_min", c.drex.snippet_len_min);
        c.drex.snippet_len_max = get_or(d, "snippet_len_max", c.drex.snippet_len_max);
        c.drex.pairs_per_epoch = get_or(d, "pairs_per_epoch", c.drex.pairs_per_epoch);
        c.drex.batch_size = get_or(d, "batch_size", c.drex.batch_size);
        c.drex.epochs = get_or(d, "epochs", c.drex.epochs);
        c.drex.step_size = get_or(d, "step_size", c.drex.step_size);
        c.drex_io.dataset_path = get_or<std::string>(d, "dataset", c.drex_io.dataset_path);
    }
    if (j.contains("rl")) {
        const Json& r = j.at("rl");
        check_keys(r, "rl", with_keys(kRlKeys, {"reward"}));
        c.rl.reward_path = get_or<std::string>(r, "reward", c.rl.reward_path);
        c.rl.train = rl_from_json(r, c.rl.train);
    }
    if (j.contains("eval")) {
        const Json& e = j.at("eval");
        check_keys(e, "eval",
                   {"reward", "dataset", "demos", "policy", "generator_policy", "generator_reward",
                    "fit", "spectrum", "spectrum_size", "spectrum_interval", "policy_episodes",
                    "holdout_episodes_per_level"});
        c.eval.reward_path = get_or<std::string>(e, "reward", c.eval.reward_path);
        c.eval.dataset_path = get_or<std::string>(e, "dataset", c.eval.dataset_path);
        c.eval.demos_path = get_or<std::string>(e, "demos", c.eval.demos_path);
        c.eval.policy_path = get_or<std::string>(e, "policy", c.eval.policy_path);
        c.eval.generator_policy_path = get_or<std::string>(e, "generator_policy", c.eval.generator_policy_path);
        c.eval.generator_reward_path = get_or<std::string>(e, "generator_reward", c.eval.generator_reward_path);
        c.eval.fit_path = get_or<std::string>(e, "fit", c.eval.fit_path);
        c.eval.spectrum_path = get_or<std::string>(e, "spectrum", c.eval.spectrum_path);
        c.eval.spectrum_size = get_or(e, "spectrum_size", c.eval.spectrum_size);
        c.eval.spectrum_interval = get_or(e, "spectrum_interval", c.eval.spectrum_interval);
        c.eval.policy_episodes = get_or(e, "policy_episodes", c.eval.policy_episodes);
        c.eval.holdout_episodes_per_level =
            get_or(e, "holdout_episodes_per_level", c.eval.holdout_episodes_per_level);
    }
    c.validate();
    return c;
}

Json pipeline_config_to_json(const PipelineConfig& c) {
    Json demo = rl_to_json(c.demo.train);
    demo["count"] = c.demo.count;
    demo["stop_fraction"] = c.demo.stop_fraction;
    Json rl = rl_to_json(c.rl.train);
    rl["reward"] = c.rl.reward_path;
    return Json{
        {"env", c.env_id},
        {"seed", c.seed},
        {"seeds", c.seeds},
        {"generators", c.generators},
        {"learners", c.learners},
        {"out", c.out_dir},
        {"jobs", c.jobs},
        {"demos", c.demos_path},
        {"demo", demo},
        {"bc", Json{{"epochs", c.bc.epochs}, {"step_size", c.bc.step_size}}},
        {"airl",
         Json{{"train_steps", c.airl.train_steps},
              {"episodes_per_step", c.airl.episodes_per_step},
              {"discriminator_updates_per_step", c.airl.discriminator_updates_per_step},
              {"noisy", c.airl.noisy},
              {"noise_schedule", c.airl.noise_schedule},
              {"disc_batch", c.airl.disc_batch},
              {"disc_step_size", c.airl.disc_step_size},
              {"policy_step_size", c.airl.policy_step_size},
              {"entropy_weight", c.airl.entropy_weight},
              {"discount", c.airl.discount}}},
        {"noise",
         Json{{"levels", c.noise.levels},
              {"episodes_per_level", c.noise.episodes_per_level},
              {"generator", c.noise.generator},
              {"policy", c.noise.policy_path},
              {"reward", c.noise.reward_path}}},
        {"fit", Json{{"dataset", c.fit.dataset_path}}},
        {"ssrr",
         Json{{"snippet_len_min", c.ssrr.snippet_len_min},
              {"snippet_len_max", c.ssrr.snippet_len_max},
              {"snippets_per_epoch", c.ssrr.snippets_per_epoch},
              {"batch_size", c.ssrr.batch_size},
              {"epochs", c.ssrr.epochs},
              {"l2_weight", c.ssrr.l2_weight},
              {"step_size", c.ssrr.step_size},
              {"full_trajectories", c.ssrr.full_trajectories},
              {"dataset", c.ssrr_io.dataset_path},
              {"fit", c.ssrr_io.fit_path}}},
        {"drex",
         Json{{"snippet_len_min", c.drex.snippet_len_min},
              {"snippet_len_max", c.drex.snippet_len_max},
              {"pairs_per_epoch", c.drex.pairs_per_epoch},
              {"batch_size", c.drex.batch_size},
              {"epochs", c.drex.epochs},
              {"step_size", c.drex.step_size},
              {"dataset", c.drex_io.dataset_path}}},
        {"rl", rl},
        {"eval",
         Json{{"reward", c.eval.reward_path},
              {"dataset", c.eval.dataset_path},
              {"demos", c.eval.demos_path},
              {"policy", c.eval.policy_path},
              {"generator_policy", c.eval.generator_policy_path},
              {"generator_reward", c.eval.generator_reward_path},
              {"fit", c.eval.fit_path},
              {"spectrum", c.eval.spectrum_path},
              {"spectrum_size", c.eval.spectrum_size},
              {"spectrum_interval", c.eval.spectrum_interval},
              {"policy_episodes", c.eval.policy_episodes},
              {"holdout_episodes_per_level", c.eval.holdout_episodes_per_level}}},
    };
}

ArtifactMeta StageContext::meta(const std::string& stage, std::uint64_t seed) const {
    ArtifactMeta m;
    m.stage = stage;
    m.seed = seed;
    m.config_hash = config_hash;
    m.env_id = config.env_id;
    return m;
}

fs::path StageContext::resolve(const std::string& configured, const std::string& default_name) const {
    if (configured.empty()) return out_dir / default_name;
    fs::path p(configured);
    return p.is_absolute() ? p : out_dir / p;
}

// ---------------------------------------------------------------------------
// stage helpers

namespace {

Json require_artifact(const fs::path& path, const char* stage) {
    if (!fs::exists(path))
        throw std::invalid_argument(std::string(stage) + ": required input file does not exist: " +
                                    path.string());
    return read_artifact(path);
}

std::vector<Trajectory> demos_from_payload(const Json& payload, const MdpSpec& spec) {
    std::vector<Trajectory> demos;
    for (const auto& t : payload.at("demos")) demos.push_back(trajectory_from_json(t, spec));
    if (demos.empty()) throw std::invalid_argument("demos artifact holds no trajectories");
    return demos;
}

// uniform-random behavior: full-noise mixture over an arbitrary base
struct UniformPolicyHolder {
    std::unique_ptr<TrainablePolicy> base;
    std::unique_ptr<NoisyPolicy> uniform;

    UniformPolicyHolder(const Environment& env, std::uint64_t seed) {
        base = make_policy(env, seed);
        uniform = std::make_unique<NoisyPolicy>(env, *base, 1.0);
    }
};

} // namespace

std::vector<fs::path> run_demo_gen(const StageContext& ctx) {
    auto env = make_environment(ctx.config.env_id);
    std::uint64_t root = ctx.config.seed;

    RlConfig train = ctx.config.demo.train;
    train.seed = derive_seed(root, "demo-train");
    GroundTruthReward gt(*env);
    PgResult pg = pg_train(*env, gt, train);

    UniformPolicyHolder uniform(*env, derive_seed(root, "demo-uniform"));
    Rng baseline_rng(derive_seed(root, "demo-baseline"));
    double random_baseline = policy_eval(*uniform.uniform, *env, 100, baseline_rng).mean;

    // The stop scale is anchored to the training trace itself: its worst
    // checkpoint stands in for "untrained" (a fresh policy can already beat
    // uniform-random on some tasks).
    double best = *std::max_element(pg.eval_returns.begin(), pg.eval_returns.end());
    double floor = *std::min_element(pg.eval_returns.begin(), pg.eval_returns.end());
    double threshold = DemoStageConfig::stop_threshold(best, floor, ctx.config.demo.stop_fraction);

    // Demonstrations are successful-but-inefficient episodes. Scan the saved
    // checkpoints in training order; a candidate set is `count` task-completing
    // rollouts, accepted when its mean return lands in a band around the stop
    // threshold. If every checkpoint jumps over the band, the set closest to
    // the threshold wins.
    double frac = ctx.config.demo.stop_fraction;
    double band_lo = DemoStageConfig::stop_threshold(best, floor, std::max(0.05, frac - 0.15));
    double band_hi = DemoStageConfig::stop_threshold(best, floor, frac + 0.25);

    int count = ctx.config.demo.count;
    int chosen = -1;
    std::vector<Trajectory> demos;
    std::vector<Trajectory> fallback;
    int fallback_ckpt = -1;
    double fallback_gap = std::numeric_limits<double>::infinity();
    for (int c = 0; c < static_cast<int>(pg.checkpoints.size()); ++c) {
        std::vector<Trajectory> candidate;
        Rng roll_rng(derive_seed(root, "demo-roll", static_cast<std::uint64_t>(c)));
        for (int attempt = 0; attempt < count * 20 && static_cast<int>(candidate.size()) < count;
             ++attempt) {
            Trajectory traj = rollout(*env, *pg.checkpoints[c], roll_rng);
            if (env->trajectory_successful(traj)) candidate.push_back(std::move(traj));
        }
        if (static_cast<int>(candidate.size()) < count) continue;
        double mean = 0.0;
        for (const auto& traj : candidate) mean += gt.evaluator().trajectory_return(traj);
        mean /= static_cast<double>(count);
        if (mean >= band_lo && mean <= band_hi) {
            demos = std::move(candidate);
            chosen = c;
            break;
        }
        if (std::abs(mean - threshold) < fallback_gap) {
            fallback_gap = std::abs(mean - threshold);
            fallback = std::move(candidate);
            fallback_ckpt = c;
        }
    }
    if (demos.empty()) {
        demos = std::move(fallback);
        chosen = fallback_ckpt;
    }
    if (demos.empty())
        throw std::runtime_error("demo-gen: no checkpoint produced " + std::to_string(count) +
                                 " successful episodes");

    Json demo_array = Json::array();
    std::vector<double> returns;
    for (const auto& traj : demos) {
        returns.push_back(gt.evaluator().trajectory_return(traj));
        demo_array.push_back(trajectory_to_json(traj, env->spec()));
    }
    double mean_return = 0.0;
    for (double r : returns) mean_return += r;
    mean_return /= static_cast<double>(returns.size());

    Json payload{{"demos", demo_array},
                 {"returns", returns},
                 {"mean_return", mean_return},
                 {"random_baseline", random_baseline},
                 {"stop_threshold", threshold},
                 {"stop_band", Json{band_lo, band_hi}},
                 {"checkpoint_index", chosen},
                 {"checkpoint_iteration", (chosen + 1) * train.checkpoint_interval - 1}};
    fs::path out = ctx.out_dir / "demos.json";
    write_artifact(out, ctx.meta("demo-gen", root), payload);
    return {out};
}

std::vector<fs::path> run_bc(const StageContext& ctx) {
    auto env = make_environment(ctx.config.env_id);
    std::uint64_t root = ctx.config.seed;
    Json demos_payload = require_artifact(ctx.resolve(ctx.config.demos_path, "demos.json"), "bc");
    auto demos = demos_from_payload(demos_payload, env->spec());

    BcConfig cfg = ctx.config.bc;
    cfg.seed = derive_seed(root, "bc");
    auto policy = bc_train(*env, demos, cfg);
    double nll = mean_negative_log_likelihood(*policy, demos);

    Json payload{{"policy", policy_to_json(*policy)}, {"demo_nll", nll}};
    fs::path out = ctx.out_dir / "bc_policy.json";
    write_artifact(out, ctx.meta("bc", cfg.seed), payload);
    return {out};
}

std::vector<fs::path> run_airl_stage(const StageContext& ctx) {
    auto env = make_environment(ctx.config.env_id);
    std::uint64_t root = ctx.config.seed;
    Json demos_payload = require_artifact(ctx.resolve(ctx.config.demos_path, "demos.json"), "airl");
    auto demos = demos_from_payload(demos_payload, env->spec());

    AirlConfig cfg = ctx.config.airl;
    if (cfg.noisy && cfg.noise_schedule.empty())
        cfg.noise_schedule = AirlConfig::default_noise_schedule(cfg.episodes_per_step);
    cfg.seed = derive_seed(root, cfg.noisy ? "noisy-airl" : "airl");
    GroundTruthEvaluator gt(*env); // metrics column only
    AirlResult result = airl_train(demos, *env, cfg, &gt);

    std::string kind = cfg.noisy ? "noisy-airl-reward" : "airl-reward";
    fs::path reward_path = ctx.out_dir / "airl_reward.json";
    fs::path policy_path = ctx.out_dir / "airl_policy.json";
    write_artifact(reward_path, ctx.meta("airl", cfg.seed), reward_to_json(*result.reward, kind));
    write_artifact(policy_path, ctx.meta("airl", cfg.seed),
                   Json{{"policy", policy_to_json(*result.policy)}});

    fs::path metrics_path = ctx.out_dir / "airl_metrics.csv";
    {
        CsvWriter csv(metrics_path, ctx.meta("airl", cfg.seed),
                      {"step", "disc_loss", "mean_pseudo_return", "mean_gt_return"});
        for (const auto& row : result.metrics)
            csv.row({std::to_string(row.step), CsvWriter::num(row.disc_loss),
                     CsvWriter::num(row.mean_pseudo_return),
                     row.mean_gt_return ? CsvWriter::num(*row.mean_gt_return) : ""});
    }
    return {reward_path, policy_path, metrics_path};
}

std::vector<fs::path> run_noise_gen(const StageContext& ctx) {
    auto env = make_environment(ctx.config.env_id);
    std::uint64_t root = ctx.config.seed;
    const auto& ncfg = ctx.config.noise;

    std::string default_policy = ncfg.generator == "bc" ? "bc_policy.json" : "airl_policy.json";
    Json policy_payload = require_artifact(ctx.resolve(ncfg.policy_path, default_policy), "noise-gen");
    Json reward_payload = require_artifact(ctx.resolve(ncfg.reward_path, "airl_reward.json"), "noise-gen");
    auto policy = policy_from_json(policy_payload.at("policy"), *env);
    MlpReward reward = reward_from_json(reward_payload, *env);

    DatasetProvenance provenance;
    provenance.generator = ncfg.generator;
    provenance.seed = derive_seed(root, "noise-gen:" + ncfg.generator);
    provenance.env_id = ctx.config.env_id;

    Rng rng(provenance.seed);
    NoisyDataset ds = synthesize_dataset(reward, *policy, *env, default_noise_grid(ncfg.levels),
                                         ncfg.episodes_per_level, rng, provenance);

    fs::path out = ctx.out_dir / "noisy_dataset.json";
    write_artifact(out, ctx.meta("noise-gen", provenance.seed), dataset_to_json(ds, env->spec()));
    return {out};
}

std::vector<fs::path> run_fit(const StageContext& ctx) {
    auto env = make_environment(ctx.config.env_id);
    Json ds_payload =
        require_artifact(ctx.resolve(ctx.config.fit.dataset_path, "noisy_dataset.json"), "fit");
    NoisyDataset ds = dataset_from_json(ds_payload, env->spec());

    auto points = dataset_fit_points(ds);
    FitReport report = fit_sigmoid(points);
    report.source = provenance_signature(ds.provenance);

    fs::path fit_path = ctx.out_dir / "sigmoid_fit.json";
    write_artifact(fit_path, ctx.meta("fit", ds.provenance.seed), fit_report_to_json(report));

    std::sort(points.begin(), points.end(), [](const FitPoint& a, const FitPoint& b) {
        return a.x != b.x ? a.x < b.x : a.y < b.y;
    });
    fs::path csv_path = ctx.out_dir / "fit_points.csv";
    {
        CsvWriter csv(csv_path, ctx.meta("fit", ds.provenance.seed), {"eta", "y", "fitted"});
        for (const auto& p : points)
            csv.row({CsvWriter::num(p.x), CsvWriter::num(p.y),
                     CsvWriter::num(sigmoid_eval(report.params, p.x))});
    }
    return {fit_path, csv_path};
}

std::vector<fs::path> run_ssrr_stage(const StageContext& ctx) {
    auto env = make_environment(ctx.config.env_id);
    std::uint64_t root = ctx.config.seed;
    Json ds_payload =
        require_artifact(ctx.resolve(ctx.config.ssrr_io.dataset_path, "noisy_dataset.json"), "ssrr");
    Json fit_payload =
        require_artifact(ctx.resolve(ctx.config.ssrr_io.fit_path, "sigmoid_fit.json"), "ssrr");
    NoisyDataset ds = dataset_from_json(ds_payload, env->spec());
    FitReport fit = fit_report_from_json(fit_payload);

    SsrrConfig cfg = ctx.config.ssrr;
    cfg.seed = derive_seed(root, "ssrr:" + ds.provenance.generator);
    SsrrResult result = ssrr_train(ds, fit, *env, cfg);

    fs::path reward_path = ctx.out_dir / "ssrr_reward.json";
    Json reward_json = reward_to_json(*result.reward, "ssrr-reward");
    reward_json["provenance"] = provenance_signature(ds.provenance);
    write_artifact(reward_path, ctx.meta("ssrr", cfg.seed), reward_json);

    fs::path loss_path = ctx.out_dir / "ssrr_loss.csv";
    {
        CsvWriter csv(loss_path, ctx.meta("ssrr", cfg.seed), {"epoch", "loss"});
        for (std::size_t i = 0; i < result.epoch_loss.size(); ++i)
            csv.row({std::to_string(i), CsvWriter::num(result.epoch_loss[i])});
    }
    return {reward_path, loss_path};
}

std::vector<fs::path> run_drex_stage(const StageContext& ctx) {
    auto env = make_environment(ctx.config.env_id);
    std::uint64_t root = ctx.config.seed;
    Json ds_payload =
        require_artifact(ctx.resolve(ctx.config.drex_io.dataset_path, "noisy_dataset.json"), "drex");
    NoisyDataset ds = dataset_from_json(ds_payload, env->spec());

    DrexConfig cfg = ctx.config.drex;
    cfg.seed = derive_seed(root, "drex:" + ds.provenance.generator);
    DrexResult result = drex_train(ds, *env, cfg);

    fs::path reward_path = ctx.out_dir / "drex_reward.json";
    Json reward_json = reward_to_json(*result.reward, "drex-reward");
    reward_json["provenance"] = provenance_signature(ds.provenance);
    write_artifact(reward_path, ctx.meta("drex", cfg.seed), reward_json);

    fs::path loss_path = ctx.out_dir / "drex_loss.csv";
    {
        CsvWriter csv(loss_path, ctx.meta("drex", cfg.seed), {"epoch", "loss"});
        for (std::size_t i = 0; i < result.epoch_loss.size(); ++i)
            csv.row({std::to_string(i), CsvWriter::num(result.epoch_loss[i])});
    }
    return {reward_path, loss_path};
}

std::vector<fs::path> run_rl(const StageContext& ctx) {
    auto env = make_environment(ctx.config.env_id);
    std::uint64_t root = ctx.config.seed;
    Json reward_payload =
        require_artifact(ctx.resolve(ctx.config.rl.reward_path, "ssrr_reward.json"), "rl");
    MlpReward reward = reward_from_json(reward_payload, *env);

    RlConfig cfg = ctx.config.rl.train;
    cfg.seed = derive_seed(root, "rl");
    PgResult pg = pg_train(*env, reward, cfg);

    fs::path policy_path = ctx.out_dir / "rl_policy.json";
    write_artifact(policy_path, ctx.meta("rl", cfg.seed),
                   Json{{"policy", policy_to_json(*pg.policy)},
                        {"best_iteration", pg.best_iteration},
                        {"reward_kind", reward_kind(reward_payload)}});

    fs::path metrics_path = ctx.out_dir / "rl_metrics.csv";
    {
        CsvWriter csv(metrics_path, ctx.meta("rl", cfg.seed), {"iteration", "eval_model_return"});
        for (std::size_t i = 0; i < pg.eval_returns.size(); ++i)
            csv.row({std::to_string(i), CsvWriter::num(pg.eval_returns[i])});
    }
    return {policy_path, metrics_path};
}

std::vector<fs::path> run_eval(const StageContext& ctx) {
    auto env = make_environment(ctx.config.env_id);
    std::uint64_t root = ctx.config.seed;
    const auto& ecfg = ctx.config.eval;

    Json reward_payload = require_artifact(ctx.resolve(ecfg.reward_path, "ssrr_reward.json"), "eval");
    MlpReward reward = reward_from_json(reward_payload, *env);
    Json ds_payload = require_artifact(ctx.resolve(ecfg.dataset_path, "noisy_dataset.json"), "eval");
    NoisyDataset ds = dataset_from_json(ds_payload, env->spec());

    GroundTruthEvaluator gt(*env);
    EvalReport report;

    // training spectrum: the synthesized noisy trajectories
    TrajectorySpectrum train;
    train.provenance = "noise-spectrum";
    for (const auto& nt : ds.trajectories) {
        train.trajectories.push_back(nt.traj);
        train.gt_returns.push_back(gt.trajectory_return(nt.traj));
    }
    report.pearson_train = correlation_report(reward, train);

    // test spectrum: load if staged, otherwise build from checkpoints
    TrajectorySpectrum test;
    fs::path spectrum_path = ctx.resolve(ecfg.spectrum_path, "spectrum.json");
    if (fs::exists(spectrum_path)) {
        test = spectrum_from_json(read_artifact(spectrum_path), env->spec());
    } else {
        test = build_checkpoint_spectrum(*env, ecfg.spectrum_size, derive_seed(root, "eval-spectrum"),
                                         ecfg.spectrum_interval);
    }
    report.pearson_test = correlation_report(reward, test);

    {
        std::vector<double> xs, ys;
        auto add = [&](const TrajectorySpectrum& s) {
            for (std::size_t i = 0; i < s.trajectories.size(); ++i) {
                xs.push_back(learned_return(reward, s.trajectories[i]));
                ys.push_back(s.gt_returns[i]);
            }
        };
        add(train);
        add(test);
        report.pearson_pooled = pearson(xs, ys);
    }

    // ranking accuracy on freshly rolled noisy trajectories, when the
    // generating policy is available to roll them
    {
        std::string default_policy =
            ds.provenance.generator == "bc" ? "bc_policy.json" : "airl_policy.json";
        fs::path gen_policy_path = ctx.resolve(ecfg.generator_policy_path, default_policy);
        fs::path gen_reward_path = ctx.resolve(ecfg.generator_reward_path, "airl_reward.json");
        if (fs::exists(gen_policy_path) && fs::exists(gen_reward_path)) {
            auto gen_policy = policy_from_json(read_artifact(gen_policy_path).at("policy"), *env);
            MlpReward gen_reward = reward_from_json(read_artifact(gen_reward_path), *env);
            DatasetProvenance holdout_prov{ds.provenance.generator + "-holdout",
                                           derive_seed(root, "eval-holdout"), ctx.config.env_id};
            Rng holdout_rng(holdout_prov.seed);
            NoisyDataset holdout =
                synthesize_dataset(gen_reward, *gen_policy, *env, ds.noise_grid,
                                   ecfg.holdout_episodes_per_level, holdout_rng, holdout_prov);
            report.ranking_accuracy = ranking_accuracy(reward, holdout);
        }
    }

    // policy quality block, when a trained policy artifact is available
    fs::path policy_path = ctx.resolve(ecfg.policy_path, "rl_policy.json");
    fs::path demos_path = ctx.resolve(ecfg.demos_path, "demos.json");
    if (fs::exists(policy_path) && fs::exists(demos_path)) {
        Json policy_payload = read_artifact(policy_path);
        auto policy = policy_from_json(policy_payload.at("policy"), *env);
        Rng eval_rng(derive_seed(root, "eval-policy"));
        PolicyEvalResult pe = policy_eval(*policy, *env, ecfg.policy_episodes, eval_rng);
        report.policy_mean_return = pe.mean;
        report.policy_std_return = pe.stddev;

        Json demos_payload = read_artifact(demos_path);
        double demo_mean = demos_payload.at("mean_return").get<double>();
        report.demo_mean_return = demo_mean;
        if (demo_mean != 0.0) report.improvement_ratio = pe.mean / demo_mean;
        if (demo_mean > 0.0 && pe.mean > 0.0)
            report.improvement_factor = pe.mean / demo_mean;
        else if (demo_mean < 0.0 && pe.mean < 0.0)
            report.improvement_factor = demo_mean / pe.mean;

        UniformPolicyHolder uniform(*env, derive_seed(root, "eval-uniform"));
        Rng baseline_rng(derive_seed(root, "eval-baseline"));
        report.random_baseline_return =
            policy_eval(*uniform.uniform, *env, ecfg.policy_episodes, baseline_rng).mean;
    }

    std::vector<fs::path> written;
    fs::path report_path = ctx.out_dir / "eval_report.json";
    write_artifact(report_path, ctx.meta("eval", root), eval_report_to_json(report));
    written.push_back(report_path);

    // Noise-performance curve export: per-level mean hidden return plus the
    // fitted curve when a fit artifact is present.
    {
        std::optional<FitReport> fit;
        fs::path fit_path = ctx.resolve(ecfg.fit_path, "sigmoid_fit.json");
        if (fs::exists(fit_path)) fit = fit_report_from_json(read_artifact(fit_path));

        std::map<double, std::pair<double, int>> by_level;
        for (const auto& nt : ds.trajectories) {
            auto& acc = by_level[nt.eta];
            acc.first += gt.trajectory_return(nt.traj);
            acc.second += 1;
        }
        fs::path curve_path = ctx.out_dir / "noise_curve.csv";
        CsvWriter csv(curve_path, ctx.meta("eval", root), {"eta", "mean_gt_return", "sigmoid_fit"});
        for (const auto& [eta, acc] : by_level)
            csv.row({CsvWriter::num(eta), CsvWriter::num(acc.first / acc.second),
                     fit ? CsvWriter::num(sigmoid_eval(fit->params, eta)) : ""});
        written.push_back(curve_path);
    }

    {
        fs::path scatter_path = ctx.out_dir / "correlation_points.csv";
        CsvWriter csv(scatter_path, ctx.meta("eval", root), {"gt_return", "learned_return", "split"});
        for (const auto& p : correlation_scatter(reward, train, test))
            csv.row({CsvWriter::num(p.gt_return), CsvWriter::num(p.learned_return), p.split});
        written.push_back(scatter_path);
    }
    return written;
}

std::vector<fs::path> run_stage(const std::string& stage, const StageContext& ctx) {
    if (stage == "demo-gen") return run_demo_gen(ctx);
    if (stage == "bc") return run_bc(ctx);
    if (stage == "airl") return run_airl_stage(ctx);
    if (stage == "noise-gen") return run_noise_gen(ctx);
    if (stage == "fit") return run_fit(ctx);
    if (stage == "ssrr") return run_ssrr_stage(ctx);
    if (stage == "drex") return run_drex_stage(ctx);
    if (stage == "rl") return run_rl(ctx);
    if (stage == "eval") return run_eval(ctx);
    throw std::invalid_argument("unknown stage: " + stage);
}

// ---------------------------------------------------------------------------
// full grid

namespace {

StageContext cell_context(const StageContext& base, std::uint64_t seed, const fs::path& out_dir) {
    StageContext ctx = base;
    ctx.config.seed = seed;
    ctx.out_dir = out_dir;
    return ctx;
}

// One (seed, generator) group: generator artifacts, then every learner cell.
std::vector<CellResult> run_grid_group(const StageContext& base, std::uint64_t seed,
                                       const std::string& generator, const fs::path& seed_dir) {
    const auto& config = base.config;
    fs::path gen_dir = seed_dir / generator;
    std::string demos = (seed_dir / "demos.json").string();

    std::vector<CellResult> cells;
    bool generator_ok = true;
    std::string generator_error;
    try {
        StageContext gen_ctx = cell_context(base, seed, gen_dir);
        gen_ctx.config.demos_path = demos;
        if (generator == "bc") {
            run_bc(gen_ctx);
            gen_ctx.config.airl.noisy = false; // standard variant scores the rollouts
            run_airl_stage(gen_ctx);
        } else {
            gen_ctx.config.airl.noisy = generator == "noisy-airl";
            run_airl_stage(gen_ctx);
        }
        gen_ctx.config.noise.generator = generator;
        run_noise_gen(gen_ctx);
        run_fit(gen_ctx);
    } catch (const std::exception& e) {
        generator_ok = false;
        generator_error = e.what();
    }

    for (const auto& learner : config.learners) {
        CellResult cell;
        cell.seed = seed;
        cell.generator = generator;
        cell.learner = learner;
        if (!generator_ok) {
            cell.error = "generator stage failed: " + generator_error;
            cells.push_back(cell);
            continue;
        }
        fs::path cell_dir = gen_dir / learner;
        try {
            StageContext learner_ctx = cell_context(base, seed, cell_dir);
            learner_ctx.config.ssrr_io.dataset_path = (gen_dir / "noisy_dataset.json").string();
            learner_ctx.config.ssrr_io.fit_path = (gen_dir / "sigmoid_fit.json").string();
            learner_ctx.config.drex_io.dataset_path = (gen_dir / "noisy_dataset.json").string();
            if (learner == "ssrr")
                run_ssrr_stage(learner_ctx);
            else
                run_drex_stage(learner_ctx);

            StageContext eval_ctx = learner_ctx;
            eval_ctx.config.eval.reward_path =
                (cell_dir / (learner == "ssrr" ? "ssrr_reward.json" : "drex_reward.json")).string();
            eval_ctx.config.eval.dataset_path = (gen_dir / "noisy_dataset.json").string();
            eval_ctx.config.eval.demos_path = demos;
            eval_ctx.config.eval.fit_path = (gen_dir / "sigmoid_fit.json").string();
            eval_ctx.config.eval.spectrum_path = (seed_dir / "spectrum.json").string();
            eval_ctx.config.eval.generator_policy_path =
                (gen_dir / (generator == "bc" ? "bc_policy.json" : "airl_policy.json")).string();
            eval_ctx.config.eval.generator_reward_path = (gen_dir / "airl_reward.json").string();
            run_eval(eval_ctx);

            Json report = read_artifact(cell_dir / "eval_report.json");
            cell.ok = true;
            cell.pearson_train = report.at("pearson_train").get<double>();
            cell.pearson_test = report.at("pearson_test").get<double>();
            cell.ranking_accuracy = report.at("ranking_accuracy").get<double>();
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
        cells.push_back(cell);
    }
    return cells;
}

} // namespace

PipelineSummary run_pipeline(const StageContext& ctx) {
    PipelineSummary summary;
    const PipelineConfig& config = ctx.config;
    fs::path root = ctx.out_dir / config.env_id;

    // per-seed shared artifacts: demonstrations and the test spectrum
    for (std::uint64_t seed : config.seeds) {
        fs::path seed_dir = root / ("seed" + std::to_string(seed));
        StageContext demo_ctx = cell_context(ctx, seed, seed_dir);
        auto files = run_demo_gen(demo_ctx);
        summary.files.insert(summary.files.end(), files.begin(), files.end());

        auto env = make_environment(config.env_id);
        TrajectorySpectrum spectrum = build_checkpoint_spectrum(
            *env, config.eval.spectrum_size, derive_seed(seed, "eval-spectrum"),
            config.eval.spectrum_interval);
        fs::path spectrum_path = seed_dir / "spectrum.json";
        write_artifact(spectrum_path, demo_ctx.meta("spectrum", derive_seed(seed, "eval-spectrum")),
                       spectrum_to_json(spectrum, env->spec()));
        summary.files.push_back(spectrum_path);
    }

    // (seed, generator) groups are independent; run up to `jobs` at a time
    struct Group {
        std::uint64_t seed;
        std::string generator;
        fs::path seed_dir;
    };
    std::vector<Group> groups;
    for (std::uint64_t seed : config.seeds)
        for (const auto& generator : config.generators)
            groups.push_back({seed, generator, root / ("seed" + std::to_string(seed))});

    std::vector<std::vector<CellResult>> group_cells(groups.size());
    std::size_t next = 0;
    while (next < groups.size()) {
        std::size_t batch = std::min<std::size_t>(config.jobs, groups.size() - next);
        std::vector<std::future<std::vector<CellResult>>> futures;
        for (std::size_t b = 0; b < batch; ++b) {
            const Group& g = groups[next + b];
            futures.push_back(std::async(batch > 1 ? std::launch::async : std::launch::deferred,
                                         [&ctx, g] {
                                             return run_grid_group(ctx, g.seed, g.generator, g.seed_dir);
                                         }));
        }
        for (std::size_t b = 0; b < batch; ++b) group_cells[next + b] = futures[b].get();
        next += batch;
    }
    for (auto& cells : group_cells)
        summary.cells.insert(summary.cells.end(), cells.begin(), cells.end());

    // summary CSVs + policy training on the best-correlated cell per
    // (generator, learner)
    ArtifactMeta meta = ctx.meta("pipeline", config.seeds.front());

    {
        CsvWriter csv(ctx.out_dir / "summary_correlation.csv", meta,
                      {"generator", "learner", "seeds_ok", "mean_pearson_test", "std_pearson_test",
                       "mean_pearson_train", "std_pearson_train", "mean_ranking_accuracy",
                       "std_ranking_accuracy", "status"});
        for (const auto& generator : config.generators) {
            for (const auto& learner : config.learners) {
                std::vector<const CellResult*> cells;
                for (const auto& c : summary.cells)
                    if (c.generator == generator && c.learner == learner && c.ok) cells.push_back(&c);
                auto stats = [&](auto getter) {
                    double mean = 0.0, sd = 0.0;
                    for (const auto* c : cells) mean += getter(*c);
                    if (!cells.empty()) mean /= static_cast<double>(cells.size());
                    for (const auto* c : cells) sd += (getter(*c) - mean) * (getter(*c) - mean);
                    if (!cells.empty()) sd = std::sqrt(sd / static_cast<double>(cells.size()));
                    return std::pair<double, double>(mean, sd);
                };
                auto [mt, st] = stats([](const CellResult& c) { return c.pearson_test; });
                auto [mtr, str] = stats([](const CellResult& c) { return c.pearson_train; });
                auto [mr, sr] = stats([](const CellResult& c) { return c.ranking_accuracy; });
                csv.row({generator, learner, std::to_string(cells.size()), CsvWriter::num(mt),
                         CsvWriter::num(st), CsvWriter::num(mtr), CsvWriter::num(str),
                         CsvWriter::num(mr), CsvWriter::num(sr),
                         cells.size() == config.seeds.size() ? "ok" : "failed-cells"});
            }
        }
        summary.files.push_back(ctx.out_dir / "summary_correlation.csv");
    }

    {
        CsvWriter csv(ctx.out_dir / "summary_policy.csv", meta,
                      {"generator", "learner", "best_seed", "demo_mean_return", "policy_mean_return",
                       "policy_std_return", "improvement_pct", "improvement_factor_pct", "status"});
        for (const auto& generator : config.generators) {
            for (const auto& learner : config.learners) {
                const CellResult* best = nullptr;
                for (const auto& c : summary.cells)
                    if (c.generator == generator && c.learner == learner && c.ok)
                        if (!best || c.pearson_test > best->pearson_test) best = &c;
                if (!best) {
                    csv.row({generator, learner, "", "", "", "", "", "", "failed"});
                    continue;
                }
                try {
                    fs::path seed_dir = root / ("seed" + std::to_string(best->seed));
                    fs::path cell_dir = seed_dir / generator / learner;
                    StageContext rl_ctx = cell_context(ctx, best->seed, cell_dir);
                    rl_ctx.config.rl.reward_path =
                        (cell_dir / (learner == "ssrr" ? "ssrr_reward.json" : "drex_reward.json")).string();
                    run_rl(rl_ctx);

                    StageContext eval_ctx = cell_context(ctx, best->seed, cell_dir);
                    eval_ctx.config.eval.reward_path = rl_ctx.config.rl.reward_path;
                    eval_ctx.config.eval.dataset_path =
                        (seed_dir / generator / "noisy_dataset.json").string();
                    eval_ctx.config.eval.demos_path = (seed_dir / "demos.json").string();
                    eval_ctx.config.eval.fit_path = (seed_dir / generator / "sigmoid_fit.json").string();
                    eval_ctx.config.eval.spectrum_path = (seed_dir / "spectrum.json").string();
                    eval_ctx.config.eval.generator_policy_path =
                        (seed_dir / generator / (generator == "bc" ? "bc_policy.json" : "airl_policy.json"))
                            .string();
                    eval_ctx.config.eval.generator_reward_path =
                        (seed_dir / generator / "airl_reward.json").string();
                    eval_ctx.config.eval.policy_path = (cell_dir / "rl_policy.json").string();
                    run_eval(eval_ctx);

                    Json report = read_artifact(cell_dir / "eval_report.json");
                    double demo_mean = report.at("demo_mean_return").get<double>();
                    double policy_mean = report.at("policy_mean_return").get<double>();
                    double policy_std = report.at("policy_std_return").get<double>();
                    const Json& ratio = report.at("improvement_ratio");
                    const Json& norm = report.at("improvement_factor");
                    csv.row({generator, learner, std::to_string(best->seed), CsvWriter::num(demo_mean),
                             CsvWriter::num(policy_mean), CsvWriter::num(policy_std),
                             ratio.is_null() ? "" : CsvWriter::num(ratio.get<double>() * 100.0),
                             norm.is_null() ? "" : CsvWriter::num(norm.get<double>() * 100.0), "ok"});
                } catch (const std::exception& e) {
                    csv.row({generator, learner, std::to_string(best->seed), "", "", "", "", "",
                             std::string("failed: ") + e.what()});
                }
            }
        }
        summary.files.push_back(ctx.out_dir / "summary_policy.csv");
    }

    return summary;
}

} // namespace slfd
