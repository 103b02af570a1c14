#include "json_io.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace slfd {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("artifact parse error: " + what);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

Json meta_to_json(const ArtifactMeta& meta) {
    return Json{{"stage", meta.stage},
                {"seed", meta.seed},
                {"config_hash", meta.config_hash},
                {"version", meta.version},
                {"env", meta.env_id}};
}

ArtifactMeta meta_from_json(const Json& j) {
    ArtifactMeta meta;
    meta.stage = j.at("stage").get<std::string>();
    meta.seed = j.at("seed").get<std::uint64_t>();
    meta.config_hash = j.at("config_hash").get<std::string>();
    meta.version = j.at("version").get<std::string>();
    meta.env_id = j.at("env").get<std::string>();
    return meta;
}

std::string config_hash(const Json& config) {
    return hex64(fnv1a64(config.dump()));
}

// ---------------------------------------------------------------------------

Json mlp_to_json(const Mlp& net) {
    return Json{{"widths", net.widths()},
                {"activation", activation_name(net.activation())},
                {"params", net.params()}};
}

Mlp mlp_from_json(const Json& j) {
    Mlp net(j.at("widths").get<std::vector<int>>(),
            activation_from_name(j.at("activation").get<std::string>()));
    auto params = j.at("params").get<std::vector<double>>();
    require(params.size() == static_cast<std::size_t>(net.param_count()),
            "mlp params length does not match widths");
    net.params() = std::move(params);
    return net;
}

Json policy_to_json(const TrainablePolicy& policy) {
    if (policy.kind() == "tabular-softmax") {
        const auto& tab = dynamic_cast<const TabularSoftmaxPolicy&>(policy);
        return Json{{"kind", tab.kind()},
                    {"state_count", tab.state_count()},
                    {"action_count", tab.action_count()},
                    {"params", tab.params()}};
    }
    const auto& gauss = dynamic_cast<const GaussianMlpPolicy&>(policy);
    std::vector<double> log_std(gauss.params().end() - gauss.action_dim(), gauss.params().end());
    Mlp mean = gauss.mean_net();
    std::copy(gauss.params().begin(), gauss.params().end() - gauss.action_dim(),
              mean.params().begin());
    return Json{{"kind", gauss.kind()}, {"mlp", mlp_to_json(mean)}, {"log_std", log_std}};
}

std::unique_ptr<TrainablePolicy> policy_from_json(const Json& j, const Environment& env) {
    auto kind = j.at("kind").get<std::string>();
    if (kind == "tabular-softmax") {
        auto policy = std::make_unique<TabularSoftmaxPolicy>(j.at("state_count").get<int>(),
                                                             j.at("action_count").get<int>());
        auto params = j.at("params").get<std::vector<double>>();
        require(params.size() == policy->params().size(), "tabular policy params size mismatch");
        policy->params() = std::move(params);
        return policy;
    }
    if (kind == "gaussian-mlp") {
        return std::make_unique<GaussianMlpPolicy>(
            env, mlp_from_json(j.at("mlp")), j.at("log_std").get<std::vector<double>>());
    }
    throw std::invalid_argument("unknown policy kind: " + kind);
}

Json reward_to_json(const MlpReward& reward, const std::string& kind) {
    return Json{{"kind", kind},
                {"uses_action", reward.uses_action()},
                {"mlp", mlp_to_json(reward.net())}};
}

MlpReward reward_from_json(const Json& j, const Environment& env) {
    return MlpReward(env, mlp_from_json(j.at("mlp")), j.at("uses_action").get<bool>());
}

std::string reward_kind(const Json& j) {
    return j.at("kind").get<std::string>();
}

// ---------------------------------------------------------------------------

namespace {

Json encode_vector(const std::vector<double>& v, bool discrete) {
    if (!discrete) return Json(v);
    return Json(static_cast<long long>(v.at(0)));
}

std::vector<double> decode_vector(const Json& j, bool discrete, int dim) {
    if (discrete) {
        require(j.is_number_integer(), "expected integer for discrete entry");
        return {static_cast<double>(j.get<long long>())};
    }
    auto v = j.get<std::vector<double>>();
    require(v.size() == static_cast<std::size_t>(dim), "vector entry dimension mismatch");
    return v;
}

} // namespace

Json trajectory_to_json(const Trajectory& traj, const MdpSpec& spec) {
    bool discrete_states = spec.state_count > 0;
    bool discrete_actions = spec.action_kind == ActionKind::Discrete;
    Json states = Json::array();
    for (const auto& s : traj.states) states.push_back(encode_vector(s, discrete_states));
    Json actions = Json::array();
    for (const auto& a : traj.actions) actions.push_back(encode_vector(a, discrete_actions));
    return Json{{"states", states}, {"actions", actions}};
}

Trajectory trajectory_from_json(const Json& j, const MdpSpec& spec) {
    bool discrete_states = spec.state_count > 0;
    bool discrete_actions = spec.action_kind == ActionKind::Discrete;
    Trajectory traj;
    for (const auto& s : j.at("states")) traj.states.push_back(decode_vector(s, discrete_states, spec.state_dim));
    for (const auto& a : j.at("actions")) traj.actions.push_back(decode_vector(a, discrete_actions, spec.action_dim));
    require(traj.states.size() == traj.actions.size() + 1, "trajectory shape invalid");
    return traj;
}

Json dataset_to_json(const NoisyDataset& ds, const MdpSpec& spec) {
    Json trajectories = Json::array();
    for (const auto& nt : ds.trajectories) {
        Json t = trajectory_to_json(nt.traj, spec);
        t["eta"] = nt.eta;
        t["initial_rewards"] = nt.initial_rewards;
        trajectories.push_back(std::move(t));
    }
    return Json{{"provenance",
                 Json{{"generator", ds.provenance.generator},
                      {"seed", ds.provenance.seed},
                      {"env", ds.provenance.env_id}}},
                {"noise_grid", ds.noise_grid},
                {"trajectories", trajectories}};
}

NoisyDataset dataset_from_json(const Json& j, const MdpSpec& spec) {
    NoisyDataset ds;
    const Json& p = j.at("provenance");
    ds.provenance.generator = p.at("generator").get<std::string>();
    ds.provenance.seed = p.at("seed").get<std::uint64_t>();
    ds.provenance.env_id = p.at("env").get<std::string>();
    ds.noise_grid = j.at("noise_grid").get<std::vector<double>>();
    for (const auto& t : j.at("trajectories")) {
        NoisyTrajectory nt;
        nt.eta = t.at("eta").get<double>();
        nt.traj = trajectory_from_json(t, spec);
        nt.initial_rewards = t.at("initial_rewards").get<std::vector<double>>();
        ds.trajectories.push_back(std::move(nt));
    }
    ds.validate();
    return ds;
}

Json fit_report_to_json(const FitReport& fit) {
    return Json{{"params", Json{{"c", fit.params.c}, {"k", fit.params.k},
                                {"x0", fit.params.x0}, {"y0", fit.params.y0}}},
                {"r_squared", fit.r_squared},
                {"residuals", fit.residuals},
                {"n_points", fit.n_points},
                {"degenerate", fit.degenerate},
                {"source", fit.source}};
}

FitReport fit_report_from_json(const Json& j) {
    FitReport fit;
    const Json& p = j.at("params");
    fit.params = {p.at("c").get<double>(), p.at("k").get<double>(),
                  p.at("x0").get<double>(), p.at("y0").get<double>()};
    fit.r_squared = j.at("r_squared").get<double>();
    fit.residuals = j.at("residuals").get<std::vector<double>>();
    fit.n_points = j.at("n_points").get<int>();
    fit.degenerate = j.at("degenerate").get<bool>();
    fit.source = j.at("source").get<std::string>();
    return fit;
}

Json eval_report_to_json(const EvalReport& report) {
    Json j = Json::object();
    auto put = [&j](const char* key, const std::optional<double>& v) {
        j[key] = v ? Json(*v) : Json(nullptr);
    };
    put("pearson_train", report.pearson_train);
    put("pearson_test", report.pearson_test);
    put("pearson_pooled", report.pearson_pooled);
    put("ranking_accuracy", report.ranking_accuracy);
    put("policy_mean_return", report.policy_mean_return);
    put("policy_std_return", report.policy_std_return);
    put("demo_mean_return", report.demo_mean_return);
    put("improvement_ratio", report.improvement_ratio);
    put("improvement_factor", report.improvement_factor);
    put("random_baseline_return", report.random_baseline_return);
    return j;
}

Json spectrum_to_json(const TrajectorySpectrum& spectrum, const MdpSpec& spec) {
    Json trajectories = Json::array();
    for (const auto& t : spectrum.trajectories) trajectories.push_back(trajectory_to_json(t, spec));
    return Json{{"provenance", spectrum.provenance},
                {"gt_returns", spectrum.gt_returns},
                {"trajectories", trajectories}};
}

TrajectorySpectrum spectrum_from_json(const Json& j, const MdpSpec& spec) {
    TrajectorySpectrum spectrum;
    spectrum.provenance = j.at("provenance").get<std::string>();
    spectrum.gt_returns = j.at("gt_returns").get<std::vector<double>>();
    for (const auto& t : j.at("trajectories"))
        spectrum.trajectories.push_back(trajectory_from_json(t, spec));
    spectrum.validate();
    return spectrum;
}

// ---------------------------------------------------------------------------

void write_artifact(const std::filesystem::path& path, const ArtifactMeta& meta, const Json& payload) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    Json j{{"meta", meta_to_json(meta)}, {"payload", payload}};
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Json read_artifact(const std::filesystem::path& path, ArtifactMeta* meta_out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open artifact: " + path.string());
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("invalid JSON in " + path.string() + ": " + e.what());
    }
    if (!j.contains("meta") || !j.contains("payload"))
        throw std::runtime_error("artifact missing meta/payload envelope: " + path.string());
    if (meta_out) *meta_out = meta_from_json(j.at("meta"));
    return j.at("payload");
}

// ---------------------------------------------------------------------------

CsvWriter::CsvWriter(const std::filesystem::path& path, const ArtifactMeta& meta,
                     const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
    buffer_ += "# stage=" + meta.stage + ",seed=" + std::to_string(meta.seed) +
               ",config_hash=" + meta.config_hash + ",version=" + meta.version +
               ",env=" + meta.env_id + "\n";
    for (std::size_t i = 0; i < columns.size(); ++i) {
        buffer_ += columns[i];
        buffer_ += i + 1 < columns.size() ? ',' : '\n';
    }
}

void CsvWriter::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::invalid_argument("CsvWriter: column count mismatch");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        buffer_ += cells[i];
        buffer_ += i + 1 < cells.size() ? ',' : '\n';
    }
}

std::string CsvWriter::num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

CsvWriter::~CsvWriter() {
    try {
        std::filesystem::create_directories(path_.parent_path().empty() ? "." : path_.parent_path());
        std::ofstream out(path_, std::ios::binary | std::ios::trunc);
        out << buffer_;
    } catch (...) {
        // destructor must not throw
    }
}

} // namespace slfd
