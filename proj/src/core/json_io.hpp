#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "airl.hpp"
#include "drex.hpp"
#include "eval.hpp"
#include "noise.hpp"
#include "policy.hpp"
#include "sigmoid.hpp"
#include "ssrr.hpp"

namespace slfd {

inline constexpr const char* kVersion = "v0.1.0";

using Json = nlohmann::json;

// Stamp embedded in every artifact file so the provenance chain of a run can
// be verified end to end.
struct ArtifactMeta {
    std::string stage;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string version = kVersion;
    std::string env_id;
};

Json meta_to_json(const ArtifactMeta& meta);
ArtifactMeta meta_from_json(const Json& j);

// FNV-1a hex digest of the canonical (sorted-key) dump of a config object.
std::string config_hash(const Json& config);

// approximator checkpoint: {widths, activation, params}
Json mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const Json& j);

// {kind, ...payload}; kind in {tabular-softmax, gaussian-mlp}
Json policy_to_json(const TrainablePolicy& policy);
std::unique_ptr<TrainablePolicy> policy_from_json(const Json& j, const Environment& env);

// {kind, uses_action, mlp}; kind tags the producing stage
Json reward_to_json(const MlpReward& reward, const std::string& kind);
MlpReward reward_from_json(const Json& j, const Environment& env);
std::string reward_kind(const Json& j);

// {states, actions}; discrete entries as integers, continuous as arrays
Json trajectory_to_json(const Trajectory& traj, const MdpSpec& spec);
Trajectory trajectory_from_json(const Json& j, const MdpSpec& spec);

Json dataset_to_json(const NoisyDataset& ds, const MdpSpec& spec);
NoisyDataset dataset_from_json(const Json& j, const MdpSpec& spec);

Json fit_report_to_json(const FitReport& fit);
FitReport fit_report_from_json(const Json& j);

Json eval_report_to_json(const EvalReport& report);

Json spectrum_to_json(const TrajectorySpectrum& spectrum, const MdpSpec& spec);
TrajectorySpectrum spectrum_from_json(const Json& j, const MdpSpec& spec);

// Envelope helpers: {"meta": {...}, "payload": {...}}
void write_artifact(const std::filesystem::path& path, const ArtifactMeta& meta, const Json& payload);
Json read_artifact(const std::filesystem::path& path, ArtifactMeta* meta_out = nullptr);

// CSV files carry the same stamp as a leading comment line, then a fixed
// header row.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const ArtifactMeta& meta,
              const std::vector<std::string>& columns);
    ~CsvWriter();
    void row(const std::vector<std::string>& cells);
    static std::string num(double v);

private:
    std::string buffer_;
    std::filesystem::path path_;
    std::size_t columns_;
};

} // namespace slfd
