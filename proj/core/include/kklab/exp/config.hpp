#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kklab/effects/eval.hpp"
#include "kklab/puzzle/dataset.hpp"
#include "kklab/task/kk_task.hpp"
#include "kklab/train/config.hpp"

namespace kklab::exp {

inline constexpr const char* kToolVersion = "kklab 0.1.0";
inline constexpr const char* kOutputRootEnv = "KKLAB_OUT_ROOT";

// resolves a relative path under the output-root override when it is set
std::filesystem::path resolve_output_path(const std::filesystem::path& path);

struct DatasetConfig {
    std::vector<puzzle::DatasetSlice> slices;
    bool fixed_names = true;
    int max_depth = 2;
    int max_atoms = 2;
};

struct PolicyConfig {
    policy::PolicyKind kind = policy::PolicyKind::Tabular;
    int context_order = 3;
};

struct PretrainConfig {
    int targets_per_prompt = 8;  // randomized-answer format targets
    train::SFTConfig sft;
};

struct RLStageConfig {
    train::RLConfig rl;
    int steps = 300;
    int checkpoint_every = 50;
};

struct RedistillStageConfig {
    int samples_per_prompt = 64;
    int l_filter = 0;  // 0: use the task l_max
    double temperature = 1.0;
};

struct EvalConfig {
    bool exact = false;
    int samples_per_prompt = 2000;
};

struct AnalysisConfig {
    int interp_points = 21;
    double position_q = 0.01;
    int rollouts_per_checkpoint = 512;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::uint64_t seed = 0;
    bool has_seed = false;
    DatasetConfig dataset;
    task::KkTaskOptions task;
    PolicyConfig policy;
    PretrainConfig pretrain;
    train::SFTConfig sft;
    RLStageConfig rl;
    RedistillStageConfig redistill;
    EvalConfig eval;
    AnalysisConfig analysis;
    std::vector<std::string> stages{"generate", "pretrain", "rl",
                                    "redistill", "effects", "analyze"};
    std::filesystem::path output_dir;

    void validate() const;  // throws std::invalid_argument with the field name
    std::string canonical_json() const;
    std::string hash() const;  // sha256 of the canonical form
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

effects::EvalMethod eval_method_of(const ExperimentConfig& config, std::uint64_t seed);

}  // namespace kklab::exp
