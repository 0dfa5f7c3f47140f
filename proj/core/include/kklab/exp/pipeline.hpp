#pragma once

#include "kklab/exp/config.hpp"
#include "kklab/exp/manifest.hpp"

namespace kklab::exp {

struct PipelineResult {
    RunManifest manifest;
    std::filesystem::path run_dir;
    bool ok = false;
};

// Executes the configured stages in order inside the run directory. Stages
// whose artifacts already exist with matching hashes are skipped, so an
// interrupted run resumes where it stopped. A run directory holding a
// different config hash is refused. On stage failure the manifest marks the
// stage failed and earlier artifacts stay intact.
PipelineResult run_pipeline(const ExperimentConfig& config);

// artifact names used by the pipeline stages
namespace artifact {
inline constexpr const char* kDataset = "dataset.jsonl";
inline constexpr const char* kBaseCkpt = "base.ckpt";
inline constexpr const char* kPretrainTrace = "pretrain_trace.jsonl";
inline constexpr const char* kSftCkpt = "sft.ckpt";
inline constexpr const char* kSftTrace = "sft_trace.jsonl";
inline constexpr const char* kRlInitCkpt = "rl_init.ckpt";
inline constexpr const char* kRlCkpt = "rl.ckpt";
inline constexpr const char* kRlTrace = "rl_trace.jsonl";
inline constexpr const char* kDistillSet = "distill_set.jsonl";
inline constexpr const char* kRedistillCkpt = "redistill.ckpt";
inline constexpr const char* kRedistillReport = "redistill_report.json";
inline constexpr const char* kEffects = "effects.jsonl";
inline constexpr const char* kEffectsSummary = "effects_summary.jsonl";
inline constexpr const char* kInterp = "interp.jsonl";
inline constexpr const char* kPositions = "positions.jsonl";
inline constexpr const char* kModes = "modes.jsonl";
inline constexpr const char* kManifest = "manifest.json";
}  // namespace artifact

}  // namespace kklab::exp
