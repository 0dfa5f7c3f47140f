#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kklab/train/sft.hpp"
#include "kklab/task/task.hpp"

namespace kklab::train {

struct DistillSet {
    SftDataset examples;  // reward-1 responses only
    int n_sampled = 0;
    int n_kept = 0;
    std::vector<double> per_prompt_accuracy;  // kept fraction per prompt, prompt-set order
};

// Samples `samples_per_prompt` responses per prompt from the source policy
// and keeps those with reward 1 and length <= l_filter. Throws
// std::runtime_error with a per-prompt accuracy report when nothing
// survives the filter.
DistillSet build_distill_set(const task::Task& task, const policy::PolicyModel& model,
                             std::span<const double> source_params,
                             const task::PromptSet& prompts, int l_filter,
                             int samples_per_prompt, double temperature, std::uint64_t seed);

using AccuracyEvaluator = std::function<double(std::span<const double> params)>;

struct RedistillResult {
    std::vector<double> params;
    DistillSet distill_set;
    double accuracy_before = 0.0;  // fresh base, before fine-tuning
    double accuracy_after = 0.0;
};

// Re-distillation: sample-and-filter from an RL-trained policy, then
// supervised fine-tuning of a fresh base policy on the kept responses.
RedistillResult redistill(const task::Task& task, const policy::PolicyModel& model,
                          std::span<const double> rl_params, const task::PromptSet& prompts,
                          std::vector<double> fresh_base_params, const SFTConfig& sft_config,
                          int l_filter, int samples_per_prompt, double temperature,
                          std::uint64_t seed, const AccuracyEvaluator& evaluator);

}  // namespace kklab::train
