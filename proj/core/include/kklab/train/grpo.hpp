#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "kklab/train/adam.hpp"
#include "kklab/train/config.hpp"
#include "kklab/train/rollout.hpp"
#include "kklab/task/task.hpp"

namespace kklab::train {

struct StepStats {
    int step = 0;
    double train_acc = 0.0;
    double mean_len = 0.0;
    double entropy = 0.0;    // mean per-token conditional entropy of the sampler
    double clip_frac = 0.0;  // fraction of tokens with an active ratio clip
    double loss = 0.0;       // minimized surrogate
    double grad_norm = 0.0;  // before norm clipping
};

// One GRPO update: sample G responses per selected prompt from the current
// policy, normalize rewards into group advantages, take a single clipped
// policy-gradient step over the buffer (token-mean aggregation), then a
// gradient-norm-clipped Adam update with linear warm-up.
//
// `reference_params`, when present, enables the KL penalty against that
// policy with weight config.kl_coefficient.
StepStats grpo_step(const task::Task& task, const task::PromptSet& train_set,
                    const policy::PolicyModel& model, std::vector<double>& params,
                    AdamState& adam, const RLConfig& config, int step_index,
                    std::uint64_t run_seed,
                    std::span<const double> reference_params = {},
                    RolloutBatch* rollout_out = nullptr,
                    std::vector<double>* ascent_grad_out = nullptr);

using StepObserver =
    std::function<void(int step, const StepStats&, std::span<const double> params)>;

struct GrpoRunResult {
    std::vector<StepStats> trace;
    std::vector<double> params;
    AdamState adam;
};

GrpoRunResult run_grpo(const task::Task& task, const task::PromptSet& train_set,
                       const policy::PolicyModel& model, std::vector<double> initial_params,
                       const RLConfig& config, int n_steps, std::uint64_t run_seed,
                       const StepObserver& observer = {});

}  // namespace kklab::train
