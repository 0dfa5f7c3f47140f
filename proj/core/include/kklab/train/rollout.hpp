#pragma once

#include <vector>

#include "kklab/policy/policy.hpp"
#include "kklab/puzzle/puzzle.hpp"
#include "kklab/task/task.hpp"

namespace kklab::train {

// Binary outcome reward: 1 iff the response is terminated, fits the length
// budget, and the boxed answer matches the ground truth.
int binary_reward(const policy::Vocab& vocab, const policy::TokenSeq& response,
                  const puzzle::PuzzleSpec& puzzle, int l_max);

struct RolloutSample {
    int prompt_index = -1;
    policy::TokenSeq response;
    int reward = 0;
    int group = -1;
    double advantage = 0.0;
    std::vector<double> behavior_logprobs;  // per token, under the sampling policy
};

struct RolloutBatch {
    int group_size = 0;
    std::vector<RolloutSample> samples;

    // each group must have exactly group_size members sharing one prompt
    void validate_groups() const;
};

// A_i = (r_i - mean_group) / (std_group + 1e-6); zero-variance groups get
// all-zero advantages
RolloutBatch compute_advantages(RolloutBatch batch);

}  // namespace kklab::train
