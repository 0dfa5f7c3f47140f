#pragma once

#include <vector>

#include "kklab/task/task.hpp"

namespace kklab::analysis {

// a rollout attributed to a prompt, typically loaded from a trace file
struct TaggedResponse {
    int prompt_index = -1;
    policy::TokenSeq response;
};

struct PositionProfile {
    // one entry per response position (0-based)
    std::vector<double> mean_logprob;
    std::vector<double> quantile_logprob;  // nearest-rank q-quantile
    std::vector<int> count;                // responses reaching the position
    std::vector<bool> low_confidence;      // count < 1/q
    double q = 0.01;

    int argmin_quantile_position() const;  // restricted to confident positions
};

// Per-position conditional log-probabilities of the given responses under
// `params` (typically a checkpoint other than the one that produced them).
// q must lie in (0, 0.5].
PositionProfile position_profile(const policy::PolicyModel& model,
                                 std::span<const double> params, const task::Task& task,
                                 const std::vector<TaggedResponse>& responses, double q);

}  // namespace kklab::analysis
