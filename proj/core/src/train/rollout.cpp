#include "kklab/train/rollout.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

#include "kklab/puzzle/grading.hpp"

namespace kklab::train {

int binary_reward(const policy::Vocab& vocab, const policy::TokenSeq& response,
                  const puzzle::PuzzleSpec& puzzle, int l_max) {
    if (!response.terminated) return 0;
    if (int(response.length()) > l_max) return 0;
    return puzzle::check_answer(vocab.decode(response.tokens), puzzle);
}

void RolloutBatch::validate_groups() const {
    if (group_size < 1) throw std::invalid_argument("RolloutBatch: group_size must be >= 1");
    std::map<int, int> members;
    std::map<int, int> prompt_of;
    for (const auto& s : samples) {
        members[s.group] += 1;
        const auto it = prompt_of.find(s.group);
        if (it == prompt_of.end()) prompt_of[s.group] = s.prompt_index;
        else if (it->second != s.prompt_index)
            throw std::invalid_argument("RolloutBatch: group mixes prompts");
    }
    for (const auto& [group, count] : members) {
        (void)group;
        if (count != group_size)
            throw std::invalid_argument("RolloutBatch: incomplete group");
    }
}

RolloutBatch compute_advantages(RolloutBatch batch) {
    batch.validate_groups();
    std::map<int, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < batch.samples.size(); ++i)
        groups[batch.samples[i].group].push_back(i);
    for (const auto& [group, idx] : groups) {
        (void)group;
        double mean = 0.0;
        for (std::size_t i : idx) mean += batch.samples[i].reward;
        mean /= double(idx.size());
        double var = 0.0;
        for (std::size_t i : idx) {
            const double d = batch.samples[i].reward - mean;
            var += d * d;
        }
        const double stddev = std::sqrt(var / double(idx.size()));
        for (std::size_t i : idx)
            batch.samples[i].advantage = (batch.samples[i].reward - mean) / (stddev + 1e-6);
    }
    return batch;
}

}  // namespace kklab::train
