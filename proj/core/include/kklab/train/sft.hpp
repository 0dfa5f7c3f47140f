#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kklab/train/adam.hpp"
#include "kklab/train/config.hpp"
#include "kklab/task/task.hpp"

namespace kklab::train {

struct SftExample {
    int prompt_index = -1;
    policy::TokenSeq target;
};

using SftDataset = std::vector<SftExample>;

// One supervised step on a batch: minimizes the mean over examples of
// -logprob(target)/|target| with an Adam update. Returns the loss.
double sft_step(const task::Task& task, const policy::PolicyModel& model,
                std::vector<double>& params, AdamState& adam,
                std::span<const SftExample> batch, const SFTConfig& config);

using EpochObserver = std::function<void(int epoch, double mean_loss)>;

// epochs * ceil(n/batch_size) steps over seeded shuffles of the dataset
std::vector<double> run_sft(const task::Task& task, const policy::PolicyModel& model,
                            std::vector<double> initial_params, const SftDataset& dataset,
                            const SFTConfig& config, std::uint64_t seed,
                            const EpochObserver& observer = {});

}  // namespace kklab::train
