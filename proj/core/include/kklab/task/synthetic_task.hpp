#pragma once

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "kklab/task/task.hpp"

namespace kklab::task {

// Arbitrary enumerable task: each prompt carries an explicit set of correct
// terminated responses. The exact oracles and theorem checks run on these.
class SyntheticTask final : public Task {
  public:
    SyntheticTask(policy::Vocab vocab, int l_max, int n_prompts);

    // marks `content + <eos>` as correct for the prompt
    void add_correct(int prompt_index, std::vector<int> content_tokens);

    const policy::Vocab& vocab() const override { return vocab_; }
    int l_max() const override { return l_max_; }
    int n_prompts() const override { return int(prompts_.size()); }
    const policy::PromptContext& prompt(int index) const override {
        return prompts_.at(std::size_t(index));
    }
    int reward(int prompt_index, const policy::TokenSeq& response) const override;

    std::size_t n_correct(int prompt_index) const {
        return correct_.at(std::size_t(prompt_index)).size();
    }

    // every terminated response of length <= l_max is marked correct
    // independently with probability `correct_fraction`; at least one
    // correct response is guaranteed per prompt
    static SyntheticTask random(int vocab_size, int l_max, int n_prompts,
                                double correct_fraction, std::uint64_t seed);

    // one designated correct content sequence per prompt, sampled uniformly
    // over non-EOS tokens with the given content length
    static SyntheticTask sequence_recall(int vocab_size, int l_max, int n_prompts,
                                         int target_length, std::uint64_t seed);

  private:
    struct VecHash {
        std::size_t operator()(const std::vector<int>& v) const {
            std::size_t h = 0x9e3779b97f4a7c15ULL;
            for (int x : v) h = (h ^ std::size_t(x) * 0x100000001b3ULL) * 0xc6a4a7935bd1e995ULL;
            return h;
        }
    };

    policy::Vocab vocab_;
    int l_max_;
    std::vector<policy::PromptContext> prompts_;
    std::vector<std::unordered_set<std::vector<int>, VecHash>> correct_;
};

// generic vocabulary {t0, t1, ..., <eos>} with `size` tokens in total
policy::Vocab generic_vocab(int size);

}  // namespace kklab::task
