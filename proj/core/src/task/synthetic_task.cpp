#include "kklab/task/synthetic_task.hpp"

#include <stdexcept>

#include "kklab/policy/enumerate.hpp"
#include "kklab/util/rng.hpp"

namespace kklab::task {

policy::Vocab generic_vocab(int size) {
    if (size < 2) throw std::invalid_argument("generic_vocab: need at least 2 tokens");
    std::vector<std::string> tokens;
    for (int i = 0; i + 1 < size; ++i) tokens.push_back("t" + std::to_string(i));
    return policy::Vocab::with_eos(std::move(tokens));
}

SyntheticTask::SyntheticTask(policy::Vocab vocab, int l_max, int n_prompts)
    : vocab_(std::move(vocab)), l_max_(l_max) {
    if (n_prompts < 1) throw std::invalid_argument("SyntheticTask: need at least one prompt");
    if (l_max_ < 1) throw std::invalid_argument("SyntheticTask: l_max must be >= 1");
    for (int i = 0; i < n_prompts; ++i) {
        policy::PromptContext ctx;
        ctx.slot = i;
        ctx.tokens = {i};
        ctx.prompt_vocab_size = n_prompts;
        prompts_.push_back(std::move(ctx));
    }
    correct_.resize(std::size_t(n_prompts));
}

void SyntheticTask::add_correct(int prompt_index, std::vector<int> content_tokens) {
    auto seq = policy::make_terminated(std::move(content_tokens), vocab_);
    if (int(seq.length()) > l_max_)
        throw std::invalid_argument("SyntheticTask: correct response exceeds l_max");
    correct_.at(std::size_t(prompt_index)).insert(std::move(seq.tokens));
}

int SyntheticTask::reward(int prompt_index, const policy::TokenSeq& response) const {
    if (!response.terminated || int(response.length()) > l_max_) return 0;
    return correct_.at(std::size_t(prompt_index)).count(response.tokens) ? 1 : 0;
}

SyntheticTask SyntheticTask::random(int vocab_size, int l_max, int n_prompts,
                                    double correct_fraction, std::uint64_t seed) {
    SyntheticTask task(generic_vocab(vocab_size), l_max, n_prompts);
    const auto all = policy::enumerate_responses(task.vocab_, l_max);
    Rng rng(derive_seed(seed, 0x73796e74ULL));
    for (int p = 0; p < n_prompts; ++p) {
        bool any = false;
        for (const auto& seq : all) {
            if (rng.uniform() < correct_fraction) {
                task.correct_[std::size_t(p)].insert(seq.tokens);
                any = true;
            }
        }
        if (!any) {
            const auto& pick = all[rng.uniform_int(all.size())];
            task.correct_[std::size_t(p)].insert(pick.tokens);
        }
    }
    return task;
}

SyntheticTask SyntheticTask::sequence_recall(int vocab_size, int l_max, int n_prompts,
                                             int target_length, std::uint64_t seed) {
    if (target_length + 1 > l_max)
        throw std::invalid_argument("sequence_recall: target_length + EOS exceeds l_max");
    SyntheticTask task(generic_vocab(vocab_size), l_max, n_prompts);
    Rng rng(derive_seed(seed, 0x7265636c6cULL));
    for (int p = 0; p < n_prompts; ++p) {
        std::vector<int> content;
        for (int i = 0; i < target_length; ++i)
            content.push_back(int(rng.uniform_int(std::uint64_t(vocab_size - 1))));
        task.add_correct(p, std::move(content));
    }
    return task;
}

}  // namespace kklab::task
