#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kklab/puzzle/dataset.hpp"
#include "kklab/task/task.hpp"

namespace kklab::task {

// Answer: responses are bare boxed answers; smallest vocabulary.
// Trace: responses may carry an assume/ok/contra search trace before the
// boxed answer (the synthesized solutions use it).
enum class ResponseStyle : std::uint8_t { Answer, Trace };

std::string response_style_name(ResponseStyle style);
ResponseStyle response_style_from_name(const std::string& name);

struct KkTaskOptions {
    ResponseStyle style = ResponseStyle::Answer;
    int l_max = 24;
};

class KkTask final : public Task {
  public:
    KkTask(std::vector<puzzle::PuzzleRecord> records, KkTaskOptions options);

    const policy::Vocab& vocab() const override { return vocab_; }
    int l_max() const override { return options_.l_max; }
    int n_prompts() const override { return int(records_.size()); }
    const policy::PromptContext& prompt(int index) const override {
        return prompts_.at(std::size_t(index));
    }
    int reward(int prompt_index, const policy::TokenSeq& response) const override;

    const puzzle::PuzzleRecord& record(int index) const { return records_.at(std::size_t(index)); }
    const KkTaskOptions& options() const { return options_; }
    const policy::Vocab& prompt_vocab() const { return prompt_vocab_; }

    // ground-truth boxed answer as a terminated response
    policy::TokenSeq answer_target(int index) const;
    // style-appropriate supervised target (boxed answer, or the full trace)
    policy::TokenSeq sft_target(int index) const;
    // boxed answer with seeded random identities; style Trace prepends a
    // one-person assume block half of the time so that the first response
    // token stays bimodal
    policy::TokenSeq format_target(int index, std::uint64_t seed) const;

  private:
    std::vector<puzzle::PuzzleRecord> records_;
    KkTaskOptions options_;
    policy::Vocab vocab_;
    policy::Vocab prompt_vocab_;
    std::vector<policy::PromptContext> prompts_;
};

}  // namespace kklab::task
