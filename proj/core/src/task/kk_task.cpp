#include "kklab/task/kk_task.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "kklab/puzzle/cot.hpp"
#include "kklab/puzzle/grading.hpp"
#include "kklab/util/rng.hpp"

namespace kklab::task {

std::string response_style_name(ResponseStyle style) {
    return style == ResponseStyle::Answer ? "answer" : "trace";
}

ResponseStyle response_style_from_name(const std::string& name) {
    if (name == "answer") return ResponseStyle::Answer;
    if (name == "trace") return ResponseStyle::Trace;
    throw std::invalid_argument("unknown response style: " + name);
}

namespace {

policy::Vocab build_response_vocab(const std::vector<puzzle::PuzzleRecord>& records,
                                   ResponseStyle style) {
    std::set<std::string> names;
    for (const auto& rec : records)
        names.insert(rec.puzzle.names.begin(), rec.puzzle.names.end());
    std::vector<std::string> tokens(names.begin(), names.end());
    for (const char* t : {"knight", "knave", "boxed{", "}", "is", "a", ","})
        tokens.push_back(t);
    if (style == ResponseStyle::Trace)
        for (const char* t : {"assume", "ok", "contra"}) tokens.push_back(t);
    return policy::Vocab::with_eos(std::move(tokens));
}

policy::Vocab build_prompt_vocab(const std::vector<puzzle::PuzzleRecord>& records) {
    std::set<std::string> tokens;
    for (const auto& rec : records)
        tokens.insert(rec.prompt_tokens.begin(), rec.prompt_tokens.end());
    // EOS is unused on the prompt side but keeps the type uniform
    return policy::Vocab::with_eos(std::vector<std::string>(tokens.begin(), tokens.end()));
}

}  // namespace

KkTask::KkTask(std::vector<puzzle::PuzzleRecord> records, KkTaskOptions options)
    : records_(std::move(records)), options_(options) {
    if (records_.empty()) throw std::invalid_argument("KkTask: empty dataset");
    if (options_.l_max < 2) throw std::invalid_argument("KkTask: l_max too small");
    vocab_ = build_response_vocab(records_, options_.style);
    prompt_vocab_ = build_prompt_vocab(records_);
    for (std::size_t i = 0; i < records_.size(); ++i) {
        policy::PromptContext ctx;
        ctx.slot = int(i);
        ctx.tokens = prompt_vocab_.encode(records_[i].prompt_tokens);
        ctx.prompt_vocab_size = prompt_vocab_.size();
        prompts_.push_back(std::move(ctx));
    }
    // every target must fit the task's length budget
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (int(answer_target(int(i)).length()) > options_.l_max)
            throw std::invalid_argument("KkTask: l_max too small for the boxed answers");
    }
}

int KkTask::reward(int prompt_index, const policy::TokenSeq& response) const {
    if (!response.terminated) return 0;
    if (int(response.length()) > options_.l_max) return 0;
    const auto words = vocab_.decode(response.tokens);
    return puzzle::check_answer(words, records_.at(std::size_t(prompt_index)).puzzle);
}

policy::TokenSeq KkTask::answer_target(int index) const {
    const auto words = puzzle::boxed_answer_tokens(records_.at(std::size_t(index)).puzzle);
    return policy::make_terminated(vocab_.encode(words), vocab_);
}

policy::TokenSeq KkTask::sft_target(int index) const {
    if (options_.style == ResponseStyle::Answer) return answer_target(index);
    const auto& words = records_.at(std::size_t(index)).short_cot_tokens;
    return policy::make_terminated(vocab_.encode(words), vocab_);
}

policy::TokenSeq KkTask::format_target(int index, std::uint64_t seed) const {
    const auto& rec = records_.at(std::size_t(index));
    Rng rng(derive_seed(seed, std::uint64_t(rec.id), 0x666d74ULL));

    puzzle::PuzzleSpec shuffled = rec.puzzle;
    for (auto& id : shuffled.solution)
        id = rng.uniform() < 0.5 ? puzzle::Identity::Knight : puzzle::Identity::Knave;
    std::vector<std::string> words;
    if (options_.style == ResponseStyle::Trace && rng.uniform() < 0.5) {
        words.push_back("assume");
        words.push_back(rec.puzzle.names[std::size_t(rng.uniform_int(
            std::uint64_t(rec.puzzle.n_ppl)))]);
        words.push_back(rng.uniform() < 0.5 ? "knight" : "knave");
        words.push_back("ok");
    }
    const auto boxed = puzzle::boxed_answer_tokens(shuffled);
    words.insert(words.end(), boxed.begin(), boxed.end());
    return policy::make_terminated(vocab_.encode(words), vocab_);
}

policy::PolicyModel make_policy_model(const Task& task, policy::PolicyKind kind,
                                      int context_order) {
    policy::PolicyModel model;
    model.kind = kind;
    model.vocab = task.vocab();
    model.context_order = context_order;
    model.n_prompt_slots = task.n_prompts();
    model.prompt_vocab_size = task.prompt(0).prompt_vocab_size;
    model.validate();
    return model;
}

}  // namespace kklab::task
