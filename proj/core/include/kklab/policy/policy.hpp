#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kklab/policy/vocab.hpp"

namespace kklab::policy {

// Response token sequence. `terminated` mirrors "last token is EOS"; the
// invariant is enforced by validate_seq.
struct TokenSeq {
    std::vector<int> tokens;
    bool terminated = false;

    std::size_t length() const { return tokens.size(); }
    bool operator==(const TokenSeq& other) const = default;
};

TokenSeq make_terminated(std::vector<int> content_tokens, const Vocab& vocab);

// Prompt as seen by the policy: a slot for tabular lookups plus the prompt
// token ids over a separate prompt alphabet for feature-based models.
struct PromptContext {
    int slot = 0;
    std::vector<int> tokens;      // non-empty
    int prompt_vocab_size = 1;
};

enum class PolicyKind : std::uint8_t { Tabular, LinearSoftmax };

std::string policy_kind_name(PolicyKind kind);
PolicyKind policy_kind_from_name(const std::string& name);

// Model descriptor. Parameters live outside as a flat vector so that
// checkpoints, interpolation and optimizer state stay trivial.
//
// Tabular: one logit row per (prompt slot, last-k response tokens); k
// previous tokens are taken from the response prefix, padded with a
// sentinel before the first token.
//
// LinearSoftmax: logits = W phi with phi = [one-hots of the k previous
// response tokens | normalized prompt token counts | bias].
struct PolicyModel {
    PolicyKind kind = PolicyKind::Tabular;
    Vocab vocab;
    int context_order = 1;     // k
    int n_prompt_slots = 1;    // tabular only
    int prompt_vocab_size = 1; // linear only

    void validate() const;

    int vocab_size() const { return vocab.size(); }
    // context alphabet includes the begin-of-response sentinel
    int context_alphabet() const { return vocab.size() + 1; }
    std::size_t n_contexts() const;
    std::size_t feature_dim() const;
    std::size_t param_dim() const;

    bool same_family(const PolicyModel& other) const;
};

std::vector<double> zero_params(const PolicyModel& model);
std::vector<double> gaussian_params(const PolicyModel& model, double scale, std::uint64_t seed);

// sequence well-formedness against a vocab: indices in range, EOS only at
// the end, terminated flag consistent
void validate_seq(const Vocab& vocab, const TokenSeq& seq);

// conditional next-token distribution given the response prefix
void conditional_probs(const PolicyModel& model, std::span<const double> params,
                       const PromptContext& prompt, std::span<const int> prefix,
                       std::span<double> probs_out);

// sum over positions of log softmax(logits)[token]; a non-terminated
// sequence simply has no EOS factor
double logprob(const PolicyModel& model, std::span<const double> params,
               const PromptContext& prompt, const TokenSeq& seq);

std::vector<double> per_token_logprobs(const PolicyModel& model, std::span<const double> params,
                                       const PromptContext& prompt, const TokenSeq& seq);

// acc += weight * d/dtheta log pi(seq | prompt); exact analytic gradient
void accumulate_grad_logprob(const PolicyModel& model, std::span<const double> params,
                             const PromptContext& prompt, const TokenSeq& seq, double weight,
                             std::span<double> acc);

// acc += sum_t token_weights[t] * d/dtheta log pi(seq_t | prefix, prompt)
void accumulate_grad_logprob_weighted(const PolicyModel& model, std::span<const double> params,
                                      const PromptContext& prompt, const TokenSeq& seq,
                                      std::span<const double> token_weights,
                                      std::span<double> acc);

std::vector<double> grad_logprob(const PolicyModel& model, std::span<const double> params,
                                 const PromptContext& prompt, const TokenSeq& seq);

struct SampleOptions {
    double temperature = 1.0;
    int l_max = 16;
    bool greedy = false;
};

TokenSeq sample(const PolicyModel& model, std::span<const double> params,
                const PromptContext& prompt, const SampleOptions& options, std::uint64_t seed);

// mean conditional entropy over the positions of a sequence
double mean_step_entropy(const PolicyModel& model, std::span<const double> params,
                         const PromptContext& prompt, const TokenSeq& seq);

}  // namespace kklab::policy
