#include "kklab/policy/policy.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kklab/util/rng.hpp"

namespace kklab::policy {

TokenSeq make_terminated(std::vector<int> content_tokens, const Vocab& vocab) {
    content_tokens.push_back(vocab.eos_id());
    TokenSeq seq{std::move(content_tokens), true};
    validate_seq(vocab, seq);
    return seq;
}

std::string policy_kind_name(PolicyKind kind) {
    return kind == PolicyKind::Tabular ? "tabular" : "linear-softmax";
}

PolicyKind policy_kind_from_name(const std::string& name) {
    if (name == "tabular") return PolicyKind::Tabular;
    if (name == "linear-softmax") return PolicyKind::LinearSoftmax;
    throw std::invalid_argument("unknown policy kind: " + name);
}

void PolicyModel::validate() const {
    if (vocab.size() < 2) throw std::invalid_argument("PolicyModel: vocab too small");
    if (context_order < 0) throw std::invalid_argument("PolicyModel: negative context order");
    if (kind == PolicyKind::Tabular && n_prompt_slots < 1)
        throw std::invalid_argument("PolicyModel: need at least one prompt slot");
    if (kind == PolicyKind::LinearSoftmax && prompt_vocab_size < 1)
        throw std::invalid_argument("PolicyModel: prompt vocab must be non-empty");
    const double dim = double(param_dim());
    if (dim > 5e8) throw std::invalid_argument("PolicyModel: parameter vector too large");
}

std::size_t PolicyModel::n_contexts() const {
    std::size_t n = 1;
    for (int i = 0; i < context_order; ++i) n *= std::size_t(context_alphabet());
    return n;
}

std::size_t PolicyModel::feature_dim() const {
    return std::size_t(context_order) * std::size_t(context_alphabet()) +
           std::size_t(prompt_vocab_size) + 1;
}

std::size_t PolicyModel::param_dim() const {
    if (kind == PolicyKind::Tabular)
        return std::size_t(n_prompt_slots) * n_contexts() * std::size_t(vocab.size());
    return std::size_t(vocab.size()) * feature_dim();
}

bool PolicyModel::same_family(const PolicyModel& other) const {
    return kind == other.kind && vocab == other.vocab && context_order == other.context_order &&
           n_prompt_slots == other.n_prompt_slots && prompt_vocab_size == other.prompt_vocab_size;
}

std::vector<double> zero_params(const PolicyModel& model) {
    return std::vector<double>(model.param_dim(), 0.0);
}

std::vector<double> gaussian_params(const PolicyModel& model, double scale, std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x706172616d73ULL));
    std::vector<double> params(model.param_dim());
    for (double& p : params) p = scale * rng.normal();
    return params;
}

void validate_seq(const Vocab& vocab, const TokenSeq& seq) {
    const int eos = vocab.eos_id();
    for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
        const int t = seq.tokens[i];
        if (t < 0 || t >= vocab.size())
            throw std::invalid_argument("TokenSeq: token id out of range");
        if (t == eos && i + 1 != seq.tokens.size())
            throw std::invalid_argument("TokenSeq: EOS before the end");
    }
    const bool ends_eos = !seq.tokens.empty() && seq.tokens.back() == eos;
    if (seq.terminated != ends_eos)
        throw std::invalid_argument("TokenSeq: terminated flag inconsistent with tokens");
}

namespace {

struct Features {
    // sparse feature vector: parallel (index, value) arrays
    std::vector<std::size_t> idx;
    std::vector<double> val;
};

void check_prompt(const PolicyModel& model, const PromptContext& prompt) {
    if (prompt.tokens.empty()) throw std::invalid_argument("PromptContext: empty prompt");
    if (model.kind == PolicyKind::Tabular) {
        if (prompt.slot < 0 || prompt.slot >= model.n_prompt_slots)
            throw std::invalid_argument("PromptContext: slot outside the model's slot range");
    } else {
        if (prompt.prompt_vocab_size != model.prompt_vocab_size)
            throw std::invalid_argument("PromptContext: prompt vocab size mismatch");
        for (int t : prompt.tokens)
            if (t < 0 || t >= model.prompt_vocab_size)
                throw std::invalid_argument("PromptContext: prompt token out of range");
    }
}

std::size_t tabular_context_id(const PolicyModel& model, std::span<const int> prefix) {
    const std::size_t alpha = std::size_t(model.context_alphabet());
    const int sentinel = model.vocab.size();
    std::size_t id = 0;
    std::size_t radix = 1;
    for (int j = 0; j < model.context_order; ++j) {
        const std::ptrdiff_t pos = std::ptrdiff_t(prefix.size()) - 1 - j;
        const int tok = pos >= 0 ? prefix[std::size_t(pos)] : sentinel;
        id += std::size_t(tok) * radix;
        radix *= alpha;
    }
    return id;
}

Features linear_features(const PolicyModel& model, const PromptContext& prompt,
                         std::span<const int> prefix) {
    Features f;
    const std::size_t alpha = std::size_t(model.context_alphabet());
    const int sentinel = model.vocab.size();
    for (int j = 0; j < model.context_order; ++j) {
        const std::ptrdiff_t pos = std::ptrdiff_t(prefix.size()) - 1 - j;
        const int tok = pos >= 0 ? prefix[std::size_t(pos)] : sentinel;
        f.idx.push_back(std::size_t(j) * alpha + std::size_t(tok));
        f.val.push_back(1.0);
    }
    const std::size_t count_base = std::size_t(model.context_order) * alpha;
    std::vector<double> counts(std::size_t(model.prompt_vocab_size), 0.0);
    for (int t : prompt.tokens) counts[std::size_t(t)] += 1.0;
    const double inv_len = 1.0 / double(prompt.tokens.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i] != 0.0) {
            f.idx.push_back(count_base + i);
            f.val.push_back(counts[i] * inv_len);
        }
    }
    f.idx.push_back(count_base + counts.size());  // bias
    f.val.push_back(1.0);
    return f;
}

void logits_at(const PolicyModel& model, std::span<const double> params,
               const PromptContext& prompt, std::span<const int> prefix,
               std::span<double> logits) {
    const int v_size = model.vocab.size();
    if (model.kind == PolicyKind::Tabular) {
        const std::size_t ctx = tabular_context_id(model, prefix);
        const std::size_t base =
            (std::size_t(prompt.slot) * model.n_contexts() + ctx) * std::size_t(v_size);
        for (int v = 0; v < v_size; ++v) logits[std::size_t(v)] = params[base + std::size_t(v)];
        return;
    }
    const Features f = linear_features(model, prompt, prefix);
    const std::size_t feat_dim = model.feature_dim();
    for (int v = 0; v < v_size; ++v) {
        const std::size_t row = std::size_t(v) * feat_dim;
        double acc = 0.0;
        for (std::size_t i = 0; i < f.idx.size(); ++i) acc += params[row + f.idx[i]] * f.val[i];
        logits[std::size_t(v)] = acc;
    }
}

void softmax_inplace(std::span<double> logits) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double l : logits) mx = std::max(mx, l);
    double z = 0.0;
    for (double& l : logits) {
        l = std::exp(l - mx);
        z += l;
    }
    for (double& l : logits) l /= z;
}

}  // namespace

void conditional_probs(const PolicyModel& model, std::span<const double> params,
                       const PromptContext& prompt, std::span<const int> prefix,
                       std::span<double> probs_out) {
    if (params.size() != model.param_dim())
        throw std::invalid_argument("conditional_probs: parameter dimension mismatch");
    if (probs_out.size() != std::size_t(model.vocab.size()))
        throw std::invalid_argument("conditional_probs: output size mismatch");
    check_prompt(model, prompt);
    logits_at(model, params, prompt, prefix, probs_out);
    softmax_inplace(probs_out);
}

std::vector<double> per_token_logprobs(const PolicyModel& model, std::span<const double> params,
                                       const PromptContext& prompt, const TokenSeq& seq) {
    if (params.size() != model.param_dim())
        throw std::invalid_argument("logprob: parameter dimension mismatch");
    validate_seq(model.vocab, seq);
    check_prompt(model, prompt);
    std::vector<double> probs(std::size_t(model.vocab.size()));
    std::vector<double> out;
    out.reserve(seq.tokens.size());
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
        conditional_probs(model, params, prompt,
                          std::span<const int>(seq.tokens.data(), t), probs);
        out.push_back(std::log(probs[std::size_t(seq.tokens[t])]));
    }
    return out;
}

double logprob(const PolicyModel& model, std::span<const double> params,
               const PromptContext& prompt, const TokenSeq& seq) {
    double total = 0.0;
    for (double lp : per_token_logprobs(model, params, prompt, seq)) total += lp;
    return total;
}

void accumulate_grad_logprob_weighted(const PolicyModel& model, std::span<const double> params,
                                      const PromptContext& prompt, const TokenSeq& seq,
                                      std::span<const double> token_weights,
                                      std::span<double> acc) {
    if (params.size() != model.param_dim() || acc.size() != model.param_dim())
        throw std::invalid_argument("grad_logprob: dimension mismatch");
    if (seq.tokens.empty())
        throw std::invalid_argument("grad_logprob: empty sequence has no gradient");
    if (token_weights.size() != seq.tokens.size())
        throw std::invalid_argument("grad_logprob: one weight per token required");
    validate_seq(model.vocab, seq);
    check_prompt(model, prompt);

    const int v_size = model.vocab.size();
    std::vector<double> probs(std::size_t(v_size), 0.0);
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
        const double weight = token_weights[t];
        if (weight == 0.0) continue;
        const std::span<const int> prefix(seq.tokens.data(), t);
        const int chosen = seq.tokens[t];
        if (model.kind == PolicyKind::Tabular) {
            const std::size_t ctx = tabular_context_id(model, prefix);
            const std::size_t base =
                (std::size_t(prompt.slot) * model.n_contexts() + ctx) * std::size_t(v_size);
            for (int v = 0; v < v_size; ++v) probs[std::size_t(v)] = params[base + std::size_t(v)];
            softmax_inplace(probs);
            for (int v = 0; v < v_size; ++v) {
                const double indicator = v == chosen ? 1.0 : 0.0;
                acc[base + std::size_t(v)] += weight * (indicator - probs[std::size_t(v)]);
            }
        } else {
            conditional_probs(model, params, prompt, prefix, probs);
            const Features f = linear_features(model, prompt, prefix);
            const std::size_t feat_dim = model.feature_dim();
            for (int v = 0; v < v_size; ++v) {
                const double indicator = v == chosen ? 1.0 : 0.0;
                const double coeff = weight * (indicator - probs[std::size_t(v)]);
                if (coeff == 0.0) continue;
                const std::size_t row = std::size_t(v) * feat_dim;
                for (std::size_t i = 0; i < f.idx.size(); ++i)
                    acc[row + f.idx[i]] += coeff * f.val[i];
            }
        }
    }
}

void accumulate_grad_logprob(const PolicyModel& model, std::span<const double> params,
                             const PromptContext& prompt, const TokenSeq& seq, double weight,
                             std::span<double> acc) {
    const std::vector<double> weights(seq.tokens.size(), weight);
    accumulate_grad_logprob_weighted(model, params, prompt, seq, weights, acc);
}

std::vector<double> grad_logprob(const PolicyModel& model, std::span<const double> params,
                                 const PromptContext& prompt, const TokenSeq& seq) {
    std::vector<double> acc(model.param_dim(), 0.0);
    accumulate_grad_logprob(model, params, prompt, seq, 1.0, acc);
    return acc;
}

TokenSeq sample(const PolicyModel& model, std::span<const double> params,
                const PromptContext& prompt, const SampleOptions& options, std::uint64_t seed) {
    if (!options.greedy && !(options.temperature > 0.0))
        throw std::invalid_argument("sample: temperature must be positive");
    if (options.l_max < 1) throw std::invalid_argument("sample: l_max must be >= 1");
    if (params.size() != model.param_dim())
        throw std::invalid_argument("sample: parameter dimension mismatch");
    check_prompt(model, prompt);

    Rng rng(seed);
    const int v_size = model.vocab.size();
    std::vector<double> work(std::size_t(v_size), 0.0);
    TokenSeq seq;
    for (int t = 0; t < options.l_max; ++t) {
        logits_at(model, params, prompt, std::span<const int>(seq.tokens), work);
        int chosen;
        if (options.greedy) {
            chosen = 0;
            for (int v = 1; v < v_size; ++v)
                if (work[std::size_t(v)] > work[std::size_t(chosen)]) chosen = v;
        } else {
            if (options.temperature != 1.0)
                for (double& l : work) l /= options.temperature;
            softmax_inplace(work);
            chosen = int(rng.categorical(work));
        }
        seq.tokens.push_back(chosen);
        if (chosen == model.vocab.eos_id()) {
            seq.terminated = true;
            break;
        }
    }
    return seq;
}

double mean_step_entropy(const PolicyModel& model, std::span<const double> params,
                         const PromptContext& prompt, const TokenSeq& seq) {
    if (seq.tokens.empty()) return 0.0;
    std::vector<double> probs(std::size_t(model.vocab.size()));
    double total = 0.0;
    for (std::size_t t = 0; t < seq.tokens.size(); ++t) {
        conditional_probs(model, params, prompt, std::span<const int>(seq.tokens.data(), t),
                          probs);
        double h = 0.0;
        for (double p : probs)
            if (p > 0.0) h -= p * std::log(p);
        total += h;
    }
    return total / double(seq.tokens.size());
}

}  // namespace kklab::policy
