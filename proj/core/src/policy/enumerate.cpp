#include "kklab/policy/enumerate.hpp"

#include <cmath>
#include <stdexcept>

namespace kklab::policy {

namespace {

void check_budget(int vocab_size, int l_max, double budget) {
    if (l_max < 1) throw std::invalid_argument("enumerate: l_max must be >= 1");
    const double total = std::pow(double(vocab_size), double(l_max));
    if (total > budget)
        throw std::runtime_error("enumerate: V^l_max = " + std::to_string(total) +
                                 " exceeds budget " + std::to_string(budget));
}

struct Walker {
    const PolicyModel& model;
    std::span<const double> params;
    const PromptContext& prompt;
    int l_max;
    const ResponseVisitor& visit;

    std::vector<int> prefix;
    std::vector<double> probs;

    void walk(double logp) {
        if (int(prefix.size()) == l_max) {
            visit({prefix, logp, false});
            return;
        }
        probs.resize(std::size_t(model.vocab.size()));
        conditional_probs(model, params, prompt, prefix, probs);
        const std::vector<double> local = probs;  // recursion reuses the buffer

        const int eos = model.vocab.eos_id();
        prefix.push_back(eos);
        visit({prefix, logp + std::log(local[std::size_t(eos)]), true});
        prefix.pop_back();

        for (int v = 0; v < model.vocab.size(); ++v) {
            if (v == eos) continue;
            prefix.push_back(v);
            walk(logp + std::log(local[std::size_t(v)]));
            prefix.pop_back();
        }
    }
};

}  // namespace

void for_each_response(const PolicyModel& model, std::span<const double> params,
                       const PromptContext& prompt, int l_max, const ResponseVisitor& visit,
                       double budget) {
    check_budget(model.vocab.size(), l_max, budget);
    Walker w{model, params, prompt, l_max, visit, {}, {}};
    w.walk(0.0);
}

namespace {

void enumerate_rec(const Vocab& vocab, int l_max, std::vector<int>& prefix,
                   std::vector<TokenSeq>& out) {
    if (int(prefix.size()) == l_max) return;
    std::vector<int> terminated = prefix;
    terminated.push_back(vocab.eos_id());
    out.push_back(TokenSeq{std::move(terminated), true});
    for (int v = 0; v < vocab.size(); ++v) {
        if (v == vocab.eos_id()) continue;
        prefix.push_back(v);
        enumerate_rec(vocab, l_max, prefix, out);
        prefix.pop_back();
    }
}

}  // namespace

std::vector<TokenSeq> enumerate_responses(const Vocab& vocab, int l_max, double budget) {
    check_budget(vocab.size(), l_max, budget);
    std::vector<TokenSeq> out;
    std::vector<int> prefix;
    enumerate_rec(vocab, l_max, prefix, out);
    return out;
}

double terminated_count(int vocab_size, int l_max) {
    double total = 0.0;
    double term = 1.0;
    for (int l = 0; l < l_max; ++l) {
        total += term;
        term *= double(vocab_size - 1);
    }
    return total;
}

MassSummary probability_masses(const PolicyModel& model, std::span<const double> params,
                               const PromptContext& prompt, int l_max, double budget) {
    MassSummary summary;
    for_each_response(
        model, params, prompt, l_max,
        [&](const ResponseVisit& v) {
            const double mass = std::exp(v.logprob);
            if (v.terminated) summary.terminated_mass += mass;
            else summary.boundary_mass += mass;
        },
        budget);
    return summary;
}

}  // namespace kklab::policy
