#pragma once

#include <functional>
#include <vector>

#include "kklab/policy/policy.hpp"

namespace kklab::policy {

inline constexpr double kDefaultEnumerationBudget = 1e7;

// Visit of one response during exhaustive walk: terminated sequences plus
// the non-terminated length-l_max boundary prefixes (whose probability mass
// is exactly the truncation mass).
struct ResponseVisit {
    const std::vector<int>& tokens;  // includes EOS when terminated
    double logprob;
    bool terminated;
};

using ResponseVisitor = std::function<void(const ResponseVisit&)>;

// Throws std::runtime_error when V^l_max exceeds the budget. Visit order is
// lexicographic with EOS ordered before content tokens, so shorter
// sequences appear before their extensions.
void for_each_response(const PolicyModel& model, std::span<const double> params,
                       const PromptContext& prompt, int l_max, const ResponseVisitor& visit,
                       double budget = kDefaultEnumerationBudget);

// All terminated sequences of length <= l_max, policy-independent, in the
// same order as for_each_response.
std::vector<TokenSeq> enumerate_responses(const Vocab& vocab, int l_max,
                                          double budget = kDefaultEnumerationBudget);

// number of terminated sequences of length <= l_max: sum_{l=0}^{l_max-1} (V-1)^l
double terminated_count(int vocab_size, int l_max);

struct MassSummary {
    double terminated_mass = 0.0;
    double boundary_mass = 0.0;  // non-terminated mass stuck at l_max
};

MassSummary probability_masses(const PolicyModel& model, std::span<const double> params,
                               const PromptContext& prompt, int l_max,
                               double budget = kDefaultEnumerationBudget);

}  // namespace kklab::policy
