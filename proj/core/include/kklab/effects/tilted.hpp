#pragma once

#include <vector>

#include "kklab/effects/eval.hpp"

namespace kklab::effects {

// Closed-form optimum of the delta-drift objective under a KL budget:
// correct responses are exponentially reweighted by their sample effect,
// incorrect responses keep the base shape, and the per-prompt accuracy is
// pinned to p_star.
struct TiltedPrompt {
    int prompt_index = -1;
    std::vector<policy::TokenSeq> responses;  // enumerated terminated responses
    std::vector<double> base_mass;            // pi(a | s)
    std::vector<double> tilted_mass;          // pi*(a | s)
    std::vector<int> rewards;
    std::vector<double> effects;  // V(a, s, theta)
    double p_star = 0.0;
    double z_plus = 0.0;   // sum over correct of pi * exp(V / (beta p*))
    double z_minus = 0.0;  // sum over incorrect of pi
};

struct TiltedPolicy {
    double beta = 0.0;
    std::vector<TiltedPrompt> prompts;
};

// p_star holds one target accuracy per prompt of `train_set` (same order).
// Throws when a prompt has no enumerable correct response, or when
// p_star < 1 but no incorrect response exists to carry the residual mass.
TiltedPolicy optimal_tilted_policy(const policy::PolicyModel& model,
                                   std::span<const double> params,
                                   const task::PromptSet& train_set,
                                   const EvalGradient& eval_grad, double beta,
                                   std::span<const double> p_star,
                                   double budget = policy::kDefaultEnumerationBudget);

// correctness-filtered distribution over the correct responses (sums to 1)
std::vector<double> filtered_distribution(const TiltedPrompt& prompt);

// total variation distance between two distributions on the same support
double total_variation(std::span<const double> a, std::span<const double> b);

// The filtered optimum depends on beta and p_star only through their
// product: (beta, p_star) and (beta' = beta p*/p', p') give the same
// filtered policy. Returns true when the two filtered distributions match
// within `tol` total variation on every prompt.
bool verify_corollary1(const policy::PolicyModel& model, std::span<const double> params,
                       const task::PromptSet& train_set, const EvalGradient& eval_grad,
                       double beta, std::span<const double> p_star,
                       std::span<const double> p_prime, double tol = 1e-10,
                       double budget = policy::kDefaultEnumerationBudget);

}  // namespace kklab::effects
