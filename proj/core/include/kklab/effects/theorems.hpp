#pragma once

#include "kklab/effects/eval.hpp"

namespace kklab::effects {

struct Thm2Result {
    double lhs = 0.0;  // E_{s, a ~ pi}[V^2 r / p(s)]
    double rhs = 0.0;  // (E_{s, a ~ pi}[V r])^2
    bool holds = false;
};

// Growth-rate bound for the filtered dataset effect when the target policy
// is the current policy and D_t = D_e: lhs >= rhs up to 1e-12 slack.
// Throws when some prompt has p(s) = 0.
Thm2Result verify_thm2(const policy::PolicyModel& model, std::span<const double> params,
                       const task::PromptSet& prompt_set, const EvalGradient& eval_grad,
                       double budget = policy::kDefaultEnumerationBudget);

}  // namespace kklab::effects
