#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kklab/policy/enumerate.hpp"
#include "kklab/task/task.hpp"

namespace kklab::effects {

// accuracy / gradient evaluation method
struct EvalMethod {
    enum class Kind { Exact, MonteCarlo } kind = Kind::Exact;
    int samples_per_prompt = 2000;
    std::uint64_t seed = 0;
    double budget = policy::kDefaultEnumerationBudget;

    static EvalMethod exact(double budget = policy::kDefaultEnumerationBudget) {
        EvalMethod m;
        m.kind = Kind::Exact;
        m.budget = budget;
        return m;
    }
    static EvalMethod monte_carlo(int samples_per_prompt, std::uint64_t seed) {
        EvalMethod m;
        m.kind = Kind::MonteCarlo;
        m.samples_per_prompt = samples_per_prompt;
        m.seed = seed;
        return m;
    }
};

struct EvalResult {
    double value = 0.0;
    double std_error = 0.0;  // 0 for exact
};

// test accuracy Psi(theta) = E_{s ~ D_e, a ~ pi_theta}[r(a, s)]
EvalResult eval_accuracy(const policy::PolicyModel& model, std::span<const double> params,
                         const task::PromptSet& eval_set, const EvalMethod& method);

struct EvalGradient {
    std::vector<double> g;
    enum class Source { ExactEnumeration, MonteCarlo, ParamDelta } source =
        Source::ExactEnumeration;
};

std::string eval_gradient_source_name(EvalGradient::Source source);

// E_{s ~ D_e, a ~ pi_theta}[grad log pi * r]; equals grad Psi by the
// score-function identity (up to truncation mass in exact mode)
EvalGradient eval_gradient(const policy::PolicyModel& model, std::span<const double> params,
                           const task::PromptSet& eval_set, const EvalMethod& method);

}  // namespace kklab::effects
