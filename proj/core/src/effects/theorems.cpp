#include "kklab/effects/theorems.hpp"

#include <cmath>
#include <stdexcept>

#include "kklab/effects/effects.hpp"

namespace kklab::effects {

Thm2Result verify_thm2(const policy::PolicyModel& model, std::span<const double> params,
                       const task::PromptSet& prompt_set, const EvalGradient& eval_grad,
                       double budget) {
    if (prompt_set.empty()) throw std::invalid_argument("verify_thm2: empty prompt set");
    const task::Task& task = *prompt_set.task;

    double lhs = 0.0;
    double mu = 0.0;
    for (int index : prompt_set.indices) {
        const auto& prompt = task.prompt(index);
        double p_s = 0.0;
        double v2_sum = 0.0;
        double v_sum = 0.0;
        policy::for_each_response(
            model, params, prompt, task.l_max(),
            [&](const policy::ResponseVisit& v) {
                if (!v.terminated) return;
                policy::TokenSeq seq{v.tokens, true};
                if (task.reward(index, seq) != 1) return;
                const double mass = std::exp(v.logprob);
                const double effect = sample_effect(model, params, prompt, seq, eval_grad.g);
                p_s += mass;
                v_sum += mass * effect;
                v2_sum += mass * effect * effect;
            },
            budget);
        // p(s) = 0 forces r = 0 almost surely, so the summand V^2 r / p(s)
        // vanishes before the division is ever needed
        if (p_s > 0.0) lhs += v2_sum / p_s;
        mu += v_sum;
    }
    const double inv = 1.0 / double(prompt_set.size());
    Thm2Result result;
    result.lhs = lhs * inv;
    result.rhs = (mu * inv) * (mu * inv);
    result.holds = result.lhs >= result.rhs - 1e-12;
    return result;
}

}  // namespace kklab::effects
