#include "kklab/effects/eval.hpp"

#include <cmath>
#include <stdexcept>

#include "kklab/util/rng.hpp"

namespace kklab::effects {

std::string eval_gradient_source_name(EvalGradient::Source source) {
    switch (source) {
        case EvalGradient::Source::ExactEnumeration: return "exact-enumeration";
        case EvalGradient::Source::MonteCarlo: return "monte-carlo";
        case EvalGradient::Source::ParamDelta: return "param-delta";
    }
    return "?";
}

EvalResult eval_accuracy(const policy::PolicyModel& model, std::span<const double> params,
                         const task::PromptSet& eval_set, const EvalMethod& method) {
    if (eval_set.empty()) throw std::invalid_argument("eval_accuracy: empty prompt set");
    const task::Task& task = *eval_set.task;
    const double inv_prompts = 1.0 / double(eval_set.size());

    if (method.kind == EvalMethod::Kind::Exact) {
        double acc = 0.0;
        for (int index : eval_set.indices) {
            policy::for_each_response(
                model, params, task.prompt(index), task.l_max(),
                [&](const policy::ResponseVisit& v) {
                    if (!v.terminated) return;
                    policy::TokenSeq seq{v.tokens, true};
                    if (task.reward(index, seq) == 1) acc += std::exp(v.logprob);
                },
                method.budget);
        }
        return {acc * inv_prompts, 0.0};
    }

    double total = 0.0;
    double var_sum = 0.0;
    policy::SampleOptions opt;
    opt.l_max = task.l_max();
    for (int index : eval_set.indices) {
        int hits = 0;
        for (int i = 0; i < method.samples_per_prompt; ++i) {
            const auto response =
                policy::sample(model, params, task.prompt(index), opt,
                               derive_seed(method.seed, std::uint64_t(index), std::uint64_t(i)));
            hits += task.reward(index, response);
        }
        const double p_hat = double(hits) / double(method.samples_per_prompt);
        total += p_hat;
        var_sum += p_hat * (1.0 - p_hat) / double(method.samples_per_prompt);
    }
    return {total * inv_prompts, inv_prompts * std::sqrt(var_sum)};
}

EvalGradient eval_gradient(const policy::PolicyModel& model, std::span<const double> params,
                           const task::PromptSet& eval_set, const EvalMethod& method) {
    if (eval_set.empty()) throw std::invalid_argument("eval_gradient: empty prompt set");
    const task::Task& task = *eval_set.task;
    const double inv_prompts = 1.0 / double(eval_set.size());

    EvalGradient out;
    out.g.assign(model.param_dim(), 0.0);

    if (method.kind == EvalMethod::Kind::Exact) {
        out.source = EvalGradient::Source::ExactEnumeration;
        for (int index : eval_set.indices) {
            const auto& prompt = task.prompt(index);
            policy::for_each_response(
                model, params, prompt, task.l_max(),
                [&](const policy::ResponseVisit& v) {
                    if (!v.terminated) return;
                    policy::TokenSeq seq{v.tokens, true};
                    if (task.reward(index, seq) != 1) return;
                    policy::accumulate_grad_logprob(model, params, prompt, seq,
                                                    std::exp(v.logprob) * inv_prompts, out.g);
                },
                method.budget);
        }
        return out;
    }

    out.source = EvalGradient::Source::MonteCarlo;
    policy::SampleOptions opt;
    opt.l_max = task.l_max();
    const double inv_n = 1.0 / double(method.samples_per_prompt);
    for (int index : eval_set.indices) {
        const auto& prompt = task.prompt(index);
        for (int i = 0; i < method.samples_per_prompt; ++i) {
            const auto response =
                policy::sample(model, params, prompt, opt,
                               derive_seed(method.seed, std::uint64_t(index), std::uint64_t(i)));
            if (task.reward(index, response) != 1) continue;
            policy::accumulate_grad_logprob(model, params, prompt, response,
                                            inv_n * inv_prompts, out.g);
        }
    }
    return out;
}

}  // namespace kklab::effects
