#include "kklab/effects/effects.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "kklab/util/rng.hpp"
#include "kklab/util/stats.hpp"
#include "kklab/util/vecmath.hpp"

namespace kklab::effects {

double sample_effect(const policy::PolicyModel& model, std::span<const double> params,
                     const policy::PromptContext& prompt, const policy::TokenSeq& response,
                     std::span<const double> eval_grad) {
    const auto grad = policy::grad_logprob(model, params, prompt, response);
    return vec::dot(eval_grad, grad);
}

double drift_rl(const policy::PolicyModel& model, std::span<const double> params,
                const task::PromptSet& train_set, const EvalGradient& eval_grad,
                double budget) {
    EvalMethod method = EvalMethod::exact(budget);
    const auto train_grad = eval_gradient(model, params, train_set, method);
    // E_{D_t}[V r] = g_e . E_{D_t}[grad log pi * r]
    return vec::dot(eval_grad.g, train_grad.g);
}

McEstimate drift_rl_mc(const policy::PolicyModel& model, std::span<const double> params,
                       const task::PromptSet& train_set, const EvalGradient& eval_grad,
                       int samples_per_prompt, std::uint64_t seed) {
    if (train_set.empty()) throw std::invalid_argument("drift_rl_mc: empty prompt set");
    const task::Task& task = *train_set.task;
    policy::SampleOptions opt;
    opt.l_max = task.l_max();
    std::vector<double> values;
    for (int index : train_set.indices) {
        const auto& prompt = task.prompt(index);
        for (int i = 0; i < samples_per_prompt; ++i) {
            const auto response = policy::sample(
                model, params, prompt, opt,
                derive_seed(seed, std::uint64_t(index), std::uint64_t(i)));
            const int r = task.reward(index, response);
            double v = 0.0;
            if (r == 1) v = sample_effect(model, params, prompt, response, eval_grad.g);
            values.push_back(v * double(r));
        }
    }
    return {stats::mean(values), stats::standard_error(values)};
}

namespace {

struct PromptScan {
    double p_current = 0.0;        // sum of pi over correct responses
    double p_target = 0.0;         // sum of pi_target over correct responses
    double current_v_sum = 0.0;    // sum pi * V over correct responses
    double target_v_sum = 0.0;     // sum pi_target * V over correct responses
};

// single enumeration pass collecting everything the drift formulas need
PromptScan scan_prompt(const policy::PolicyModel& model, std::span<const double> params,
                       std::span<const double> target_params, bool with_target,
                       const task::Task& task, int index, std::span<const double> eval_grad,
                       double budget) {
    PromptScan scan;
    const auto& prompt = task.prompt(index);
    policy::for_each_response(
        model, params, prompt, task.l_max(),
        [&](const policy::ResponseVisit& v) {
            if (!v.terminated) return;
            policy::TokenSeq seq{v.tokens, true};
            if (task.reward(index, seq) != 1) return;
            const double mass = std::exp(v.logprob);
            const double effect =
                sample_effect(model, params, prompt, seq, eval_grad);
            scan.p_current += mass;
            scan.current_v_sum += mass * effect;
            if (with_target) {
                const double target_mass =
                    std::exp(policy::logprob(model, target_params, prompt, seq));
                scan.p_target += target_mass;
                scan.target_v_sum += target_mass * effect;
            }
        },
        budget);
    return scan;
}

}  // namespace

double drift_sft(const policy::PolicyModel& model, std::span<const double> params,
                 std::span<const double> target_params, const task::PromptSet& train_set,
                 const EvalGradient& eval_grad, double budget) {
    if (train_set.empty()) throw std::invalid_argument("drift_sft: empty prompt set");
    const task::Task& task = *train_set.task;
    double total = 0.0;
    std::vector<int> dead_prompts;
    for (int index : train_set.indices) {
        const auto scan =
            scan_prompt(model, params, target_params, true, task, index, eval_grad.g, budget);
        if (scan.p_target <= 0.0) {
            dead_prompts.push_back(index);
            continue;
        }
        total += scan.target_v_sum / scan.p_target;
    }
    if (!dead_prompts.empty()) {
        std::ostringstream msg;
        msg << "drift_sft: target policy has zero accuracy on prompts:";
        for (int p : dead_prompts) msg << ' ' << p;
        throw std::runtime_error(msg.str());
    }
    return total / double(train_set.size());
}

double dataset_effect(const policy::PolicyModel& model, std::span<const double> params,
                      std::span<const double> target_params, const task::PromptSet& train_set,
                      const EvalGradient& eval_grad, double budget) {
    return drift_sft(model, params, target_params, train_set, eval_grad, budget);
}

double delta_drift_direct(const policy::PolicyModel& model, std::span<const double> params,
                          std::span<const double> target_params,
                          const task::PromptSet& train_set, const EvalGradient& eval_grad,
                          double budget) {
    if (train_set.empty()) throw std::invalid_argument("delta_drift_direct: empty prompt set");
    const task::Task& task = *train_set.task;
    double total = 0.0;
    for (int index : train_set.indices) {
        const auto& prompt = task.prompt(index);
        // p_target(s) first, then the expectation in one more pass
        double p_target = 0.0;
        policy::for_each_response(
            model, target_params, prompt, task.l_max(),
            [&](const policy::ResponseVisit& v) {
                if (!v.terminated) return;
                policy::TokenSeq seq{v.tokens, true};
                if (task.reward(index, seq) == 1) p_target += std::exp(v.logprob);
            },
            budget);
        if (p_target <= 0.0)
            throw std::runtime_error("delta_drift_direct: zero target accuracy on prompt " +
                                     std::to_string(index));
        double contribution = 0.0;
        policy::for_each_response(
            model, params, prompt, task.l_max(),
            [&](const policy::ResponseVisit& v) {
                if (!v.terminated) return;
                policy::TokenSeq seq{v.tokens, true};
                if (task.reward(index, seq) != 1) return;
                const double mass = std::exp(v.logprob);
                const double target_mass =
                    std::exp(policy::logprob(model, target_params, prompt, seq));
                const double effect = sample_effect(model, params, prompt, seq, eval_grad.g);
                contribution += mass * effect * (target_mass / (p_target * mass) - 1.0);
            },
            budget);
        total += contribution;
    }
    return total / double(train_set.size());
}

DriftReport drift_report(const policy::PolicyModel& model, std::span<const double> params,
                         const std::vector<double>* target_params,
                         const task::PromptSet& train_set, const EvalGradient& eval_grad,
                         double budget) {
    DriftReport report;
    report.method = "exact-enumeration";
    report.mu_rl = drift_rl(model, params, train_set, eval_grad, budget);
    if (target_params) {
        report.has_sft = true;
        report.mu_sft = drift_sft(model, params, *target_params, train_set, eval_grad, budget);
        report.delta_mu = report.mu_sft - report.mu_rl;
    }
    return report;
}

}  // namespace kklab::effects
