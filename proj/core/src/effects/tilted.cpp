#include "kklab/effects/tilted.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kklab/effects/effects.hpp"

namespace kklab::effects {

TiltedPolicy optimal_tilted_policy(const policy::PolicyModel& model,
                                   std::span<const double> params,
                                   const task::PromptSet& train_set,
                                   const EvalGradient& eval_grad, double beta,
                                   std::span<const double> p_star, double budget) {
    if (!(beta > 0.0)) throw std::invalid_argument("optimal_tilted_policy: beta must be > 0");
    if (train_set.empty()) throw std::invalid_argument("optimal_tilted_policy: empty prompt set");
    if (p_star.size() != train_set.size())
        throw std::invalid_argument("optimal_tilted_policy: one p_star per prompt required");
    const task::Task& task = *train_set.task;

    TiltedPolicy tilted;
    tilted.beta = beta;
    for (std::size_t p = 0; p < train_set.indices.size(); ++p) {
        const int index = train_set.indices[p];
        const double target_acc = p_star[p];
        if (!(target_acc > 0.0 && target_acc <= 1.0))
            throw std::invalid_argument("optimal_tilted_policy: p_star must lie in (0, 1]");

        TiltedPrompt tp;
        tp.prompt_index = index;
        tp.p_star = target_acc;
        const auto& prompt = task.prompt(index);
        policy::for_each_response(
            model, params, prompt, task.l_max(),
            [&](const policy::ResponseVisit& v) {
                if (!v.terminated) return;
                policy::TokenSeq seq{v.tokens, true};
                tp.responses.push_back(seq);
                tp.base_mass.push_back(std::exp(v.logprob));
                tp.rewards.push_back(task.reward(index, seq));
                tp.effects.push_back(sample_effect(model, params, prompt, seq, eval_grad.g));
            },
            budget);

        // stable log-space normalizer over the correct set
        const double scale = 1.0 / (beta * target_acc);
        double max_exponent = -std::numeric_limits<double>::infinity();
        bool any_correct = false;
        bool any_incorrect = false;
        for (std::size_t i = 0; i < tp.responses.size(); ++i) {
            if (tp.rewards[i] == 1) {
                any_correct = true;
                max_exponent = std::max(max_exponent,
                                        std::log(tp.base_mass[i]) + scale * tp.effects[i]);
            } else {
                any_incorrect = true;
            }
        }
        if (!any_correct)
            throw std::runtime_error(
                "optimal_tilted_policy: no enumerable correct response for prompt " +
                std::to_string(index));
        if (!any_incorrect && target_acc < 1.0)
            throw std::runtime_error(
                "optimal_tilted_policy: p_star < 1 but every response is correct on prompt " +
                std::to_string(index));

        double z_plus_scaled = 0.0;  // z_plus * exp(-max_exponent)
        tp.z_minus = 0.0;
        for (std::size_t i = 0; i < tp.responses.size(); ++i) {
            if (tp.rewards[i] == 1)
                z_plus_scaled +=
                    std::exp(std::log(tp.base_mass[i]) + scale * tp.effects[i] - max_exponent);
            else
                tp.z_minus += tp.base_mass[i];
        }
        tp.z_plus = z_plus_scaled * std::exp(max_exponent);
        if (target_acc < 1.0 && tp.z_minus <= 0.0)
            throw std::runtime_error("optimal_tilted_policy: incorrect mass underflow on prompt " +
                                     std::to_string(index));

        tp.tilted_mass.resize(tp.responses.size());
        const double log_z_plus = std::log(z_plus_scaled) + max_exponent;
        for (std::size_t i = 0; i < tp.responses.size(); ++i) {
            if (tp.rewards[i] == 1) {
                tp.tilted_mass[i] =
                    target_acc * std::exp(std::log(tp.base_mass[i]) + scale * tp.effects[i] -
                                          log_z_plus);
            } else {
                tp.tilted_mass[i] =
                    target_acc < 1.0 ? (1.0 - target_acc) * tp.base_mass[i] / tp.z_minus : 0.0;
            }
        }
        tilted.prompts.push_back(std::move(tp));
    }
    return tilted;
}

std::vector<double> filtered_distribution(const TiltedPrompt& prompt) {
    std::vector<double> out;
    double total = 0.0;
    for (std::size_t i = 0; i < prompt.responses.size(); ++i) {
        if (prompt.rewards[i] == 1) {
            out.push_back(prompt.tilted_mass[i]);
            total += prompt.tilted_mass[i];
        }
    }
    for (double& v : out) v /= total;
    return out;
}

double total_variation(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("total_variation: size mismatch");
    double tv = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) tv += std::fabs(a[i] - b[i]);
    return 0.5 * tv;
}

bool verify_corollary1(const policy::PolicyModel& model, std::span<const double> params,
                       const task::PromptSet& train_set, const EvalGradient& eval_grad,
                       double beta, std::span<const double> p_star,
                       std::span<const double> p_prime, double tol, double budget) {
    if (p_prime.size() != p_star.size())
        throw std::invalid_argument("verify_corollary1: p_prime size mismatch");
    const auto base = optimal_tilted_policy(model, params, train_set, eval_grad, beta, p_star,
                                            budget);
    for (std::size_t p = 0; p < train_set.indices.size(); ++p) {
        // beta' p' = beta p*, prompt by prompt
        const double beta_prime = beta * p_star[p] / p_prime[p];
        std::vector<double> p_one{p_prime[p]};
        task::PromptSet single;
        single.task = train_set.task;
        single.indices = {train_set.indices[p]};
        const auto alt = optimal_tilted_policy(model, params, single, eval_grad, beta_prime,
                                               p_one, budget);
        const auto f0 = filtered_distribution(base.prompts[p]);
        const auto f1 = filtered_distribution(alt.prompts[0]);
        if (total_variation(f0, f1) > tol) return false;
    }
    return true;
}

}  // namespace kklab::effects
