#include "kklab/train/grpo.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "kklab/util/rng.hpp"
#include "kklab/util/vecmath.hpp"

namespace kklab::train {

namespace {

std::vector<int> select_prompts(const task::PromptSet& train_set, int count, Rng& rng) {
    std::vector<int> pool = train_set.indices;
    if (count <= int(pool.size())) {
        // partial Fisher-Yates: first `count` entries
        for (int i = 0; i < count; ++i) {
            const std::size_t j = std::size_t(i) + rng.uniform_int(pool.size() - std::size_t(i));
            std::swap(pool[std::size_t(i)], pool[j]);
        }
        pool.resize(std::size_t(count));
        return pool;
    }
    std::vector<int> out;
    out.reserve(std::size_t(count));
    for (int i = 0; i < count; ++i) out.push_back(pool[rng.uniform_int(pool.size())]);
    return out;
}

}  // namespace

StepStats grpo_step(const task::Task& task, const task::PromptSet& train_set,
                    const policy::PolicyModel& model, std::vector<double>& params,
                    AdamState& adam, const RLConfig& config, int step_index,
                    std::uint64_t run_seed, std::span<const double> reference_params,
                    RolloutBatch* rollout_out, std::vector<double>* ascent_grad_out) {
    config.validate();
    if (train_set.empty()) throw std::runtime_error("grpo_step: empty training prompt set");
    if (!(task.vocab() == model.vocab))
        throw std::invalid_argument("grpo_step: task and model vocab differ");
    if (config.kl_coefficient > 0.0 && reference_params.size() != params.size())
        throw std::invalid_argument("grpo_step: KL penalty requires reference parameters");

    Rng prompt_rng(derive_seed(run_seed, std::uint64_t(step_index), 0x70726f6dULL));
    const auto selected = select_prompts(train_set, config.prompts_per_rollout, prompt_rng);

    // rollout from pi_old = current params
    RolloutBatch batch;
    batch.group_size = config.group_size;
    policy::SampleOptions sample_opt;
    sample_opt.temperature = config.temperature;
    sample_opt.l_max = config.l_max;
    for (std::size_t g = 0; g < selected.size(); ++g) {
        for (int i = 0; i < config.group_size; ++i) {
            RolloutSample s;
            s.prompt_index = selected[g];
            s.group = int(g);
            const auto seed = derive_seed(run_seed, std::uint64_t(step_index),
                                          std::uint64_t(g) * 131071 + std::uint64_t(i));
            s.response = policy::sample(model, params, task.prompt(s.prompt_index), sample_opt,
                                        seed);
            if (s.response.tokens.empty())
                throw std::runtime_error("grpo_step: sampled an empty rollout");
            s.reward = task.reward(s.prompt_index, s.response);
            s.behavior_logprobs =
                policy::per_token_logprobs(model, params, task.prompt(s.prompt_index), s.response);
            batch.samples.push_back(std::move(s));
        }
    }
    batch = compute_advantages(std::move(batch));

    std::size_t total_tokens = 0;
    for (const auto& s : batch.samples) total_tokens += s.response.length();
    if (total_tokens == 0) throw std::runtime_error("grpo_step: empty rollout buffer");
    const double inv_tokens = 1.0 / double(total_tokens);

    // gradient of the clipped token-mean surrogate (ascent direction)
    std::vector<double> grad_ascent(params.size(), 0.0);
    double surrogate = 0.0;
    double kl_value = 0.0;
    std::size_t clipped_tokens = 0;
    std::vector<double> token_weights;
    for (const auto& s : batch.samples) {
        const auto& prompt = task.prompt(s.prompt_index);
        const auto& new_logprobs = s.behavior_logprobs;  // pi_theta == pi_old at the update
        std::vector<double> ref_logprobs;
        if (config.kl_coefficient > 0.0)
            ref_logprobs = policy::per_token_logprobs(model, reference_params, prompt, s.response);
        token_weights.assign(s.response.length(), 0.0);
        for (std::size_t t = 0; t < s.response.length(); ++t) {
            const double ratio = std::exp(new_logprobs[t] - s.behavior_logprobs[t]);
            const double clipped =
                std::clamp(ratio, 1.0 - config.clip_ratio, 1.0 + config.clip_ratio);
            const double unclipped_term = ratio * s.advantage;
            const double clipped_term = clipped * s.advantage;
            surrogate += inv_tokens * std::min(unclipped_term, clipped_term);
            if (clipped_term < unclipped_term) {
                clipped_tokens += 1;  // clip active: no gradient through this token
            } else {
                token_weights[t] += inv_tokens * ratio * s.advantage;
            }
            if (config.kl_coefficient > 0.0) {
                // k3 estimator of KL(pi_theta || pi_ref) on sampled tokens
                const double log_ratio_ref = ref_logprobs[t] - new_logprobs[t];
                kl_value += inv_tokens * (std::exp(log_ratio_ref) - 1.0 - log_ratio_ref);
                token_weights[t] -=
                    inv_tokens * config.kl_coefficient * (1.0 - std::exp(log_ratio_ref));
            }
        }
        policy::accumulate_grad_logprob_weighted(model, params, prompt, s.response,
                                                 token_weights, grad_ascent);
    }

    StepStats stats;
    stats.step = step_index;
    double acc = 0.0, len = 0.0, ent = 0.0;
    for (const auto& s : batch.samples) {
        acc += s.reward;
        len += double(s.response.length());
        ent += policy::mean_step_entropy(model, params, task.prompt(s.prompt_index), s.response) *
               double(s.response.length());
    }
    stats.train_acc = acc / double(batch.samples.size());
    stats.mean_len = len / double(batch.samples.size());
    stats.entropy = ent / double(total_tokens);
    stats.clip_frac = double(clipped_tokens) / double(total_tokens);
    stats.loss = -surrogate + config.kl_coefficient * kl_value;
    stats.grad_norm = vec::norm(grad_ascent);
    if (ascent_grad_out) *ascent_grad_out = grad_ascent;

    if (stats.grad_norm > config.grad_clip_norm)
        vec::scale(grad_ascent, config.grad_clip_norm / stats.grad_norm);

    // Adam minimizes, so feed the descent direction
    std::vector<double> grad_descent(grad_ascent.size());
    for (std::size_t i = 0; i < grad_ascent.size(); ++i) grad_descent[i] = -grad_ascent[i];

    const double warmup_scale =
        config.warmup_steps > 0
            ? std::min(1.0, double(step_index + 1) / double(config.warmup_steps))
            : 1.0;
    adam_update(params, grad_descent, adam, config.adam, config.learning_rate * warmup_scale);

    if (rollout_out) *rollout_out = std::move(batch);
    return stats;
}

GrpoRunResult run_grpo(const task::Task& task, const task::PromptSet& train_set,
                       const policy::PolicyModel& model, std::vector<double> initial_params,
                       const RLConfig& config, int n_steps, std::uint64_t run_seed,
                       const StepObserver& observer) {
    GrpoRunResult result;
    result.params = std::move(initial_params);
    result.adam = AdamState::init(result.params.size());
    const std::vector<double> reference = result.params;
    for (int step = 0; step < n_steps; ++step) {
        const auto stats = grpo_step(task, train_set, model, result.params, result.adam, config,
                                     step, run_seed,
                                     config.kl_coefficient > 0.0
                                         ? std::span<const double>(reference)
                                         : std::span<const double>{},
                                     nullptr);
        result.trace.push_back(stats);
        if (observer) observer(step, stats, result.params);
    }
    return result;
}

}  // namespace kklab::train
