#include "kklab/train/distill.hpp"

#include <sstream>
#include <stdexcept>

#include "kklab/util/rng.hpp"

namespace kklab::train {

DistillSet build_distill_set(const task::Task& task, const policy::PolicyModel& model,
                             std::span<const double> source_params,
                             const task::PromptSet& prompts, int l_filter,
                             int samples_per_prompt, double temperature, std::uint64_t seed) {
    if (prompts.empty()) throw std::invalid_argument("build_distill_set: empty prompt set");
    if (samples_per_prompt < 1)
        throw std::invalid_argument("build_distill_set: samples_per_prompt must be >= 1");
    if (l_filter < 1) throw std::invalid_argument("build_distill_set: l_filter must be >= 1");

    DistillSet set;
    policy::SampleOptions opt;
    opt.temperature = temperature;
    opt.l_max = task.l_max();
    for (std::size_t p = 0; p < prompts.indices.size(); ++p) {
        const int prompt_index = prompts.indices[p];
        int kept_here = 0;
        for (int i = 0; i < samples_per_prompt; ++i) {
            const auto response =
                policy::sample(model, source_params, task.prompt(prompt_index), opt,
                               derive_seed(seed, std::uint64_t(p), std::uint64_t(i)));
            set.n_sampled += 1;
            const bool within = int(response.length()) <= l_filter;
            if (within && task.reward(prompt_index, response) == 1) {
                set.examples.push_back({prompt_index, response});
                set.n_kept += 1;
                kept_here += 1;
            }
        }
        set.per_prompt_accuracy.push_back(double(kept_here) / double(samples_per_prompt));
    }

    if (set.n_kept == 0) {
        std::ostringstream msg;
        msg << "build_distill_set: no sample passed the filter; per-prompt accuracy:";
        for (std::size_t p = 0; p < prompts.indices.size(); ++p)
            msg << " s" << prompts.indices[p] << "=" << set.per_prompt_accuracy[p];
        throw std::runtime_error(msg.str());
    }
    return set;
}

RedistillResult redistill(const task::Task& task, const policy::PolicyModel& model,
                          std::span<const double> rl_params, const task::PromptSet& prompts,
                          std::vector<double> fresh_base_params, const SFTConfig& sft_config,
                          int l_filter, int samples_per_prompt, double temperature,
                          std::uint64_t seed, const AccuracyEvaluator& evaluator) {
    RedistillResult result;
    result.distill_set = build_distill_set(task, model, rl_params, prompts, l_filter,
                                           samples_per_prompt, temperature,
                                           derive_seed(seed, 0x64697374ULL));
    if (evaluator) result.accuracy_before = evaluator(fresh_base_params);
    result.params = run_sft(task, model, std::move(fresh_base_params),
                            result.distill_set.examples, sft_config,
                            derive_seed(seed, 0x72656469ULL));
    if (evaluator) result.accuracy_after = evaluator(result.params);
    return result;
}

}  // namespace kklab::train
