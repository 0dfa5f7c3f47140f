// Acceptance suite: one check per release criterion, each printing a single
// PASS/FAIL line. Run all, or a single one with --criterion N.

#include <algorithm>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <vector>

#include "kklab/analysis/position_profile.hpp"
#include "kklab/effects/delta_estimator.hpp"
#include "kklab/effects/effects.hpp"
#include "kklab/effects/theorems.hpp"
#include "kklab/effects/tilted.hpp"
#include "kklab/exp/verify.hpp"
#include "kklab/policy/enumerate.hpp"
#include "kklab/puzzle/cot.hpp"
#include "kklab/puzzle/generate.hpp"
#include "kklab/puzzle/grading.hpp"
#include "kklab/task/kk_task.hpp"
#include "kklab/task/synthetic_task.hpp"
#include "kklab/train/distill.hpp"
#include "kklab/train/grpo.hpp"
#include "kklab/train/sft.hpp"
#include "kklab/util/io.hpp"
#include "kklab/util/rng.hpp"
#include "kklab/util/stats.hpp"
#include "kklab/util/vecmath.hpp"
#include "oracles.hpp"

using namespace kklab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// ---------------------------------------------------------------------------
// shared toy-task builders
// ---------------------------------------------------------------------------

task::KkTask make_kk_task(int n_ppl, int count, int l_max, task::ResponseStyle style,
                          std::uint64_t seed) {
    puzzle::GeneratorOptions opt;
    opt.sample_names = false;  // one shared name set keeps the vocabulary fixed
    auto records = puzzle::generate_dataset({{n_ppl, count}}, opt, seed);
    task::KkTaskOptions topt;
    topt.style = style;
    topt.l_max = l_max;
    return task::KkTask(std::move(records), topt);
}

// format pretraining: randomized-identity targets teach the answer shape but
// not the answers, mirroring a base model that knows the output format
std::vector<double> pretrain_base(const task::KkTask& task, const policy::PolicyModel& model,
                                  int targets_per_prompt, int epochs, std::uint64_t seed) {
    train::SftDataset dataset;
    for (int i = 0; i < task.n_prompts(); ++i)
        for (int k = 0; k < targets_per_prompt; ++k)
            dataset.push_back({i, task.format_target(i, derive_seed(seed, std::uint64_t(k)))});
    train::SFTConfig cfg;
    cfg.batch_size = 32;
    cfg.learning_rate = 0.1;
    cfg.epochs = epochs;
    cfg.max_seq_len = task.l_max();
    return train::run_sft(task, model, policy::zero_params(model), dataset, cfg,
                          derive_seed(seed, 0x70726531ULL));
}

train::RLConfig toy_rl_config(int prompts, int l_max) {
    train::RLConfig cfg;
    cfg.group_size = 8;
    cfg.prompts_per_rollout = prompts;
    cfg.train_batch_size = 8 * prompts;
    cfg.clip_ratio = 0.2;
    cfg.learning_rate = 0.05;
    cfg.warmup_steps = 4;
    cfg.adam = {0.5, 0.999, 1e-8};
    cfg.temperature = 1.0;
    cfg.l_max = l_max;
    cfg.grad_clip_norm = 1.0;
    return cfg;
}

double mc_accuracy(const policy::PolicyModel& model, std::span<const double> params,
                   const task::PromptSet& prompts, int samples, std::uint64_t seed) {
    return effects::eval_accuracy(model, params, prompts,
                                  effects::EvalMethod::monte_carlo(samples, seed))
        .value;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss << v;
    return ss.str();
}

// ---------------------------------------------------------------------------
// criterion 1: oracle exactness of the analytic gradients
// ---------------------------------------------------------------------------

Outcome criterion1() {
    Rng rng(101);
    double worst_logprob = 0.0;
    for (int c = 0; c < 100; ++c) {
        policy::PolicyModel model;
        model.kind = c % 2 == 0 ? policy::PolicyKind::Tabular : policy::PolicyKind::LinearSoftmax;
        model.vocab = task::generic_vocab(3 + int(rng.uniform_int(3)));
        model.context_order = 1 + int(rng.uniform_int(2));
        model.n_prompt_slots = 2;
        model.prompt_vocab_size = 2;
        model.validate();
        const auto params = policy::gaussian_params(model, 0.8, rng.next_u64());
        policy::PromptContext prompt;
        prompt.slot = int(rng.uniform_int(2));
        prompt.tokens = {prompt.slot};
        prompt.prompt_vocab_size = 2;
        std::vector<int> content;
        const int len = int(rng.uniform_int(5));
        for (int i = 0; i < len; ++i)
            content.push_back(int(rng.uniform_int(std::uint64_t(model.vocab.size() - 1))));
        const auto seq = policy::make_terminated(std::move(content), model.vocab);

        const auto exact = policy::grad_logprob(model, params, prompt, seq);
        const auto fd = oracles::fd_grad_logprob(model, params, prompt, seq, 1e-5);
        worst_logprob = std::max(worst_logprob, oracles::relative_error(exact, fd));
    }

    double worst_psi = 0.0;
    for (int c = 0; c < 50; ++c) {
        const auto task = task::SyntheticTask::random(3, 3, 2, 0.35, rng.next_u64());
        const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
        const auto params = policy::gaussian_params(model, 0.6, rng.next_u64());
        const auto prompts = task::PromptSet::all(task);
        const auto exact =
            effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
        const auto fd = oracles::fd_grad_accuracy(model, params, prompts, 1e-5);
        worst_psi = std::max(worst_psi, oracles::relative_error(exact.g, fd));
    }

    const bool pass = worst_logprob < 1e-5 && worst_psi < 1e-4;
    return {pass, "grad_logprob rel err " + fmt(worst_logprob) +
                      " (tol 1e-5, 100 cases); eval_gradient rel err " + fmt(worst_psi) +
                      " (tol 1e-4, 50 instances)"};
}

// ---------------------------------------------------------------------------
// criterion 2: theorem 1 closed form vs numerical maximizer, corollary 1
// ---------------------------------------------------------------------------

Outcome criterion2() {
    Rng rng(202);
    double worst_tv = 0.0;
    double worst_identity = 0.0;
    int tilt_instances = 0;
    while (tilt_instances < 10) {
        const auto task = task::SyntheticTask::random(3, 2, 1, 0.5, rng.next_u64());
        // need both a correct and an incorrect response for p* < 1
        const auto all = policy::enumerate_responses(task.vocab(), 2);
        int n_correct = 0;
        for (const auto& seq : all) n_correct += task.reward(0, seq);
        if (n_correct == 0 || n_correct == int(all.size())) continue;
        tilt_instances += 1;

        const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
        const auto params = policy::gaussian_params(model, 0.6, rng.next_u64());
        const auto prompts = task::PromptSet::all(task);
        const auto g_e =
            effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
        const double beta = 0.5 + rng.uniform();
        const double p_star = 0.25 + 0.5 * rng.uniform();
        const auto tilted = effects::optimal_tilted_policy(model, params, prompts, g_e, beta,
                                                           std::vector<double>{p_star});
        const auto& tp = tilted.prompts[0];

        const auto numeric = oracles::maximize_tilted_objective(
            tp.base_mass, tp.rewards, tp.effects, beta, p_star, 80000, 0.02);
        worst_tv = std::max(worst_tv, effects::total_variation(numeric, tp.tilted_mass));

        for (std::size_t i = 0; i < tp.responses.size(); ++i)
            for (std::size_t j = i + 1; j < tp.responses.size(); ++j) {
                if (tp.rewards[i] != 1 || tp.rewards[j] != 1) continue;
                const double lhs = std::log(tp.tilted_mass[i] / tp.tilted_mass[j]) -
                                   std::log(tp.base_mass[i] / tp.base_mass[j]);
                const double rhs = (tp.effects[i] - tp.effects[j]) / (beta * p_star);
                worst_identity = std::max(worst_identity, std::fabs(lhs - rhs));
            }
    }

    int cor1_failures = 0;
    {
        const auto task = task::SyntheticTask::random(3, 3, 2, 0.5, 2024);
        const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
        const auto params = policy::gaussian_params(model, 0.6, 2025);
        const auto prompts = task::PromptSet::all(task);
        const auto g_e =
            effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
        for (int c = 0; c < 100; ++c) {
            const double beta = 0.2 + 2.0 * rng.uniform();
            std::vector<double> p_star(prompts.size()), p_prime(prompts.size());
            for (std::size_t i = 0; i < p_star.size(); ++i) {
                p_star[i] = 0.1 + 0.9 * rng.uniform();
                p_prime[i] = 0.1 + 0.9 * rng.uniform();
            }
            if (!effects::verify_corollary1(model, params, prompts, g_e, beta, p_star, p_prime))
                cor1_failures += 1;
        }
    }

    const bool pass = worst_tv < 1e-4 && worst_identity < 1e-10 && cor1_failures == 0;
    return {pass, "closed form vs maximizer TV " + fmt(worst_tv) +
                      " (tol 1e-4); log-ratio violation " + fmt(worst_identity) +
                      " (tol 1e-10); corollary failures " + std::to_string(cor1_failures) +
                      "/100"};
}

// ---------------------------------------------------------------------------
// criterion 3: theorem 2 inequality on 200 random instances + equality cases
// ---------------------------------------------------------------------------

Outcome criterion3() {
    Rng rng(303);
    int violations = 0;
    for (int c = 0; c < 200; ++c) {
        const auto task = task::SyntheticTask::random(3 + int(rng.uniform_int(2)),
                                                      2 + int(rng.uniform_int(2)), 2, 0.35,
                                                      rng.next_u64());
        const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
        const auto params = policy::gaussian_params(model, 0.8, rng.next_u64());
        const auto prompts = task::PromptSet::all(task);
        const auto g_e =
            effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
        const auto res = effects::verify_thm2(model, params, prompts, g_e);
        if (!res.holds || res.lhs < res.rhs - 1e-12) violations += 1;
    }

    // equality case A: all rewards zero
    bool equality_zero = false;
    {
        task::SyntheticTask task(task::generic_vocab(3), 2, 2);
        const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
        const auto params = policy::gaussian_params(model, 0.5, 5);
        const auto prompts = task::PromptSet::all(task);
        const auto g_e =
            effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
        const auto res = effects::verify_thm2(model, params, prompts, g_e);
        equality_zero = res.holds && res.lhs == 0.0 && res.rhs == 0.0;
    }

    // equality case B: everything correct (p ~ 1) with a constant effect
    bool equality_const = false;
    {
        task::SyntheticTask task(task::generic_vocab(2), 2, 1);
        task.add_correct(0, {});
        task.add_correct(0, {0});
        const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
        auto params = policy::zero_params(model);
        const int v = model.vocab.size();
        for (std::size_t row = 0; row < model.param_dim() / std::size_t(v); ++row)
            params[row * std::size_t(v) + std::size_t(model.vocab.eos_id())] = 18.0;
        const auto prompts = task::PromptSet::all(task);
        const auto responses = policy::enumerate_responses(model.vocab, 2);
        const auto g1 = policy::grad_logprob(model, params, task.prompt(0), responses[0]);
        const auto g2 = policy::grad_logprob(model, params, task.prompt(0), responses[1]);
        std::vector<double> diff(g1.size());
        for (std::size_t i = 0; i < g1.size(); ++i) diff[i] = g1[i] - g2[i];
        effects::EvalGradient g_e;
        g_e.g.assign(g1.size(), 0.0);
        for (std::size_t i = 0; i < g1.size(); ++i) g_e.g[i] = 1.0 + 0.1 * double(i % 3);
        const double coeff = vec::dot(g_e.g, diff) / vec::dot(diff, diff);
        vec::axpy(-coeff, diff, g_e.g);
        const auto res = effects::verify_thm2(model, params, prompts, g_e);
        const double v_const =
            effects::sample_effect(model, params, task.prompt(0), responses[0], g_e.g);
        equality_const = res.holds && std::fabs(res.lhs - v_const * v_const) < 1e-9 &&
                         std::fabs(res.lhs - res.rhs) < 1e-12 + 1e-9 * std::fabs(res.lhs);
    }

    const bool pass = violations == 0 && equality_zero && equality_const;
    return {pass, std::to_string(violations) +
                      "/200 violations; zero-reward equality " +
                      (equality_zero ? "ok" : "FAILED") + "; constant-effect equality " +
                      (equality_const ? "ok" : "FAILED")};
}

// ---------------------------------------------------------------------------
// criterion 4: drift approximation vs 10,000 simulated one-step updates
// ---------------------------------------------------------------------------

Outcome criterion4() {
    const auto task = task::SyntheticTask::random(4, 3, 2, 0.4, 404);
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
    const auto params = policy::gaussian_params(model, 0.6, 405);
    const auto prompts = task::PromptSet::all(task);

    const auto g_e = effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
    const double mu_exact = effects::drift_rl(model, params, prompts, g_e);
    const double psi0 =
        effects::eval_accuracy(model, params, prompts, effects::EvalMethod::exact()).value;

    const double eta = 1e-4;
    const int n_sims = 10000;
    const int batch = 8;
    policy::SampleOptions opt;
    opt.l_max = task.l_max();
    std::vector<double> slopes;
    slopes.reserve(n_sims);
    std::vector<double> grad(model.param_dim());
    std::vector<double> moved(params.begin(), params.end());
    for (int sim = 0; sim < n_sims; ++sim) {
        std::fill(grad.begin(), grad.end(), 0.0);
        Rng rng(derive_seed(406, std::uint64_t(sim)));
        for (int b = 0; b < batch; ++b) {
            const int prompt_index =
                prompts.indices[rng.uniform_int(prompts.indices.size())];
            const auto response =
                policy::sample(model, params, task.prompt(prompt_index), opt, rng.next_u64());
            if (task.reward(prompt_index, response) == 1)
                policy::accumulate_grad_logprob(model, params, task.prompt(prompt_index),
                                                response, 1.0 / double(batch), grad);
        }
        std::copy(params.begin(), params.end(), moved.begin());
        vec::axpy(eta, grad, moved);
        const double psi1 =
            effects::eval_accuracy(model, moved, prompts, effects::EvalMethod::exact()).value;
        slopes.push_back((psi1 - psi0) / eta);
    }
    const auto ci = stats::mean_ci99(slopes);
    const bool pass = ci.contains(mu_exact);
    return {pass, "exact mu " + fmt(mu_exact) + " vs simulated 99% CI [" + fmt(ci.lo) + ", " +
                      fmt(ci.hi) + "] over " + std::to_string(n_sims) + " one-step updates"};
}

// ---------------------------------------------------------------------------
// criterion 5: re-distillation on the toy K&K task
// ---------------------------------------------------------------------------

Outcome criterion5() {
    const int n_prompts = 12;
    const int l_max = 16;
    const auto task =
        make_kk_task(2, n_prompts, l_max, task::ResponseStyle::Answer, 5001);
    // order 4: every position of the boxed template carries a distinct
    // context, so the tabular family can represent the task exactly
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 4);
    const auto prompts = task::PromptSet::all(task);
    // a light format pretraining leaves plenty of headroom below 0.2
    const auto base = pretrain_base(task, model, 8, 10, 5002);

    auto cfg = toy_rl_config(n_prompts, l_max);
    const int max_steps = 300;
    const double target_acc = 0.9;

    std::vector<double> start_accs, final_accs;
    std::vector<int> steps_to_target;
    train::GrpoRunResult first_run;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto run = train::run_grpo(task, prompts, model, base, cfg, max_steps, seed);
        start_accs.push_back(run.trace.front().train_acc);
        final_accs.push_back(run.trace.back().train_acc);
        int reached = -1;
        for (const auto& s : run.trace)
            if (s.train_acc > target_acc) {
                reached = s.step + 1;
                break;
            }
        steps_to_target.push_back(reached);
        if (seed == 1) first_run = std::move(run);
    }
    std::sort(start_accs.begin(), start_accs.end());
    std::sort(final_accs.begin(), final_accs.end());
    const double median_start = start_accs[2];
    const double median_final = final_accs[2];
    const bool part_a = median_start < 0.2 && median_final > target_acc;

    // (b) SFT on the filtered distill set from the converged policy
    const auto evaluator = [&](std::span<const double> p) {
        return mc_accuracy(model, p, prompts, 2000, 5050);
    };
    const double rl_acc = evaluator(first_run.params);
    train::SFTConfig sft_cfg;
    sft_cfg.batch_size = 16;
    sft_cfg.learning_rate = 0.1;
    sft_cfg.epochs = 40;
    sft_cfg.max_seq_len = l_max;
    const auto redi = train::redistill(task, model, first_run.params, prompts, base, sft_cfg,
                                       l_max, 64, 1.0, 5003, evaluator);
    const bool part_b = redi.accuracy_after >= rl_acc - 0.05;

    // (c) the follow-up GRPO run reaches the same accuracy in <= 1/3 the steps
    const int original_steps = steps_to_target[0] > 0 ? steps_to_target[0] : max_steps;
    int redi_steps = -1;
    if (evaluator(redi.params) > target_acc) {
        redi_steps = 0;
    } else {
        const auto follow =
            train::run_grpo(task, prompts, model, redi.params, cfg, max_steps / 3, 777);
        for (const auto& s : follow.trace) {
            if (s.train_acc > target_acc) {
                redi_steps = s.step + 1;
                break;
            }
        }
    }
    const bool part_c = redi_steps >= 0 && redi_steps * 3 <= original_steps;

    std::ostringstream detail;
    detail << "(a) median train acc " << fmt(median_start) << " -> " << fmt(median_final)
           << (part_a ? " ok" : " FAILED") << "; (b) redistilled " << fmt(redi.accuracy_after)
           << " vs RL " << fmt(rl_acc) << (part_b ? " ok" : " FAILED") << "; (c) "
           << redi_steps << " vs " << original_steps << " steps to " << fmt(target_acc)
           << (part_c ? " ok" : " FAILED");
    return {part_a && part_b && part_c, detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 6: effect estimates rank datasets like measured SFT gains
// ---------------------------------------------------------------------------

Outcome criterion6() {
    // enumerable synthetic task so both the effects and the gains are exact
    const auto task = task::SyntheticTask::sequence_recall(6, 5, 6, 2, 606);
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 2);
    const auto prompts = task::PromptSet::all(task);

    // converge an RL policy to produce the re-distilled dataset
    auto cfg = toy_rl_config(6, 5);
    const auto run =
        train::run_grpo(task, prompts, model, policy::zero_params(model), cfg, 300, 9);

    const auto theta0 = policy::zero_params(model);
    const auto g_e =
        effects::eval_gradient(model, theta0, prompts, effects::EvalMethod::exact());
    const effects::ParamDelta delta{g_e.g};

    Rng rng(607);
    auto random_content = [&](int len) {
        std::vector<int> content;
        for (int i = 0; i < len; ++i)
            content.push_back(int(rng.uniform_int(std::uint64_t(model.vocab.size() - 1))));
        return content;
    };

    struct Dataset {
        std::string name;
        train::SftDataset examples;
    };
    std::vector<Dataset> datasets;
    {
        Dataset redistilled{"redistilled", {}};
        const auto set = train::build_distill_set(task, model, run.params, prompts, 5, 32, 1.0,
                                                  608);
        redistilled.examples = set.examples;
        datasets.push_back(std::move(redistilled));

        Dataset truth{"ground-truth", {}};
        const auto all = policy::enumerate_responses(model.vocab, 5);
        for (int i = 0; i < task.n_prompts(); ++i)
            for (const auto& seq : all)
                if (task.reward(i, seq) == 1) truth.examples.push_back({i, seq});
        datasets.push_back(std::move(truth));

        Dataset half{"half-corrupted", {}};
        for (int i = 0; i < task.n_prompts(); ++i) {
            if (i % 2 == 0)
                half.examples.push_back({i, datasets[1].examples[std::size_t(i)].target});
            else
                half.examples.push_back(
                    {i, policy::make_terminated(random_content(2), model.vocab)});
        }
        datasets.push_back(std::move(half));

        Dataset junk{"random-junk", {}};
        for (int i = 0; i < task.n_prompts(); ++i)
            junk.examples.push_back(
                {i, policy::make_terminated(random_content(1 + int(rng.uniform_int(3))),
                                            model.vocab)});
        datasets.push_back(std::move(junk));

        Dataset mismatched{"mismatched", {}};
        for (int i = 0; i < task.n_prompts(); ++i)
            mismatched.examples.push_back(
                {i, datasets[1].examples[std::size_t((i + 1) % task.n_prompts())].target});
        datasets.push_back(std::move(mismatched));

        Dataset anti{"near-miss", {}};
        for (int i = 0; i < task.n_prompts(); ++i) {
            // a wrong response one token away from the correct one
            auto target = datasets[1].examples[std::size_t(i)].target;
            std::vector<int> content(target.tokens.begin(), target.tokens.end() - 1);
            if (!content.empty()) content[0] = (content[0] + 1) % (model.vocab.size() - 1);
            anti.examples.push_back(
                {i, policy::make_terminated(std::move(content), model.vocab)});
        }
        datasets.push_back(std::move(anti));
    }

    // mean V_SGD per dataset using the exact eval gradient as the delta
    std::vector<double> mean_effects, gains;
    train::SFTConfig sft_cfg;
    sft_cfg.batch_size = 64;
    sft_cfg.learning_rate = 0.02;
    sft_cfg.epochs = 1;
    sft_cfg.max_seq_len = 5;
    const double psi0 =
        effects::eval_accuracy(model, theta0, prompts, effects::EvalMethod::exact()).value;
    for (const auto& dataset : datasets) {
        std::vector<effects::DeltaEffectInput> inputs;
        for (const auto& ex : dataset.examples) {
            effects::DeltaEffectInput input;
            input.prompt_index = ex.prompt_index;
            input.grad_logprob_over_len.assign(model.param_dim(), 0.0);
            policy::accumulate_grad_logprob(model, theta0, task.prompt(ex.prompt_index),
                                            ex.target, 1.0 / double(ex.target.length()),
                                            input.grad_logprob_over_len);
            inputs.push_back(std::move(input));
        }
        const auto report =
            effects::effect_estimator_delta(inputs, delta, effects::DeltaMode::Sgd);
        mean_effects.push_back(report.mean);

        const auto tuned = train::run_sft(task, model, theta0, dataset.examples, sft_cfg, 611);
        const double psi1 =
            effects::eval_accuracy(model, tuned, prompts, effects::EvalMethod::exact()).value;
        gains.push_back(psi1 - psi0);
    }

    const double rho = stats::spearman_rho(mean_effects, gains);
    std::ostringstream detail;
    detail << "spearman rho " << fmt(rho) << " over " << datasets.size() << " datasets (";
    for (std::size_t i = 0; i < datasets.size(); ++i)
        detail << datasets[i].name << " V=" << fmt(mean_effects[i]) << " gain=" << fmt(gains[i])
               << (i + 1 < datasets.size() ? "; " : ")");
    return {rho >= 0.8, detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 7: exploration asymmetry across positions
// ---------------------------------------------------------------------------

Outcome criterion7() {
    const int n_prompts = 8;
    const int l_max = 32;
    const auto task = make_kk_task(2, n_prompts, l_max, task::ResponseStyle::Trace, 7001);
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 4);
    const auto prompts = task::PromptSet::all(task);
    const auto base = pretrain_base(task, model, 8, 20, 7002);

    auto cfg = toy_rl_config(n_prompts, l_max);
    const std::vector<int> checkpoint_steps{10, 40, 200};
    std::vector<std::vector<double>> checkpoints;  // params at each step
    train::run_grpo(task, prompts, model, base, cfg, 200, 70,
                    [&](int step, const train::StepStats&, std::span<const double> params) {
                        for (int want : checkpoint_steps)
                            if (step + 1 == want)
                                checkpoints.emplace_back(params.begin(), params.end());
                    });

    // rollouts from each checkpoint, scored under the initial policy
    std::vector<int> argmins;
    policy::SampleOptions opt;
    opt.l_max = l_max;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        std::vector<analysis::TaggedResponse> rollouts;
        for (int i = 0; i < 3000; ++i) {
            const int prompt_index = i % n_prompts;
            rollouts.push_back(
                {prompt_index,
                 policy::sample(model, checkpoints[c], task.prompt(prompt_index), opt,
                                derive_seed(7100, c, std::uint64_t(i)))});
        }
        const auto profile = analysis::position_profile(model, base, task, rollouts, 0.01);
        argmins.push_back(profile.argmin_quantile_position());
    }
    bool non_increasing = true;
    for (std::size_t i = 1; i < argmins.size(); ++i)
        non_increasing = non_increasing && argmins[i] <= argmins[i - 1];

    // pre/post-SFT shift: larger at the first position than at the final one
    train::SftDataset sft_data;
    for (int i = 0; i < n_prompts; ++i) sft_data.push_back({i, task.sft_target(i)});
    train::SFTConfig sft_cfg;
    sft_cfg.batch_size = 8;
    sft_cfg.learning_rate = 0.1;
    sft_cfg.epochs = 40;
    sft_cfg.max_seq_len = l_max;
    const auto tuned = train::run_sft(task, model, base, sft_data, sft_cfg, 7003);

    double first_shift = 0.0, final_shift = 0.0;
    for (const auto& ex : sft_data) {
        const auto before =
            policy::per_token_logprobs(model, base, task.prompt(ex.prompt_index), ex.target);
        const auto after =
            policy::per_token_logprobs(model, tuned, task.prompt(ex.prompt_index), ex.target);
        first_shift += std::fabs(after.front() - before.front()) / double(sft_data.size());
        final_shift += std::fabs(after.back() - before.back()) / double(sft_data.size());
    }
    const bool shift_ok = first_shift > final_shift;

    std::ostringstream detail;
    detail << "argmin positions";
    for (int a : argmins) detail << ' ' << a;
    detail << (non_increasing ? " (non-increasing ok)" : " (NOT non-increasing)")
           << "; SFT shift pos1 " << fmt(first_shift) << " vs final " << fmt(final_shift)
           << (shift_ok ? " ok" : " FAILED");
    return {non_increasing && shift_ok, detail.str()};
}

// ---------------------------------------------------------------------------
// criterion 8: puzzle generator and grader at scale
// ---------------------------------------------------------------------------

Outcome criterion8() {
    // published two-person fixture
    puzzle::PuzzleSpec fixture;
    fixture.n_ppl = 2;
    fixture.names = {"Scarlett", "Jackson"};
    fixture.statements.push_back(
        {0, puzzle::Formula::binary(puzzle::Connective::Implies, puzzle::Formula::atom(1),
                                    puzzle::Formula::atom(0))});
    fixture.statements.push_back(
        {1, puzzle::Formula::binary(puzzle::Connective::Implies, puzzle::Formula::atom(1),
                                    puzzle::Formula::negate(puzzle::Formula::atom(0)))});
    const auto fixture_solutions = puzzle::solve(fixture);
    bool fixture_ok =
        fixture_solutions.size() == 1 &&
        fixture_solutions[0] ==
            puzzle::Assignment{puzzle::Identity::Knave, puzzle::Identity::Knight};
    if (fixture_ok) {
        fixture.solution = fixture_solutions[0];
        fixture_ok = puzzle::check_answer(puzzle::synthesize_short_cot(fixture), fixture) == 1;
    }

    int bad = 0;
    int total = 0;
    for (int n = 2; n <= 8; ++n) {
        for (int i = 0; i < 1000; ++i) {
            const auto p = puzzle::generate(
                n, derive_seed(808, std::uint64_t(n), std::uint64_t(i)));
            const auto sols = puzzle::solve(p);
            const bool unique_ok = sols.size() == 1 && sols[0] == p.solution;
            const bool cot_ok =
                puzzle::check_answer(puzzle::synthesize_short_cot(p), p) == 1;
            if (!unique_ok || !cot_ok) bad += 1;
            total += 1;
        }
    }
    const bool pass = fixture_ok && bad == 0;
    return {pass, std::string("fixture ") + (fixture_ok ? "ok" : "FAILED") + "; " +
                      std::to_string(bad) + "/" + std::to_string(total) +
                      " generated puzzles failed uniqueness or round-trip"};
}

// ---------------------------------------------------------------------------
// criterion 9: deterministic verify runs
// ---------------------------------------------------------------------------

Outcome criterion9() {
    const auto base = std::filesystem::temp_directory_path() / "kklab_acceptance_verify";
    std::filesystem::remove_all(base);
    exp::VerifyOptions opt;  // library defaults, fixed seed
    opt.out_dir = base / "run_a";
    const auto a = exp::run_verify(opt);
    opt.out_dir = base / "run_b";
    const auto b = exp::run_verify(opt);

    const bool reports_equal = read_file(base / "run_a" / "verify_report.jsonl") ==
                               read_file(base / "run_b" / "verify_report.jsonl");
    const bool manifests_equal = read_file(base / "run_a" / "verify_manifest.json") ==
                                 read_file(base / "run_b" / "verify_manifest.json");
    std::filesystem::remove_all(base);
    const bool pass = a.all_pass && b.all_pass && reports_equal && manifests_equal;
    return {pass, std::string("suites ") + (a.all_pass && b.all_pass ? "pass" : "FAIL") +
                      "; manifests byte-identical: " + (manifests_equal ? "yes" : "NO") +
                      "; reports byte-identical: " + (reports_equal ? "yes" : "NO")};
}

using CriterionFn = Outcome (*)();

struct Criterion {
    int id;
    const char* title;
    CriterionFn fn;
};

const Criterion kCriteria[] = {
    {1, "oracle exactness of analytic gradients", criterion1},
    {2, "theorem 1 closed form, log-ratio identity, corollary 1", criterion2},
    {3, "theorem 2 inequality with equality cases", criterion3},
    {4, "drift term matches simulated one-step updates", criterion4},
    {5, "re-distillation matches RL on the toy task", criterion5},
    {6, "effect estimates rank datasets like SFT gains", criterion6},
    {7, "exploration asymmetry across positions", criterion7},
    {8, "puzzle generation, solving, and grading at scale", criterion8},
    {9, "verify runs are byte-identical", criterion9},
};

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc)
            only = std::atoi(argv[i + 1]);
    }

    int failures = 0;
    for (const auto& criterion : kCriteria) {
        if (only != 0 && criterion.id != only) continue;
        Outcome outcome;
        try {
            outcome = criterion.fn();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (outcome.pass ? "[PASS]" : "[FAIL]") << " criterion " << criterion.id
                  << " (" << criterion.title << "): " << outcome.detail << "\n";
        if (!outcome.pass) failures += 1;
    }
    return failures == 0 ? 0 : 1;
}
