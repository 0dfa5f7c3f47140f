#include <doctest.h>

#include <cmath>

#include "kklab/effects/eval.hpp"
#include "kklab/puzzle/generate.hpp"
#include "kklab/task/kk_task.hpp"
#include "kklab/task/synthetic_task.hpp"
#include "kklab/train/adam.hpp"
#include "kklab/train/distill.hpp"
#include "kklab/train/grpo.hpp"
#include "kklab/train/rollout.hpp"
#include "kklab/train/sft.hpp"
#include "kklab/util/stats.hpp"
#include "kklab/util/vecmath.hpp"

using namespace kklab;
using namespace kklab::train;

namespace {

task::KkTask small_kk_task(int count = 4, int n_ppl = 2) {
    puzzle::GeneratorOptions opt;
    opt.sample_names = false;
    auto records = puzzle::generate_dataset({{n_ppl, count}}, opt, 2024);
    task::KkTaskOptions topt;
    topt.style = task::ResponseStyle::Answer;
    topt.l_max = 16;
    return task::KkTask(std::move(records), topt);
}

RLConfig small_rl_config(int prompts, int group = 4) {
    RLConfig cfg;
    cfg.group_size = group;
    cfg.prompts_per_rollout = prompts;
    cfg.train_batch_size = prompts * group;
    cfg.learning_rate = 0.1;
    cfg.l_max = 8;
    cfg.warmup_steps = 4;
    return cfg;
}

}  // namespace

TEST_CASE("binary reward requires termination, length, and correctness") {
    const auto task = small_kk_task(1);
    const auto& rec = task.record(0);
    const auto target = task.answer_target(0);

    CHECK(binary_reward(task.vocab(), target, rec.puzzle, 16) == 1);
    // truncated at l_max without EOS: zero despite correct content
    policy::TokenSeq truncated{std::vector<int>(target.tokens.begin(), target.tokens.end() - 1),
                               false};
    CHECK(binary_reward(task.vocab(), truncated, rec.puzzle, 16) == 0);
    // correct but over the length budget
    CHECK(binary_reward(task.vocab(), target, rec.puzzle, int(target.length()) - 1) == 0);
    // empty response
    policy::TokenSeq empty_resp{{task.vocab().eos_id()}, true};
    CHECK(binary_reward(task.vocab(), empty_resp, rec.puzzle, 16) == 0);
}

TEST_CASE("group advantages use the mean/std normalization") {
    RolloutBatch batch;
    batch.group_size = 4;
    for (int i = 0; i < 4; ++i) {
        RolloutSample s;
        s.prompt_index = 0;
        s.group = 0;
        s.reward = i == 0 ? 1 : 0;
        s.response = policy::TokenSeq{{0}, false};
        batch.samples.push_back(s);
    }
    const auto out = compute_advantages(batch);
    // mean 0.25, population std sqrt(3)/4
    const double stddev = std::sqrt(3.0) / 4.0;
    CHECK(out.samples[0].advantage == doctest::Approx(0.75 / (stddev + 1e-6)));
    CHECK(out.samples[0].advantage == doctest::Approx(1.732).epsilon(1e-3));
    for (int i = 1; i < 4; ++i)
        CHECK(out.samples[std::size_t(i)].advantage ==
              doctest::Approx(-0.25 / (stddev + 1e-6)));

    SUBCASE("all-equal rewards give zero advantages") {
        for (auto& s : batch.samples) s.reward = 1;
        for (const auto& s : compute_advantages(batch).samples) CHECK(s.advantage == 0.0);
        for (auto& s : batch.samples) s.reward = 0;
        for (const auto& s : compute_advantages(batch).samples) CHECK(s.advantage == 0.0);
    }
    SUBCASE("incomplete groups are rejected") {
        batch.samples.pop_back();
        CHECK_THROWS_AS((void)compute_advantages(batch), std::invalid_argument);
    }
    SUBCASE("groups may not mix prompts") {
        batch.samples[1].prompt_index = 3;
        CHECK_THROWS_AS((void)compute_advantages(batch), std::invalid_argument);
    }
}

TEST_CASE("adam single step and persistence") {
    AdamConfig cfg;  // defaults 0.9/0.999
    std::vector<double> params{1.0, -2.0, 3.0};
    std::vector<double> grad{0.1, -0.2, 0.3};
    auto state = AdamState::init(3);

    // t = 1 with bias correction: m_hat = g, v_hat = g*g
    std::vector<double> expected = params;
    for (std::size_t i = 0; i < 3; ++i)
        expected[i] -= 1e-3 * grad[i] / (std::sqrt(grad[i] * grad[i]) + cfg.eps);
    adam_update(params, grad, state, cfg, 1e-3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(params[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    CHECK(state.t == 1);

    // second step accumulates moments: m2 = b1 * m1 + (1 - b1) * g
    adam_update(params, grad, state, cfg, 1e-3);
    CHECK(state.t == 2);
    CHECK(state.m[0] == doctest::Approx(0.9 * 0.01 + 0.1 * 0.1).epsilon(1e-9));

    SUBCASE("zero gradient from a fresh state does not move parameters") {
        std::vector<double> p2{0.5, 0.5};
        std::vector<double> g2{0.0, 0.0};
        auto s2 = AdamState::init(2);
        adam_update(p2, g2, s2, cfg, 0.1);
        CHECK(p2 == std::vector<double>{0.5, 0.5});
    }
    SUBCASE("dimension mismatch throws") {
        std::vector<double> g3{1.0};
        CHECK_THROWS_AS(adam_update(params, g3, state, cfg, 1e-3), std::invalid_argument);
    }
}

TEST_CASE("sft loss is the mean per-token negative logprob") {
    const auto task = small_kk_task(2);
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 3);
    auto params = policy::zero_params(model);
    auto adam = AdamState::init(params.size());
    SFTConfig cfg;
    cfg.batch_size = 2;
    cfg.max_seq_len = 32;

    std::vector<SftExample> batch{{0, task.answer_target(0)}, {1, task.answer_target(1)}};
    double expected = 0.0;
    for (const auto& ex : batch)
        expected -= policy::logprob(model, params, task.prompt(ex.prompt_index), ex.target) /
                    double(ex.target.length()) / 2.0;
    const double loss = sft_step(task, model, params, adam, batch, cfg);
    CHECK(loss == doctest::Approx(expected).epsilon(1e-12));

    SUBCASE("empty batch is rejected") {
        std::vector<SftExample> empty_batch;
        CHECK_THROWS_AS((void)sft_step(task, model, params, adam, empty_batch, cfg),
                        std::invalid_argument);
    }
}

TEST_CASE("repeated sft on one example drives its logprob to zero monotonically") {
    const auto task = small_kk_task(1);
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 3);
    auto params = policy::zero_params(model);
    auto adam = AdamState::init(params.size());
    SFTConfig cfg;
    cfg.batch_size = 1;
    cfg.learning_rate = 0.1;
    cfg.max_seq_len = 32;

    std::vector<SftExample> batch{{0, task.answer_target(0)}};
    double previous = policy::logprob(model, params, task.prompt(0), batch[0].target);
    for (int step = 0; step < 800; ++step) {
        sft_step(task, model, params, adam, batch, cfg);
        const double current = policy::logprob(model, params, task.prompt(0), batch[0].target);
        CHECK(current >= previous - 1e-9);
        previous = current;
    }
    CHECK(previous > -1e-2);
}

TEST_CASE("grpo surrogate gradient at ratio one equals the vanilla policy gradient") {
    const auto task = task::SyntheticTask::sequence_recall(5, 4, 3, 1, 99);
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 2);
    auto params = policy::gaussian_params(model, 0.3, 5);
    const auto params_before = params;
    auto adam = AdamState::init(params.size());
    auto cfg = small_rl_config(3);
    cfg.l_max = 4;

    RolloutBatch batch;
    std::vector<double> surrogate_grad;
    const auto train_set = task::PromptSet::all(task);
    grpo_step(task, train_set, model, params, adam, cfg, 0, 314, {}, &batch, &surrogate_grad);

    // Eq-1 style REINFORCE-with-advantage gradient over the same buffer
    std::size_t total_tokens = 0;
    for (const auto& s : batch.samples) total_tokens += s.response.length();
    std::vector<double> vanilla(params_before.size(), 0.0);
    for (const auto& s : batch.samples) {
        policy::accumulate_grad_logprob(model, params_before, task.prompt(s.prompt_index),
                                        s.response, s.advantage / double(total_tokens),
                                        vanilla);
    }
    REQUIRE(surrogate_grad.size() == vanilla.size());
    double max_diff = 0.0;
    for (std::size_t i = 0; i < vanilla.size(); ++i)
        max_diff = std::max(max_diff, std::fabs(vanilla[i] - surrogate_grad[i]));
    CHECK(max_diff < 1e-10);
}

TEST_CASE("grpo with all-zero advantages leaves parameters unchanged") {
    // no correct response exists, so every group has constant reward 0
    task::SyntheticTask hopeless(task::generic_vocab(4), 3, 2);
    const auto model = task::make_policy_model(hopeless, policy::PolicyKind::Tabular, 1);
    auto params = policy::gaussian_params(model, 0.4, 8);
    const auto before = params;
    auto adam = AdamState::init(params.size());
    auto cfg = small_rl_config(2);
    cfg.l_max = 3;
    const auto train_set = task::PromptSet::all(hopeless);
    const auto stats = grpo_step(hopeless, train_set, model, params, adam, cfg, 0, 1, {});
    CHECK(stats.train_acc == 0.0);
    CHECK(params == before);
}

TEST_CASE("grpo step reports a zero clip fraction on the single update per buffer") {
    const auto task = task::SyntheticTask::sequence_recall(5, 4, 2, 1, 4);
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
    auto params = policy::zero_params(model);
    auto adam = AdamState::init(params.size());
    auto cfg = small_rl_config(2);
    cfg.l_max = 4;
    const auto train_set = task::PromptSet::all(task);
    const auto stats = grpo_step(task, train_set, model, params, adam, cfg, 0, 7, {});
    CHECK(stats.clip_frac == 0.0);
}

TEST_CASE("grpo run is deterministic and solves the recall task") {
    const auto task = task::SyntheticTask::sequence_recall(6, 5, 4, 2, 123);
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 2);
    auto cfg = small_rl_config(4, 8);
    cfg.l_max = 5;
    cfg.learning_rate = 0.1;
    const auto train_set = task::PromptSet::all(task);

    std::vector<double> finals;
    for (std::uint64_t seed : {1ull, 2ull, 3ull, 4ull, 5ull}) {
        const auto run = run_grpo(task, train_set, model, policy::zero_params(model), cfg, 300,
                                  seed);
        finals.push_back(run.trace.back().train_acc);
        CHECK(run.trace.front().train_acc < 0.2);
    }
    std::sort(finals.begin(), finals.end());
    CHECK(finals[2] > 0.9);  // median over 5 seeds

    SUBCASE("identical seeds reproduce identical stats streams") {
        const auto a = run_grpo(task, train_set, model, policy::zero_params(model), cfg, 40, 11);
        const auto b = run_grpo(task, train_set, model, policy::zero_params(model), cfg, 40, 11);
        REQUIRE(a.trace.size() == b.trace.size());
        for (std::size_t i = 0; i < a.trace.size(); ++i) {
            CHECK(a.trace[i].train_acc == b.trace[i].train_acc);
            CHECK(a.trace[i].loss == b.trace[i].loss);
            CHECK(a.trace[i].entropy == b.trace[i].entropy);
            CHECK(a.trace[i].mean_len == b.trace[i].mean_len);
        }
        CHECK(a.params == b.params);
    }
}

TEST_CASE("distillation keeps only reward-one samples and matches source accuracy") {
    const auto task = task::SyntheticTask::sequence_recall(6, 5, 4, 2, 123);
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 2);
    auto cfg = small_rl_config(4, 8);
    cfg.l_max = 5;
    const auto train_set = task::PromptSet::all(task);
    const auto run = run_grpo(task, train_set, model, policy::zero_params(model), cfg, 300, 1);

    const auto set = build_distill_set(task, model, run.params, train_set, 5, 256, 1.0, 77);
    CHECK(set.n_kept > 0);
    for (const auto& ex : set.examples) {
        CHECK(task.reward(ex.prompt_index, ex.target) == 1);
        CHECK(int(ex.target.length()) <= 5);
    }
    // kept fraction tracks the exact per-prompt accuracy within 3 sigma
    const auto exact = effects::eval_accuracy(model, run.params, train_set,
                                              effects::EvalMethod::exact());
    const double kept_fraction = double(set.n_kept) / double(set.n_sampled);
    const double sigma = std::sqrt(exact.value * (1.0 - exact.value) / double(set.n_sampled));
    CHECK(std::fabs(kept_fraction - exact.value) <= 3.0 * sigma + 1e-9);

    SUBCASE("zero-accuracy source fails with a per-prompt report") {
        task::SyntheticTask hopeless(task::generic_vocab(6), 5, 2);
        const auto hm = task::make_policy_model(hopeless, policy::PolicyKind::Tabular, 2);
        CHECK_THROWS_WITH_AS(
            (void)build_distill_set(hopeless, hm, policy::zero_params(hm),
                                    task::PromptSet::all(hopeless), 5, 16, 1.0, 3),
            doctest::Contains("per-prompt accuracy"), std::runtime_error);
    }
}

TEST_CASE("redistillation matches the source policy and keeps improving under grpo") {
    const auto task = task::SyntheticTask::sequence_recall(6, 5, 4, 2, 123);
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 2);
    auto cfg = small_rl_config(4, 8);
    cfg.l_max = 5;
    const auto train_set = task::PromptSet::all(task);
    const auto run = run_grpo(task, train_set, model, policy::zero_params(model), cfg, 300, 2);

    const auto evaluator = [&](std::span<const double> p) {
        return effects::eval_accuracy(model, p, train_set, effects::EvalMethod::exact()).value;
    };
    const double rl_acc = evaluator(run.params);
    REQUIRE(rl_acc > 0.8);

    SFTConfig sft_cfg;
    sft_cfg.batch_size = 16;
    sft_cfg.epochs = 30;
    sft_cfg.learning_rate = 0.1;
    sft_cfg.max_seq_len = 8;
    const auto result = redistill(task, model, run.params, train_set,
                                  policy::zero_params(model), sft_cfg, 5, 64, 1.0, 55,
                                  evaluator);
    CHECK(result.accuracy_after >= rl_acc - 0.05);
    CHECK(result.accuracy_after > result.accuracy_before);

    // a short follow-up GRPO run does not lose ground
    const auto more = run_grpo(task, train_set, model, result.params, cfg, 40, 3);
    CHECK(evaluator(more.params) >= result.accuracy_after - 0.05);
}
