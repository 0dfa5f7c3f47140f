#include "kklab/exp/verify.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "kklab/effects/effects.hpp"
#include "kklab/effects/theorems.hpp"
#include "kklab/effects/tilted.hpp"
#include "kklab/exp/config.hpp"
#include "kklab/exp/manifest.hpp"
#include "kklab/policy/enumerate.hpp"
#include "kklab/puzzle/cot.hpp"
#include "kklab/puzzle/generate.hpp"
#include "kklab/puzzle/grading.hpp"
#include "kklab/task/synthetic_task.hpp"
#include "kklab/util/io.hpp"
#include "kklab/util/rng.hpp"
#include "kklab/util/sha256.hpp"
#include "kklab/util/vecmath.hpp"

namespace kklab::exp {

using nlohmann::json;

namespace {

// local finite differences; the test suite carries its own copy so this
// stays usable from the installed tool
std::vector<double> fd_gradient(const std::function<double(std::span<const double>)>& f,
                                std::vector<double> theta, double h) {
    std::vector<double> grad(theta.size());
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double orig = theta[i];
        theta[i] = orig + h;
        const double fp = f(theta);
        theta[i] = orig - h;
        const double fm = f(theta);
        theta[i] = orig;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

double rel_error(std::span<const double> a, std::span<const double> b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        num += (a[i] - b[i]) * (a[i] - b[i]);
        den += b[i] * b[i];
    }
    return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

std::string fmt(double v) { return json(v).dump(); }

struct Ctx {
    const VerifyOptions& opt;
    VerifyReport report;

    void add(const std::string& name, bool pass, const std::string& detail) {
        report.checks.push_back({name, pass, detail});
        report.all_pass = report.all_pass && pass;
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    }
};

policy::PolicyModel random_model(Rng& rng, bool linear) {
    policy::PolicyModel m;
    m.kind = linear ? policy::PolicyKind::LinearSoftmax : policy::PolicyKind::Tabular;
    m.vocab = task::generic_vocab(3 + int(rng.uniform_int(3)));
    m.context_order = 1 + int(rng.uniform_int(2));
    m.n_prompt_slots = 2;
    m.prompt_vocab_size = 2;
    m.validate();
    return m;
}

policy::PromptContext prompt_of(int slot) {
    policy::PromptContext ctx;
    ctx.slot = slot;
    ctx.tokens = {slot};
    ctx.prompt_vocab_size = 2;
    return ctx;
}

void check_grad_fd(Ctx& ctx) {
    Rng rng(derive_seed(ctx.opt.seed, 1));
    double worst = 0.0;
    for (int c = 0; c < ctx.opt.fd_cases; ++c) {
        const auto model = random_model(rng, c % 2 == 1);
        const auto params = policy::gaussian_params(model, 0.8, rng.next_u64());
        const auto prompt = prompt_of(int(rng.uniform_int(2)));
        std::vector<int> content;
        const int len = int(rng.uniform_int(4));
        for (int i = 0; i < len; ++i)
            content.push_back(int(rng.uniform_int(std::uint64_t(model.vocab.size() - 1))));
        const auto seq = policy::make_terminated(std::move(content), model.vocab);

        const auto exact = policy::grad_logprob(model, params, prompt, seq);
        const auto fd = fd_gradient(
            [&](std::span<const double> theta) {
                return policy::logprob(model, theta, prompt, seq);
            },
            params, 1e-5);
        worst = std::max(worst, rel_error(exact, fd));
    }
    ctx.add("grad-logprob-vs-finite-difference", worst < 1e-5,
            "max rel err " + fmt(worst) + " over " + std::to_string(ctx.opt.fd_cases) +
                " cases (tol 1e-5)");
}

void check_eval_grad_fd(Ctx& ctx) {
    Rng rng(derive_seed(ctx.opt.seed, 2));
    double worst = 0.0;
    for (int c = 0; c < ctx.opt.eval_grad_instances; ++c) {
        const auto task = task::SyntheticTask::random(3, 3, 2, 0.35, rng.next_u64());
        const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
        const auto params = policy::gaussian_params(model, 0.6, rng.next_u64());
        const auto prompts = task::PromptSet::all(task);
        const auto exact =
            effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
        const auto fd = fd_gradient(
            [&](std::span<const double> theta) {
                return effects::eval_accuracy(model, theta, prompts,
                                              effects::EvalMethod::exact())
                    .value;
            },
            params, 1e-5);
        worst = std::max(worst, rel_error(exact.g, fd));
    }
    ctx.add("eval-gradient-vs-finite-difference", worst < 1e-4,
            "max rel err " + fmt(worst) + " over " +
                std::to_string(ctx.opt.eval_grad_instances) + " instances (tol 1e-4)");
}

void check_normalization(Ctx& ctx) {
    Rng rng(derive_seed(ctx.opt.seed, 3));
    double worst_mass = 0.0, worst_score = 0.0;
    for (int c = 0; c < 10; ++c) {
        const auto model = random_model(rng, c % 2 == 1);
        const auto params = policy::gaussian_params(model, 0.8, rng.next_u64());
        const auto prompt = prompt_of(0);
        const auto masses = policy::probability_masses(model, params, prompt, 4);
        worst_mass = std::max(worst_mass,
                              std::fabs(masses.terminated_mass + masses.boundary_mass - 1.0));
        std::vector<double> acc(model.param_dim(), 0.0);
        policy::for_each_response(model, params, prompt, 4, [&](const policy::ResponseVisit& v) {
            if (v.tokens.empty()) return;
            policy::TokenSeq seq{v.tokens, v.terminated};
            policy::accumulate_grad_logprob(model, params, prompt, seq, std::exp(v.logprob),
                                            acc);
        });
        worst_score = std::max(worst_score, vec::norm(acc));
    }
    ctx.add("probability-normalization", worst_mass < 1e-10,
            "max |1 - total mass| = " + fmt(worst_mass) + " (tol 1e-10)");
    ctx.add("score-function-identity", worst_score < 1e-8,
            "max gradient-mean norm " + fmt(worst_score) + " (tol 1e-8)");
}

void check_theorem1(Ctx& ctx) {
    Rng rng(derive_seed(ctx.opt.seed, 4));
    double worst_identity = 0.0;
    double worst_mass = 0.0;
    for (int c = 0; c < ctx.opt.tilt_instances; ++c) {
        const auto task = task::SyntheticTask::random(3, 3, 1, 0.5, rng.next_u64());
        const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
        const auto params = policy::gaussian_params(model, 0.6, rng.next_u64());
        const auto prompts = task::PromptSet::all(task);
        const auto g_e =
            effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
        const double beta = 0.3 + rng.uniform();
        const double p_star = 0.2 + 0.6 * rng.uniform();
        const auto tilted = effects::optimal_tilted_policy(model, params, prompts, g_e, beta,
                                                           std::vector<double>{p_star});
        const auto& tp = tilted.prompts[0];
        double total = 0.0, correct_mass = 0.0;
        for (std::size_t i = 0; i < tp.responses.size(); ++i) {
            total += tp.tilted_mass[i];
            if (tp.rewards[i] == 1) correct_mass += tp.tilted_mass[i];
        }
        worst_mass = std::max(worst_mass, std::fabs(total - 1.0));
        worst_mass = std::max(worst_mass, std::fabs(correct_mass - p_star));
        for (std::size_t i = 0; i < tp.responses.size(); ++i) {
            for (std::size_t j = i + 1; j < tp.responses.size(); ++j) {
                if (tp.rewards[i] != 1 || tp.rewards[j] != 1) continue;
                const double lhs = std::log(tp.tilted_mass[i] / tp.tilted_mass[j]) -
                                   std::log(tp.base_mass[i] / tp.base_mass[j]);
                const double rhs = (tp.effects[i] - tp.effects[j]) / (beta * p_star);
                worst_identity = std::max(worst_identity, std::fabs(lhs - rhs));
            }
        }
    }
    ctx.add("theorem1-constraints", worst_mass < 1e-10,
            "max mass/accuracy violation " + fmt(worst_mass) + " (tol 1e-10)");
    ctx.add("theorem1-log-ratio-identity", worst_identity < 1e-10,
            "max identity violation " + fmt(worst_identity) + " (tol 1e-10)");
}

void check_corollary1(Ctx& ctx) {
    Rng rng(derive_seed(ctx.opt.seed, 5));
    const auto task = task::SyntheticTask::random(3, 3, 2, 0.5, rng.next_u64());
    const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
    const auto params = policy::gaussian_params(model, 0.6, rng.next_u64());
    const auto prompts = task::PromptSet::all(task);
    const auto g_e =
        effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
    int failures = 0;
    for (int c = 0; c < ctx.opt.cor1_triples; ++c) {
        const double beta = 0.2 + 2.0 * rng.uniform();
        std::vector<double> p_star(prompts.size()), p_prime(prompts.size());
        for (std::size_t i = 0; i < p_star.size(); ++i) {
            p_star[i] = 0.1 + 0.9 * rng.uniform();
            p_prime[i] = 0.1 + 0.9 * rng.uniform();
        }
        if (!effects::verify_corollary1(model, params, prompts, g_e, beta, p_star, p_prime))
            failures += 1;
    }
    ctx.add("corollary1-equivalence", failures == 0,
            std::to_string(failures) + " failures over " + std::to_string(ctx.opt.cor1_triples) +
                " random (beta, p*, p') triples");
}

void check_theorem2(Ctx& ctx) {
    Rng rng(derive_seed(ctx.opt.seed, 6));
    int failures = 0;
    for (int c = 0; c < ctx.opt.thm2_instances; ++c) {
        const auto task = task::SyntheticTask::random(3 + int(rng.uniform_int(2)), 3, 2, 0.35,
                                                      rng.next_u64());
        const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
        const auto params = policy::gaussian_params(model, 0.8, rng.next_u64());
        const auto prompts = task::PromptSet::all(task);
        const auto g_e =
            effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
        if (!effects::verify_thm2(model, params, prompts, g_e).holds) failures += 1;
    }
    ctx.add("theorem2-inequality", failures == 0,
            std::to_string(failures) + " violations over " +
                std::to_string(ctx.opt.thm2_instances) + " instances");
}

void check_drift_identities(Ctx& ctx) {
    Rng rng(derive_seed(ctx.opt.seed, 7));
    double worst_sq = 0.0, worst_delta = 0.0;
    for (int c = 0; c < 10; ++c) {
        const auto task = task::SyntheticTask::random(3, 3, 2, 0.4, rng.next_u64());
        const auto model = task::make_policy_model(task, policy::PolicyKind::Tabular, 1);
        const auto params = policy::gaussian_params(model, 0.6, rng.next_u64());
        const auto target = policy::gaussian_params(model, 0.6, rng.next_u64());
        const auto prompts = task::PromptSet::all(task);
        const auto g_e =
            effects::eval_gradient(model, params, prompts, effects::EvalMethod::exact());
        const double mu = effects::drift_rl(model, params, prompts, g_e);
        worst_sq = std::max(worst_sq, std::fabs(mu - vec::dot(g_e.g, g_e.g)));
        const double mu_sft = effects::drift_sft(model, params, target, prompts, g_e);
        const double direct =
            effects::delta_drift_direct(model, params, target, prompts, g_e);
        worst_delta = std::max(worst_delta, std::fabs((mu_sft - mu) - direct));
    }
    ctx.add("drift-squared-norm-identity", worst_sq == 0.0,
            "max |mu_rl - ||g||^2| = " + fmt(worst_sq) + " (exact)");
    ctx.add("delta-drift-two-routes", worst_delta < 1e-10,
            "max route disagreement " + fmt(worst_delta) + " (tol 1e-10)");
}

void check_puzzles(Ctx& ctx) {
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
    const auto solutions = puzzle::solve(fixture);
    bool fixture_ok = solutions.size() == 1 &&
                      solutions[0] == puzzle::Assignment{puzzle::Identity::Knave,
                                                         puzzle::Identity::Knight};
    if (fixture_ok) {
        fixture.solution = solutions[0];
        fixture_ok = puzzle::check_answer(puzzle::synthesize_short_cot(fixture), fixture) == 1;
    }
    ctx.add("puzzle-fixture", fixture_ok, "two-person implication fixture");

    int bad = 0, total = 0;
    for (int n = ctx.opt.min_n_ppl; n <= ctx.opt.max_n_ppl; ++n) {
        for (int i = 0; i < ctx.opt.puzzles_per_size; ++i) {
            const auto p =
                puzzle::generate(n, derive_seed(ctx.opt.seed, std::uint64_t(n), std::uint64_t(i)));
            const auto sols = puzzle::solve(p);
            const bool ok = sols.size() == 1 && sols[0] == p.solution &&
                            puzzle::check_answer(puzzle::synthesize_short_cot(p), p) == 1;
            bad += ok ? 0 : 1;
            total += 1;
        }
    }
    ctx.add("puzzle-roundtrip", bad == 0,
            std::to_string(bad) + " failures over " + std::to_string(total) +
                " generated puzzles");
}

}  // namespace

VerifyReport run_verify(const VerifyOptions& options) {
    Ctx ctx{options, {}};
    check_puzzles(ctx);
    check_normalization(ctx);
    check_grad_fd(ctx);
    check_eval_grad_fd(ctx);
    check_theorem1(ctx);
    check_corollary1(ctx);
    check_theorem2(ctx);
    check_drift_identities(ctx);

    if (!options.out_dir.empty()) {
        const auto dir = resolve_output_path(options.out_dir);
        std::filesystem::create_directories(dir);
        std::ostringstream report_lines;
        for (const auto& check : ctx.report.checks)
            report_lines << json{{"check", check.name},
                                 {"pass", check.pass},
                                 {"detail", check.detail}}
                                .dump()
                         << '\n';
        const auto report_text = report_lines.str();
        write_file_atomic(dir / "verify_report.jsonl", report_text);

        json options_json{{"seed", options.seed},
                          {"fd_cases", options.fd_cases},
                          {"eval_grad_instances", options.eval_grad_instances},
                          {"thm2_instances", options.thm2_instances},
                          {"cor1_triples", options.cor1_triples},
                          {"tilt_instances", options.tilt_instances},
                          {"puzzles_per_size", options.puzzles_per_size},
                          {"min_n_ppl", options.min_n_ppl},
                          {"max_n_ppl", options.max_n_ppl}};
        RunManifest manifest;
        manifest.config_hash = sha256_hex(options_json.dump());
        manifest.tool_version = kToolVersion;
        StageEntry stage;
        stage.name = "verify";
        stage.status = ctx.report.all_pass ? "ok" : "failed";
        stage.artifacts.push_back({"verify_report.jsonl", sha256_hex(report_text)});
        manifest.stages.push_back(stage);  // wall is omitted: byte-stable reruns
        manifest.save(dir / "verify_manifest.json");
    }
    return ctx.report;
}

}  // namespace kklab::exp
