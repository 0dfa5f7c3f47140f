// kklab: exact small-policy laboratory for GRPO / SFT / re-distillation
// experiments on Knight & Knave puzzles.

#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "kklab/analysis/interpolate.hpp"
#include "kklab/analysis/modes.hpp"
#include "kklab/analysis/position_profile.hpp"
#include "kklab/effects/delta_estimator.hpp"
#include "kklab/effects/effects.hpp"
#include "kklab/exp/pipeline.hpp"
#include "kklab/exp/plotdata.hpp"
#include "kklab/exp/verify.hpp"
#include "kklab/policy/checkpoint.hpp"
#include "kklab/puzzle/dataset.hpp"
#include "kklab/train/distill.hpp"
#include "kklab/util/io.hpp"
#include "kklab/util/stats.hpp"
#include "kklab/util/rng.hpp"
#include "kklab/util/sha256.hpp"

namespace {

using nlohmann::json;
using namespace kklab;

std::filesystem::path out_path(const std::string& p) { return exp::resolve_output_path(p); }

task::KkTask load_task(const std::string& data_path, const exp::ExperimentConfig& config) {
    auto records = puzzle::load_dataset(out_path(data_path));
    return task::KkTask(std::move(records), config.task);
}

// stage-restricted pipeline run backing the train-* subcommands: the input
// dataset is adopted into the run directory so resume hashing still works
int run_stages(const std::string& config_path, const std::string& data_path,
               const std::string& out_dir, std::vector<std::string> stages) {
    auto config = exp::load_experiment_config(out_path(config_path));
    if (!out_dir.empty()) config.output_dir = out_dir;
    config.stages = std::move(stages);

    const auto run_dir = exp::resolve_output_path(config.output_dir);
    std::filesystem::create_directories(run_dir);
    const auto dataset_dest = run_dir / exp::artifact::kDataset;
    if (!data_path.empty()) {
        const auto src = out_path(data_path);
        if (!std::filesystem::exists(src))
            throw std::runtime_error("dataset not found: " + src.string());
        if (!std::filesystem::exists(dataset_dest) ||
            file_sha256(src) != file_sha256(dataset_dest)) {
            write_file_atomic(dataset_dest, read_file(src));
        }
    }
    const auto result = exp::run_pipeline(config);
    return result.ok ? 0 : 1;
}

void write_effect_report(const std::filesystem::path& dir, const std::string& mode_name,
                         const std::vector<json>& records, double mean, double ci_low,
                         double ci_high) {
    std::ostringstream out;
    for (const auto& r : records) out << r.dump() << '\n';
    out << json{{"mean", mean}, {"ci_low", ci_low}, {"ci_high", ci_high}, {"mode", mode_name}}
               .dump()
        << '\n';
    write_file_atomic(dir / "effects.jsonl", out.str());
}

std::string hash_tokens(const std::vector<std::string>& words) {
    std::string joined;
    for (const auto& w : words) {
        joined += w;
        joined += ' ';
    }
    return sha256_hex(joined).substr(0, 16);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale GRPO / SFT / re-distillation laboratory on Knight & Knave puzzles"};
    app.require_subcommand(1);

    // ---- generate-data -------------------------------------------------
    auto* gen = app.add_subcommand("generate-data", "generate a unique-solution puzzle dataset");
    std::vector<int> gen_n_ppl{2};
    std::vector<int> gen_count{100};
    std::uint64_t gen_seed = 0;
    std::string gen_out = "dataset.jsonl";
    bool gen_fixed_names = false;
    gen->add_option("--n-ppl", gen_n_ppl, "people per puzzle (repeatable for mixed datasets)");
    gen->add_option("--count", gen_count, "puzzles per --n-ppl entry");
    gen->add_option("--seed", gen_seed, "generation seed")->required();
    gen->add_option("--out", gen_out, "output JSONL path");
    gen->add_flag("--fixed-names", gen_fixed_names,
                  "use the same leading pool names for every puzzle");

    // ---- train-sft / train-rl -------------------------------------------
    std::string cfg_path, data_path, out_dir;
    auto* tsft = app.add_subcommand("train-sft", "supervised fine-tuning stage");
    tsft->add_option("--config", cfg_path, "experiment config JSON")->required();
    tsft->add_option("--data", data_path, "dataset JSONL (copied into the run directory)");
    tsft->add_option("--out", out_dir, "run directory override");

    auto* trl = app.add_subcommand("train-rl", "GRPO reinforcement-learning stage");
    trl->add_option("--config", cfg_path, "experiment config JSON")->required();
    trl->add_option("--data", data_path, "dataset JSONL (copied into the run directory)");
    trl->add_option("--out", out_dir, "run directory override");

    auto* runp = app.add_subcommand("run", "run the configured pipeline stages");
    runp->add_option("--config", cfg_path, "experiment config JSON")->required();
    runp->add_option("--out", out_dir, "run directory override");

    // ---- redistill -------------------------------------------------------
    auto* redi = app.add_subcommand("redistill",
                                    "sample-filter-finetune a fresh base from an RL policy");
    std::string redi_source, redi_base, redi_prompts, redi_out, redi_cfg;
    redi->add_option("--source-ckpt", redi_source, "RL-trained checkpoint")->required();
    redi->add_option("--base-ckpt", redi_base, "fresh base checkpoint")->required();
    redi->add_option("--prompts", redi_prompts, "prompt dataset JSONL")->required();
    redi->add_option("--out", redi_out, "output directory")->required();
    redi->add_option("--config", redi_cfg, "experiment config JSON")->required();

    // ---- effects ----------------------------------------------------------
    auto* eff = app.add_subcommand("effects", "sample-effect reports for a dataset");
    std::string eff_ckpt, eff_data, eff_eval_data, eff_mode = "exact", eff_out = "effects";
    std::string eff_delta_from, eff_delta_to;
    int eff_mc_samples = 2000;
    std::uint64_t eff_seed = 0;
    eff->add_option("--ckpt", eff_ckpt, "policy checkpoint")->required();
    eff->add_option("--data", eff_data, "training dataset JSONL")->required();
    eff->add_option("--eval-data", eff_eval_data, "evaluation dataset JSONL (defaults to --data)");
    eff->add_option("--mode", eff_mode, "exact | mc | delta");
    eff->add_option("--out", eff_out, "output directory");
    eff->add_option("--config", cfg_path, "experiment config JSON")->required();
    eff->add_option("--delta-from", eff_delta_from, "delta mode: before checkpoint");
    eff->add_option("--delta-to", eff_delta_to, "delta mode: after checkpoint");
    eff->add_option("--mc-samples", eff_mc_samples, "samples per prompt in mc mode");
    eff->add_option("--seed", eff_seed, "mc sampling seed");

    // ---- analyze ----------------------------------------------------------
    auto* ana = app.add_subcommand("analyze", "verification instruments");
    ana->require_subcommand(1);
    auto* interp = ana->add_subcommand("interp", "parameter-space interpolation sweep");
    std::string interp_a, interp_b, interp_out = "interp.jsonl";
    int interp_points = 21;
    interp->add_option("--ckpt-a", interp_a, "checkpoint at lambda = 1")->required();
    interp->add_option("--ckpt-b", interp_b, "checkpoint at lambda = 0")->required();
    interp->add_option("--data", data_path, "evaluation dataset JSONL")->required();
    interp->add_option("--config", cfg_path, "experiment config JSON")->required();
    interp->add_option("--points", interp_points, "grid points");
    interp->add_option("--out", interp_out, "output JSONL");

    auto* positions = ana->add_subcommand("positions", "position-wise logprob profiles");
    std::string pos_eval_ckpt, pos_out = "positions.jsonl";
    std::vector<std::string> pos_ckpts;
    double pos_q = 0.01;
    int pos_rollouts = 512;
    std::uint64_t pos_seed = 0;
    positions->add_option("--eval-ckpt", pos_eval_ckpt,
                          "policy whose logprobs are measured (e.g. the initial policy)")
        ->required();
    positions->add_option("--ckpt", pos_ckpts, "rollout checkpoints (repeatable)")->required();
    positions->add_option("--data", data_path, "prompt dataset JSONL")->required();
    positions->add_option("--config", cfg_path, "experiment config JSON")->required();
    positions->add_option("--q", pos_q, "quantile level in (0, 0.5]");
    positions->add_option("--rollouts", pos_rollouts, "rollouts per checkpoint");
    positions->add_option("--seed", pos_seed, "rollout seed");
    positions->add_option("--out", pos_out, "output JSONL");

    auto* modes = ana->add_subcommand("modes", "output-mode proportions per checkpoint");
    std::string modes_rules, modes_out = "modes.jsonl";
    std::vector<std::string> modes_ckpts;
    int modes_rollouts = 512;
    std::uint64_t modes_seed = 0;
    modes->add_option("--ckpt", modes_ckpts, "checkpoints (repeatable, step inferred by order)")
        ->required();
    modes->add_option("--data", data_path, "prompt dataset JSONL")->required();
    modes->add_option("--config", cfg_path, "experiment config JSON")->required();
    modes->add_option("--rules", modes_rules, "rule table JSON (prefix/contains per label)");
    modes->add_option("--rollouts", modes_rollouts, "rollouts per checkpoint");
    modes->add_option("--seed", modes_seed, "rollout seed");
    modes->add_option("--out", modes_out, "output JSONL");

    // ---- plot-data ---------------------------------------------------------
    auto* plot = app.add_subcommand("plot-data", "flatten traces into tidy plot tables");
    std::string plot_kind, plot_out;
    std::vector<std::string> plot_in;
    plot->add_option("--kind", plot_kind, "rl-trace | effects | interp | positions | modes")
        ->required();
    plot->add_option("--in", plot_in, "input files (repeatable)")->required();
    plot->add_option("--out", plot_out, "output TSV")->required();

    // ---- verify --------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "run the oracle and theorem suites");
    exp::VerifyOptions verify_options;
    std::string verify_out;
    verify->add_option("--seed", verify_options.seed, "suite seed");
    verify->add_option("--fd-cases", verify_options.fd_cases, "finite-difference cases");
    verify->add_option("--thm2-instances", verify_options.thm2_instances, "theorem 2 instances");
    verify->add_option("--cor1-triples", verify_options.cor1_triples, "corollary 1 triples");
    verify->add_option("--puzzles-per-size", verify_options.puzzles_per_size,
                       "round-trip puzzles per n_ppl");
    verify->add_option("--max-n-ppl", verify_options.max_n_ppl, "largest puzzle size");
    verify->add_option("--out", verify_out, "directory for the report and manifest");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (gen_count.size() == 1 && gen_n_ppl.size() > 1)
                gen_count.assign(gen_n_ppl.size(), gen_count[0]);
            if (gen_count.size() != gen_n_ppl.size())
                throw std::invalid_argument("--count must match --n-ppl entries");
            std::vector<puzzle::DatasetSlice> slices;
            for (std::size_t i = 0; i < gen_n_ppl.size(); ++i)
                slices.push_back({gen_n_ppl[i], gen_count[i]});
            puzzle::GeneratorOptions opt;
            opt.sample_names = !gen_fixed_names;
            const auto records = puzzle::generate_dataset(slices, opt, gen_seed);
            puzzle::save_dataset(out_path(gen_out), records);
            std::cout << "wrote " << records.size() << " puzzles to " << gen_out << "\n";
            return 0;
        }
        if (tsft->parsed()) return run_stages(cfg_path, data_path, out_dir, {"sft"});
        if (trl->parsed()) return run_stages(cfg_path, data_path, out_dir, {"rl"});
        if (runp->parsed()) {
            auto config = exp::load_experiment_config(out_path(cfg_path));
            if (!out_dir.empty()) config.output_dir = out_dir;
            return exp::run_pipeline(config).ok ? 0 : 1;
        }

        if (redi->parsed()) {
            const auto config = exp::load_experiment_config(out_path(redi_cfg));
            const auto task = load_task(redi_prompts, config);
            const auto model =
                task::make_policy_model(task, config.policy.kind, config.policy.context_order);
            const auto source = policy::load_checkpoint(out_path(redi_source));
            const auto base = policy::load_checkpoint(out_path(redi_base));
            if (!source.model.same_family(model) || !base.model.same_family(model))
                throw std::runtime_error("redistill: checkpoint family does not match the task");
            const auto prompts = task::PromptSet::all(task);
            const auto evaluator = [&](std::span<const double> p) {
                return effects::eval_accuracy(
                           model, p, prompts,
                           exp::eval_method_of(config, derive_seed(config.seed, 0xce11ULL)))
                    .value;
            };
            const int l_filter = config.redistill.l_filter > 0 ? config.redistill.l_filter
                                                               : task.l_max();
            const auto result = train::redistill(
                task, model, source.params, prompts, base.params, config.sft, l_filter,
                config.redistill.samples_per_prompt, config.redistill.temperature,
                derive_seed(config.seed, 0x7264ULL), evaluator);
            const auto dir = out_path(redi_out);
            std::filesystem::create_directories(dir);
            std::ostringstream lines;
            for (const auto& ex : result.distill_set.examples)
                lines << json{{"prompt_id", task.record(ex.prompt_index).id},
                              {"tokens", model.vocab.decode(ex.target.tokens)},
                              {"reward", 1}}
                             .dump()
                      << '\n';
            write_file_atomic(dir / "distill_set.jsonl", lines.str());
            policy::save_checkpoint(dir / "redistill.ckpt", model, result.params);
            write_file_atomic(dir / "redistill_report.json",
                              json{{"accuracy_before", result.accuracy_before},
                                   {"accuracy_after", result.accuracy_after},
                                   {"n_sampled", result.distill_set.n_sampled},
                                   {"n_kept", result.distill_set.n_kept}}
                                      .dump(2) +
                                  "\n");
            std::cout << "redistilled accuracy " << result.accuracy_before << " -> "
                      << result.accuracy_after << "\n";
            return 0;
        }

        if (eff->parsed()) {
            const auto config = exp::load_experiment_config(out_path(cfg_path));
            const auto task = load_task(eff_data, config);
            const auto eval_task_storage =
                eff_eval_data.empty() ? nullptr
                                      : std::make_unique<task::KkTask>(load_task(eff_eval_data,
                                                                                 config));
            const auto model =
                task::make_policy_model(task, config.policy.kind, config.policy.context_order);
            const auto ckpt = policy::load_checkpoint(out_path(eff_ckpt));
            if (!ckpt.model.same_family(model))
                throw std::runtime_error("effects: checkpoint family does not match the task");
            const auto dir = out_path(eff_out);
            std::filesystem::create_directories(dir);

            std::vector<json> records;
            std::vector<double> values;
            if (eff_mode == "delta") {
                if (eff_delta_from.empty() || eff_delta_to.empty())
                    throw std::invalid_argument(
                        "effects: delta mode needs --delta-from and --delta-to");
                const auto from = policy::load_checkpoint(out_path(eff_delta_from));
                const auto to = policy::load_checkpoint(out_path(eff_delta_to));
                const auto delta = effects::ParamDelta::between(from.params, to.params);
                std::vector<double> grad(model.param_dim());
                std::vector<effects::DeltaEffectRecord> recs;
                for (int i = 0; i < task.n_prompts(); ++i) {
                    const auto target = task.sft_target(i);
                    std::fill(grad.begin(), grad.end(), 0.0);
                    policy::accumulate_grad_logprob(model, ckpt.params, task.prompt(i), target,
                                                    1.0 / double(target.length()), grad);
                    effects::DeltaEffectRecord rec;
                    rec.prompt_index = i;
                    rec.value = effects::delta_effect_of_grad(grad, 1.0, delta,
                                                              effects::DeltaMode::Sgd);
                    rec.valid = !std::isnan(rec.value);
                    recs.push_back(rec);
                    records.push_back(json{{"prompt_id", task.record(i).id},
                                           {"response_hash",
                                            hash_tokens(model.vocab.decode(target.tokens))},
                                           {"V", rec.valid ? rec.value : 0.0},
                                           {"reward", task.reward(i, target)}});
                }
                const auto report =
                    effects::aggregate_delta_effects(recs, effects::DeltaMode::Sgd);
                write_effect_report(dir, "delta", records, report.mean, report.ci_low,
                                    report.ci_high);
            } else {
                const auto method = eff_mode == "exact"
                                        ? effects::EvalMethod::exact()
                                        : effects::EvalMethod::monte_carlo(eff_mc_samples,
                                                                           eff_seed);
                const task::Task& eval_task =
                    eval_task_storage ? static_cast<const task::Task&>(*eval_task_storage)
                                      : static_cast<const task::Task&>(task);
                const auto g_e = effects::eval_gradient(
                    model, ckpt.params, task::PromptSet::all(eval_task), method);
                for (int i = 0; i < task.n_prompts(); ++i) {
                    const auto target = task.sft_target(i);
                    const double v = effects::sample_effect(model, ckpt.params, task.prompt(i),
                                                            target, g_e.g);
                    values.push_back(v);
                    records.push_back(json{{"prompt_id", task.record(i).id},
                                           {"response_hash",
                                            hash_tokens(model.vocab.decode(target.tokens))},
                                           {"V", v},
                                           {"reward", task.reward(i, target)}});
                }
                const double mean = stats::mean(values);
                const auto ci = stats::mean_ci95(values);
                write_effect_report(dir, eff_mode, records, mean, ci.lo, ci.hi);
            }
            std::cout << "wrote " << (dir / "effects.jsonl").string() << "\n";
            return 0;
        }

        if (interp->parsed()) {
            const auto config = exp::load_experiment_config(out_path(cfg_path));
            const auto task = load_task(data_path, config);
            const auto model =
                task::make_policy_model(task, config.policy.kind, config.policy.context_order);
            const auto a = policy::load_checkpoint(out_path(interp_a));
            const auto b = policy::load_checkpoint(out_path(interp_b));
            if (!a.model.same_family(b.model))
                throw std::runtime_error("interp: checkpoint families differ");
            const auto grid = analysis::uniform_lambda_grid(interp_points);
            const auto sweep = analysis::interpolate(
                model, a.params, b.params, grid, task::PromptSet::all(task),
                exp::eval_method_of(config, derive_seed(config.seed, 0x1a11ULL)));
            std::ostringstream out;
            for (std::size_t i = 0; i < grid.size(); ++i)
                out << json{{"lambda", sweep.lambda_grid[i]}, {"accuracy", sweep.accuracy[i]}}
                           .dump()
                    << '\n';
            write_file_atomic(out_path(interp_out), out.str());
            return 0;
        }

        if (positions->parsed()) {
            const auto config = exp::load_experiment_config(out_path(cfg_path));
            const auto task = load_task(data_path, config);
            const auto model =
                task::make_policy_model(task, config.policy.kind, config.policy.context_order);
            const auto eval_ckpt = policy::load_checkpoint(out_path(pos_eval_ckpt));
            std::ostringstream out;
            for (std::size_t c = 0; c < pos_ckpts.size(); ++c) {
                const auto ckpt = policy::load_checkpoint(out_path(pos_ckpts[c]));
                std::vector<analysis::TaggedResponse> rollouts;
                policy::SampleOptions opt;
                opt.temperature = config.rl.rl.temperature;
                opt.l_max = config.rl.rl.l_max;
                for (int i = 0; i < pos_rollouts; ++i) {
                    const int prompt_index = i % task.n_prompts();
                    rollouts.push_back(
                        {prompt_index,
                         policy::sample(model, ckpt.params, task.prompt(prompt_index), opt,
                                        derive_seed(pos_seed, c, std::uint64_t(i)))});
                }
                const auto profile = analysis::position_profile(model, eval_ckpt.params, task,
                                                                rollouts, pos_q);
                for (std::size_t t = 0; t < profile.mean_logprob.size(); ++t)
                    out << json{{"step", int(c)},
                                {"position", int(t)},
                                {"mean_logprob", profile.mean_logprob[t]},
                                {"quantile_logprob", profile.quantile_logprob[t]},
                                {"count", profile.count[t]},
                                {"low_confidence", bool(profile.low_confidence[t])}}
                               .dump()
                        << '\n';
            }
            write_file_atomic(out_path(pos_out), out.str());
            return 0;
        }

        if (modes->parsed()) {
            const auto config = exp::load_experiment_config(out_path(cfg_path));
            const auto task = load_task(data_path, config);
            const auto model =
                task::make_policy_model(task, config.policy.kind, config.policy.context_order);
            analysis::ModeRuleTable table;
            if (!modes_rules.empty()) {
                const auto rules_json = json::parse(read_file(out_path(modes_rules)));
                for (const auto& r : rules_json.at("rules")) {
                    analysis::ModeRule rule;
                    rule.label = r.at("label").get<std::string>();
                    rule.prefix = r.at("prefix").get<std::vector<std::string>>();
                    if (r.contains("contains"))
                        rule.contains = r.at("contains").get<std::string>();
                    table.rules.push_back(std::move(rule));
                }
                table.fallback = rules_json.value("fallback", std::string("others"));
            } else {
                if (config.task.style == task::ResponseStyle::Trace) {
                    table.rules.push_back({"trace-backtrack", {"assume"}, std::string("contra")});
                    table.rules.push_back({"trace", {"assume"}, std::nullopt});
                }
                table.rules.push_back({"direct", {"boxed{"}, std::nullopt});
            }
            std::vector<analysis::SteppedResponse> rows;
            policy::SampleOptions opt;
            opt.temperature = config.rl.rl.temperature;
            opt.l_max = config.rl.rl.l_max;
            for (std::size_t c = 0; c < modes_ckpts.size(); ++c) {
                const auto ckpt = policy::load_checkpoint(out_path(modes_ckpts[c]));
                for (int i = 0; i < modes_rollouts; ++i) {
                    const int prompt_index = i % task.n_prompts();
                    const auto response =
                        policy::sample(model, ckpt.params, task.prompt(prompt_index), opt,
                                       derive_seed(modes_seed, c, std::uint64_t(i)));
                    rows.push_back({int(c), model.vocab.decode(response.tokens)});
                }
            }
            std::ostringstream out;
            for (const auto& row : analysis::mode_proportions(table, rows))
                for (const auto& [label, p] : row.proportion)
                    out << json{{"step", row.step}, {"label", label}, {"proportion", p}}.dump()
                        << '\n';
            write_file_atomic(out_path(modes_out), out.str());
            return 0;
        }

        if (plot->parsed()) {
            std::vector<std::filesystem::path> inputs;
            for (const auto& p : plot_in) inputs.push_back(out_path(p));
            exp::emit_plotdata(plot_kind, inputs, out_path(plot_out));
            return 0;
        }

        if (verify->parsed()) {
            verify_options.out_dir = verify_out;
            const auto report = exp::run_verify(verify_options);
            std::cout << (report.all_pass ? "verify: all checks passed"
                                          : "verify: FAILURES present")
                      << "\n";
            return report.all_pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
