#include "kklab/exp/pipeline.hpp"

#include <chrono>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "kklab/analysis/interpolate.hpp"
#include "kklab/analysis/modes.hpp"
#include "kklab/analysis/position_profile.hpp"
#include "kklab/effects/delta_estimator.hpp"
#include "kklab/policy/checkpoint.hpp"
#include "kklab/train/distill.hpp"
#include "kklab/train/grpo.hpp"
#include "kklab/train/sft.hpp"
#include "kklab/util/io.hpp"
#include "kklab/util/rng.hpp"
#include "kklab/util/sha256.hpp"

namespace kklab::exp {

using nlohmann::json;

namespace {

constexpr std::uint64_t kGenerateStream = 0x67656e65ULL;
constexpr std::uint64_t kPretrainStream = 0x70726574ULL;
constexpr std::uint64_t kSftStream = 0x736674ULL;
constexpr std::uint64_t kRlStream = 0x726cULL;
constexpr std::uint64_t kRedistillStream = 0x7264ULL;
constexpr std::uint64_t kEffectsStream = 0x656666ULL;
constexpr std::uint64_t kAnalyzeStream = 0x616e61ULL;
constexpr std::uint64_t kEvalStream = 0x6576616cULL;

struct PipelineContext {
    const ExperimentConfig& config;
    std::filesystem::path dir;

    std::unique_ptr<task::KkTask> task;
    policy::PolicyModel model;

    std::filesystem::path path(const std::string& name) const { return dir / name; }

    void ensure_task() {
        if (task) return;
        auto records = puzzle::load_dataset(path(artifact::kDataset));
        task = std::make_unique<task::KkTask>(std::move(records), config.task);
        model = task::make_policy_model(*task, config.policy.kind,
                                        config.policy.context_order);
    }

    std::vector<double> initial_rl_params() {
        ensure_task();
        if (std::filesystem::exists(path(artifact::kSftCkpt)))
            return policy::load_checkpoint(path(artifact::kSftCkpt)).params;
        if (std::filesystem::exists(path(artifact::kBaseCkpt)))
            return policy::load_checkpoint(path(artifact::kBaseCkpt)).params;
        return policy::zero_params(model);
    }

    double evaluate(std::span<const double> params, std::uint64_t eval_tag) {
        ensure_task();
        const auto prompts = task::PromptSet::all(*task);
        const auto method =
            eval_method_of(config, derive_seed(config.seed, kEvalStream, eval_tag));
        return effects::eval_accuracy(model, params, prompts, method).value;
    }
};

std::string checkpoint_name(int step) {
    std::ostringstream name;
    name << "checkpoints/step_" << std::setw(6) << std::setfill('0') << step << ".ckpt";
    return name.str();
}

train::SftDataset format_pretrain_dataset(PipelineContext& ctx) {
    ctx.ensure_task();
    train::SftDataset dataset;
    for (int i = 0; i < ctx.task->n_prompts(); ++i) {
        for (int k = 0; k < ctx.config.pretrain.targets_per_prompt; ++k) {
            dataset.push_back({i, ctx.task->format_target(
                                      i, derive_seed(ctx.config.seed, kPretrainStream,
                                                     std::uint64_t(k)))});
        }
    }
    return dataset;
}

analysis::ModeRuleTable default_mode_rules(task::ResponseStyle style) {
    analysis::ModeRuleTable table;
    if (style == task::ResponseStyle::Trace) {
        table.rules.push_back({"trace-backtrack", {"assume"}, std::string("contra")});
        table.rules.push_back({"trace", {"assume"}, std::nullopt});
    }
    table.rules.push_back({"direct", {"boxed{"}, std::nullopt});
    return table;
}

// ---- stages ----------------------------------------------------------

std::vector<std::string> stage_generate(PipelineContext& ctx) {
    puzzle::GeneratorOptions opt;
    opt.sample_names = !ctx.config.dataset.fixed_names;
    opt.max_depth = ctx.config.dataset.max_depth;
    opt.max_atoms = ctx.config.dataset.max_atoms;
    const auto records = puzzle::generate_dataset(
        ctx.config.dataset.slices, opt, derive_seed(ctx.config.seed, kGenerateStream));
    puzzle::save_dataset(ctx.path(artifact::kDataset), records);
    return {artifact::kDataset};
}

std::vector<std::string> stage_pretrain(PipelineContext& ctx) {
    ctx.ensure_task();
    const auto dataset = format_pretrain_dataset(ctx);
    std::ostringstream trace;
    const auto params = train::run_sft(
        *ctx.task, ctx.model, policy::zero_params(ctx.model), dataset, ctx.config.pretrain.sft,
        derive_seed(ctx.config.seed, kPretrainStream),
        [&](int epoch, double loss) {
            trace << json{{"epoch", epoch}, {"loss", loss}}.dump() << '\n';
        });
    policy::save_checkpoint(ctx.path(artifact::kBaseCkpt), ctx.model, params);
    write_file_atomic(ctx.path(artifact::kPretrainTrace), trace.str());
    return {artifact::kBaseCkpt, artifact::kPretrainTrace};
}

std::vector<std::string> stage_sft(PipelineContext& ctx) {
    ctx.ensure_task();
    train::SftDataset dataset;
    for (int i = 0; i < ctx.task->n_prompts(); ++i) dataset.push_back({i, ctx.task->sft_target(i)});
    std::vector<double> init = std::filesystem::exists(ctx.path(artifact::kBaseCkpt))
                                   ? policy::load_checkpoint(ctx.path(artifact::kBaseCkpt)).params
                                   : policy::zero_params(ctx.model);
    std::ostringstream trace;
    const auto params = train::run_sft(*ctx.task, ctx.model, std::move(init), dataset,
                                       ctx.config.sft, derive_seed(ctx.config.seed, kSftStream),
                                       [&](int epoch, double loss) {
                                           trace << json{{"epoch", epoch}, {"loss", loss}}.dump()
                                                 << '\n';
                                       });
    policy::save_checkpoint(ctx.path(artifact::kSftCkpt), ctx.model, params);
    write_file_atomic(ctx.path(artifact::kSftTrace), trace.str());
    return {artifact::kSftCkpt, artifact::kSftTrace};
}

std::vector<std::string> stage_rl(PipelineContext& ctx) {
    ctx.ensure_task();
    auto init = ctx.initial_rl_params();
    policy::save_checkpoint(ctx.path(artifact::kRlInitCkpt), ctx.model, init);

    std::vector<std::string> artifacts{artifact::kRlInitCkpt, artifact::kRlTrace,
                                       artifact::kRlCkpt};
    std::ostringstream trace;
    const auto prompts = task::PromptSet::all(*ctx.task);
    const auto run = train::run_grpo(
        *ctx.task, prompts, ctx.model, std::move(init), ctx.config.rl.rl, ctx.config.rl.steps,
        derive_seed(ctx.config.seed, kRlStream),
        [&](int step, const train::StepStats& stats, std::span<const double> params) {
            trace << json{{"step", step},
                          {"train_acc", stats.train_acc},
                          {"mean_len", stats.mean_len},
                          {"entropy", stats.entropy},
                          {"clip_frac", stats.clip_frac},
                          {"loss", stats.loss}}
                         .dump()
                  << '\n';
            if ((step + 1) % ctx.config.rl.checkpoint_every == 0) {
                const auto name = checkpoint_name(step + 1);
                policy::save_checkpoint(ctx.path(name), ctx.model, params);
                artifacts.push_back(name);
            }
        });
    policy::save_checkpoint(ctx.path(artifact::kRlCkpt), ctx.model, run.params);
    write_file_atomic(ctx.path(artifact::kRlTrace), trace.str());
    return artifacts;
}

std::vector<std::string> stage_redistill(PipelineContext& ctx) {
    ctx.ensure_task();
    const auto rl = policy::load_checkpoint(ctx.path(artifact::kRlCkpt));
    std::vector<double> fresh_base =
        std::filesystem::exists(ctx.path(artifact::kBaseCkpt))
            ? policy::load_checkpoint(ctx.path(artifact::kBaseCkpt)).params
            : policy::zero_params(ctx.model);
    const int l_filter =
        ctx.config.redistill.l_filter > 0 ? ctx.config.redistill.l_filter : ctx.task->l_max();

    const auto prompts = task::PromptSet::all(*ctx.task);
    const auto result = train::redistill(
        *ctx.task, ctx.model, rl.params, prompts, std::move(fresh_base), ctx.config.sft,
        l_filter, ctx.config.redistill.samples_per_prompt, ctx.config.redistill.temperature,
        derive_seed(ctx.config.seed, kRedistillStream),
        [&](std::span<const double> p) { return ctx.evaluate(p, 1); });

    std::ostringstream set_lines;
    for (const auto& ex : result.distill_set.examples) {
        set_lines << json{{"prompt_id", ctx.task->record(ex.prompt_index).id},
                          {"tokens", ctx.model.vocab.decode(ex.target.tokens)},
                          {"reward", 1}}
                         .dump()
                  << '\n';
    }
    write_file_atomic(ctx.path(artifact::kDistillSet), set_lines.str());
    policy::save_checkpoint(ctx.path(artifact::kRedistillCkpt), ctx.model, result.params);

    json report;
    report["rl_accuracy"] = ctx.evaluate(rl.params, 2);
    report["accuracy_before"] = result.accuracy_before;
    report["accuracy_after"] = result.accuracy_after;
    report["n_sampled"] = result.distill_set.n_sampled;
    report["n_kept"] = result.distill_set.n_kept;
    write_file_atomic(ctx.path(artifact::kRedistillReport), report.dump(2) + "\n");
    return {artifact::kDistillSet, artifact::kRedistillCkpt, artifact::kRedistillReport};
}

std::vector<std::string> stage_effects(PipelineContext& ctx) {
    ctx.ensure_task();
    const auto init = policy::load_checkpoint(ctx.path(artifact::kRlInitCkpt));
    const auto final_ckpt = policy::load_checkpoint(ctx.path(artifact::kRlCkpt));
    const auto delta = effects::ParamDelta::between(init.params, final_ckpt.params);

    // datasets scored against the parameter movement of the RL run
    struct NamedDataset {
        std::string name;
        train::SftDataset examples;
    };
    std::vector<NamedDataset> datasets;
    {
        NamedDataset redistilled{"redistilled", {}};
        const auto set = train::build_distill_set(
            *ctx.task, ctx.model, final_ckpt.params, task::PromptSet::all(*ctx.task),
            ctx.task->l_max(), ctx.config.redistill.samples_per_prompt,
            ctx.config.redistill.temperature, derive_seed(ctx.config.seed, kEffectsStream, 1));
        redistilled.examples = set.examples;
        datasets.push_back(std::move(redistilled));

        NamedDataset truth{"ground-truth", {}};
        for (int i = 0; i < ctx.task->n_prompts(); ++i)
            truth.examples.push_back({i, ctx.task->answer_target(i)});
        datasets.push_back(std::move(truth));

        NamedDataset shuffled{"shuffled-answers", {}};
        for (int i = 0; i < ctx.task->n_prompts(); ++i)
            shuffled.examples.push_back(
                {i, ctx.task->format_target(i, derive_seed(ctx.config.seed, kEffectsStream, 2))});
        datasets.push_back(std::move(shuffled));
    }

    std::ostringstream records_out, summary_out;
    std::vector<double> grad(ctx.model.param_dim());
    for (const auto& dataset : datasets) {
        for (auto mode : {effects::DeltaMode::Sgd, effects::DeltaMode::Adam}) {
            std::vector<effects::DeltaEffectRecord> records;
            for (const auto& ex : dataset.examples) {
                std::fill(grad.begin(), grad.end(), 0.0);
                policy::accumulate_grad_logprob(ctx.model, init.params,
                                                ctx.task->prompt(ex.prompt_index), ex.target,
                                                1.0 / double(ex.target.length()), grad);
                effects::DeltaEffectRecord rec;
                rec.prompt_index = ex.prompt_index;
                rec.value = effects::delta_effect_of_grad(grad, 1.0, delta, mode);
                rec.valid = !std::isnan(rec.value);
                records.push_back(rec);
                if (mode == effects::DeltaMode::Sgd) {
                    const auto words = ctx.model.vocab.decode(ex.target.tokens);
                    std::string joined;
                    for (const auto& w : words) {
                        joined += w;
                        joined += ' ';
                    }
                    records_out << json{{"dataset", dataset.name},
                                        {"prompt_id",
                                         ctx.task->record(ex.prompt_index).id},
                                        {"response_hash", sha256_hex(joined).substr(0, 16)},
                                        {"V", rec.valid ? rec.value : 0.0},
                                        {"valid", rec.valid},
                                        {"reward", ctx.task->reward(ex.prompt_index, ex.target)}}
                                       .dump()
                                << '\n';
                }
            }
            const auto report = effects::aggregate_delta_effects(records, mode);
            summary_out << json{{"dataset", dataset.name},
                                {"mode", effects::delta_mode_name(mode)},
                                {"mean", report.mean},
                                {"ci_low", report.ci_low},
                                {"ci_high", report.ci_high},
                                {"n", int(report.records.size())},
                                {"n_missing", report.n_missing}}
                               .dump()
                        << '\n';
        }
    }
    write_file_atomic(ctx.path(artifact::kEffects), records_out.str());
    write_file_atomic(ctx.path(artifact::kEffectsSummary), summary_out.str());
    return {artifact::kEffects, artifact::kEffectsSummary};
}

std::vector<std::string> stage_analyze(PipelineContext& ctx) {
    ctx.ensure_task();
    const auto init = policy::load_checkpoint(ctx.path(artifact::kRlInitCkpt));
    const auto final_ckpt = policy::load_checkpoint(ctx.path(artifact::kRlCkpt));
    const auto prompts = task::PromptSet::all(*ctx.task);

    // parameter-space interpolation, lambda = 0 at the initial policy
    {
        const auto grid = analysis::uniform_lambda_grid(ctx.config.analysis.interp_points);
        const auto method =
            eval_method_of(ctx.config, derive_seed(ctx.config.seed, kAnalyzeStream, 7));
        const auto sweep = analysis::interpolate(ctx.model, final_ckpt.params, init.params,
                                                 grid, prompts, method);
        std::ostringstream out;
        for (std::size_t i = 0; i < sweep.lambda_grid.size(); ++i)
            out << json{{"lambda", sweep.lambda_grid[i]}, {"accuracy", sweep.accuracy[i]}}.dump()
                << '\n';
        write_file_atomic(ctx.path(artifact::kInterp), out.str());
    }

    // checkpoints in step order: the initial policy plus every saved one
    std::vector<std::pair<int, std::filesystem::path>> checkpoints{{0,
                                                                    ctx.path(artifact::kRlInitCkpt)}};
    const auto ckpt_dir = ctx.path("checkpoints");
    if (std::filesystem::exists(ckpt_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(ckpt_dir)) {
            const auto stem = entry.path().stem().string();  // step_000050
            if (stem.rfind("step_", 0) != 0) continue;
            checkpoints.emplace_back(std::stoi(stem.substr(5)), entry.path());
        }
    }
    std::sort(checkpoints.begin(), checkpoints.end());

    const auto rules = default_mode_rules(ctx.config.task.style);
    std::ostringstream positions_out, modes_out;
    std::vector<analysis::SteppedResponse> mode_rows;
    for (const auto& [step, ckpt_path] : checkpoints) {
        const auto ckpt = policy::load_checkpoint(ckpt_path);
        std::vector<analysis::TaggedResponse> rollouts;
        policy::SampleOptions opt;
        opt.temperature = ctx.config.rl.rl.temperature;
        opt.l_max = ctx.config.rl.rl.l_max;
        for (int i = 0; i < ctx.config.analysis.rollouts_per_checkpoint; ++i) {
            const int prompt_index = i % ctx.task->n_prompts();
            const auto response = policy::sample(
                ctx.model, ckpt.params, ctx.task->prompt(prompt_index), opt,
                derive_seed(ctx.config.seed, kAnalyzeStream,
                            std::uint64_t(step) * 1000003 + std::uint64_t(i)));
            mode_rows.push_back({step, ctx.model.vocab.decode(response.tokens)});
            rollouts.push_back({prompt_index, response});
        }
        const auto profile = analysis::position_profile(ctx.model, init.params, *ctx.task,
                                                        rollouts,
                                                        ctx.config.analysis.position_q);
        for (std::size_t t = 0; t < profile.mean_logprob.size(); ++t) {
            positions_out << json{{"step", step},
                                  {"position", int(t)},
                                  {"mean_logprob", profile.mean_logprob[t]},
                                  {"quantile_logprob", profile.quantile_logprob[t]},
                                  {"count", profile.count[t]},
                                  {"low_confidence", bool(profile.low_confidence[t])}}
                                 .dump()
                          << '\n';
        }
    }
    for (const auto& row : analysis::mode_proportions(rules, mode_rows)) {
        for (const auto& [label, p] : row.proportion)
            modes_out << json{{"step", row.step}, {"label", label}, {"proportion", p}}.dump()
                      << '\n';
    }
    write_file_atomic(ctx.path(artifact::kPositions), positions_out.str());
    write_file_atomic(ctx.path(artifact::kModes), modes_out.str());
    return {artifact::kInterp, artifact::kPositions, artifact::kModes};
}

}  // namespace

PipelineResult run_pipeline(const ExperimentConfig& config) {
    config.validate();
    PipelineResult result;
    result.run_dir = resolve_output_path(config.output_dir);
    std::filesystem::create_directories(result.run_dir);
    DirLock lock(result.run_dir);

    const auto manifest_path = result.run_dir / artifact::kManifest;
    if (auto existing = RunManifest::try_load(manifest_path)) {
        if (existing->config_hash != config.hash())
            throw std::runtime_error(
                "run_pipeline: output directory holds artifacts from a different config: " +
                result.run_dir.string());
        result.manifest = std::move(*existing);
    } else {
        result.manifest.config_hash = config.hash();
        result.manifest.tool_version = kToolVersion;
    }

    PipelineContext ctx{config, result.run_dir, nullptr, {}};

    using StageFn = std::function<std::vector<std::string>(PipelineContext&)>;
    const std::vector<std::pair<std::string, StageFn>> registry{
        {"generate", stage_generate}, {"pretrain", stage_pretrain}, {"sft", stage_sft},
        {"rl", stage_rl},             {"redistill", stage_redistill},
        {"effects", stage_effects},   {"analyze", stage_analyze},
    };

    result.ok = true;
    for (const auto& stage_name : config.stages) {
        const auto it = std::find_if(registry.begin(), registry.end(),
                                     [&](const auto& p) { return p.first == stage_name; });
        if (it == registry.end()) throw std::logic_error("unknown stage " + stage_name);

        // resume: keep a finished stage whose artifacts still hash clean
        if (const auto* done = result.manifest.find_stage(stage_name);
            done && done->status == "ok") {
            bool clean = true;
            for (const auto& a : done->artifacts) {
                const auto p = result.run_dir / a.path;
                if (!std::filesystem::exists(p) || file_sha256(p) != a.sha256) {
                    clean = false;
                    break;
                }
            }
            if (clean) {
                std::cerr << "[pipeline] " << stage_name << ": up to date\n";
                continue;
            }
        }

        StageEntry entry;
        entry.name = stage_name;
        const auto started = std::chrono::steady_clock::now();
        try {
            const auto artifacts = it->second(ctx);
            for (const auto& rel : artifacts)
                entry.artifacts.push_back({rel, file_sha256(result.run_dir / rel)});
            entry.status = "ok";
        } catch (const std::exception& e) {
            entry.status = "failed";
            std::cerr << "[pipeline] " << stage_name << " failed: " << e.what() << "\n";
            result.ok = false;
        }
        entry.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();

        if (auto* slot = result.manifest.find_stage(stage_name)) *slot = entry;
        else result.manifest.stages.push_back(entry);
        result.manifest.save(manifest_path);
        std::cerr << "[pipeline] " << stage_name << ": " << entry.status << " ("
                  << entry.wall_ms << " ms)\n";
        if (!result.ok) break;
    }
    return result;
}

}  // namespace kklab::exp
