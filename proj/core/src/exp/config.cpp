#include "kklab/exp/config.hpp"

#include <cstdlib>
#include <set>
#include <stdexcept>

#include <json.hpp>

#include "kklab/util/io.hpp"
#include "kklab/util/sha256.hpp"

namespace kklab::exp {

using nlohmann::json;

std::filesystem::path resolve_output_path(const std::filesystem::path& path) {
    if (path.is_absolute()) return path;
    const char* root = std::getenv(kOutputRootEnv);
    if (root && *root) return std::filesystem::path(root) / path;
    return path;
}

namespace {

void reject_unknown_keys(const json& j, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (!known.count(key))
            throw std::invalid_argument("config: unknown key '" + key + "' in " + where);
    }
}

train::AdamConfig parse_adam(const json& j, const train::AdamConfig& defaults) {
    train::AdamConfig adam = defaults;
    adam.beta1 = j.value("adam_beta1", adam.beta1);
    adam.beta2 = j.value("adam_beta2", adam.beta2);
    adam.eps = j.value("adam_eps", adam.eps);
    return adam;
}

train::SFTConfig parse_sft(const json& j, const std::string& where) {
    reject_unknown_keys(j,
                        {"batch_size", "learning_rate", "epochs", "max_seq_len", "adam_beta1",
                         "adam_beta2", "adam_eps"},
                        where);
    train::SFTConfig cfg;
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.max_seq_len = j.value("max_seq_len", cfg.max_seq_len);
    cfg.adam = parse_adam(j, cfg.adam);
    return cfg;
}

json dump_sft(const train::SFTConfig& cfg) {
    json j;
    j["batch_size"] = cfg.batch_size;
    j["learning_rate"] = cfg.learning_rate;
    j["epochs"] = cfg.epochs;
    j["max_seq_len"] = cfg.max_seq_len;
    j["adam_beta1"] = cfg.adam.beta1;
    j["adam_beta2"] = cfg.adam.beta2;
    j["adam_eps"] = cfg.adam.eps;
    return j;
}

}  // namespace

void ExperimentConfig::validate() const {
    if (!has_seed) throw std::invalid_argument("config: explicit 'seed' is required");
    if (name.empty()) throw std::invalid_argument("config: name must be non-empty");
    if (dataset.slices.empty()) throw std::invalid_argument("config: dataset.slices empty");
    for (const auto& slice : dataset.slices) {
        if (slice.n_ppl < 2 || slice.n_ppl > 16)
            throw std::invalid_argument("config: dataset n_ppl out of [2,16]");
        if (slice.count < 1) throw std::invalid_argument("config: dataset count must be >= 1");
    }
    if (task.l_max < 2) throw std::invalid_argument("config: task.l_max too small");
    if (policy.context_order < 0 || policy.context_order > 6)
        throw std::invalid_argument("config: policy.context_order out of [0,6]");
    if (pretrain.targets_per_prompt < 1)
        throw std::invalid_argument("config: pretrain.targets_per_prompt must be >= 1");
    pretrain.sft.validate();
    sft.validate();
    rl.rl.validate();
    if (rl.steps < 0) throw std::invalid_argument("config: rl.steps must be >= 0");
    if (rl.checkpoint_every < 1)
        throw std::invalid_argument("config: rl.checkpoint_every must be >= 1");
    if (redistill.samples_per_prompt < 1)
        throw std::invalid_argument("config: redistill.samples_per_prompt must be >= 1");
    if (!(redistill.temperature > 0.0))
        throw std::invalid_argument("config: redistill.temperature must be > 0");
    if (eval.samples_per_prompt < 1)
        throw std::invalid_argument("config: eval.samples_per_prompt must be >= 1");
    if (analysis.interp_points < 2)
        throw std::invalid_argument("config: analysis.interp_points must be >= 2");
    if (!(analysis.position_q > 0.0 && analysis.position_q <= 0.5))
        throw std::invalid_argument("config: analysis.position_q outside (0, 0.5]");
    if (analysis.rollouts_per_checkpoint < 1)
        throw std::invalid_argument("config: analysis.rollouts_per_checkpoint must be >= 1");
    if (output_dir.empty()) throw std::invalid_argument("config: output_dir required");
    const std::set<std::string> known{"generate", "pretrain", "sft",     "rl",
                                      "redistill", "effects", "analyze"};
    if (stages.empty()) throw std::invalid_argument("config: stages empty");
    for (const auto& s : stages)
        if (!known.count(s)) throw std::invalid_argument("config: unknown stage '" + s + "'");
}

std::string ExperimentConfig::canonical_json() const {
    json j;
    j["name"] = name;
    j["seed"] = seed;
    json ds;
    json slices = json::array();
    for (const auto& s : dataset.slices) slices.push_back({{"n_ppl", s.n_ppl}, {"count", s.count}});
    ds["slices"] = slices;
    ds["fixed_names"] = dataset.fixed_names;
    ds["max_depth"] = dataset.max_depth;
    ds["max_atoms"] = dataset.max_atoms;
    j["dataset"] = ds;
    j["task"] = {{"style", task::response_style_name(task.style)}, {"l_max", task.l_max}};
    j["policy"] = {{"kind", policy::policy_kind_name(policy.kind)},
                   {"context_order", policy.context_order}};
    j["pretrain"] = {{"targets_per_prompt", pretrain.targets_per_prompt},
                     {"sft", dump_sft(pretrain.sft)}};
    j["sft"] = dump_sft(sft);
    json rl_json;
    rl_json["group_size"] = rl.rl.group_size;
    rl_json["prompts_per_rollout"] = rl.rl.prompts_per_rollout;
    rl_json["train_batch_size"] = rl.rl.train_batch_size;
    rl_json["clip_ratio"] = rl.rl.clip_ratio;
    rl_json["learning_rate"] = rl.rl.learning_rate;
    rl_json["warmup_steps"] = rl.rl.warmup_steps;
    rl_json["adam_beta1"] = rl.rl.adam.beta1;
    rl_json["adam_beta2"] = rl.rl.adam.beta2;
    rl_json["adam_eps"] = rl.rl.adam.eps;
    rl_json["temperature"] = rl.rl.temperature;
    rl_json["l_max"] = rl.rl.l_max;
    rl_json["kl_coefficient"] = rl.rl.kl_coefficient;
    rl_json["grad_clip_norm"] = rl.rl.grad_clip_norm;
    rl_json["steps"] = rl.steps;
    rl_json["checkpoint_every"] = rl.checkpoint_every;
    j["rl"] = rl_json;
    j["redistill"] = {{"samples_per_prompt", redistill.samples_per_prompt},
                      {"l_filter", redistill.l_filter},
                      {"temperature", redistill.temperature}};
    j["eval"] = {{"exact", eval.exact}, {"samples_per_prompt", eval.samples_per_prompt}};
    j["analysis"] = {{"interp_points", analysis.interp_points},
                     {"position_q", analysis.position_q},
                     {"rollouts_per_checkpoint", analysis.rollouts_per_checkpoint}};
    j["stages"] = stages;
    j["output_dir"] = output_dir.string();
    return j.dump();
}

std::string ExperimentConfig::hash() const { return sha256_hex(canonical_json()); }

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    const auto j = json::parse(json_text);
    reject_unknown_keys(j,
                        {"name", "seed", "dataset", "task", "policy", "pretrain", "sft", "rl",
                         "redistill", "eval", "analysis", "stages", "output_dir"},
                        "top level");

    ExperimentConfig cfg;
    cfg.name = j.value("name", cfg.name);
    if (j.contains("seed")) {
        cfg.seed = j.at("seed").get<std::uint64_t>();
        cfg.has_seed = true;
    }
    if (j.contains("dataset")) {
        const auto& ds = j.at("dataset");
        reject_unknown_keys(ds, {"slices", "fixed_names", "max_depth", "max_atoms"}, "dataset");
        cfg.dataset.slices.clear();
        for (const auto& s : ds.at("slices"))
            cfg.dataset.slices.push_back(
                {s.at("n_ppl").get<int>(), s.at("count").get<int>()});
        cfg.dataset.fixed_names = ds.value("fixed_names", cfg.dataset.fixed_names);
        cfg.dataset.max_depth = ds.value("max_depth", cfg.dataset.max_depth);
        cfg.dataset.max_atoms = ds.value("max_atoms", cfg.dataset.max_atoms);
    }
    if (j.contains("task")) {
        const auto& t = j.at("task");
        reject_unknown_keys(t, {"style", "l_max"}, "task");
        if (t.contains("style"))
            cfg.task.style = task::response_style_from_name(t.at("style").get<std::string>());
        cfg.task.l_max = t.value("l_max", cfg.task.l_max);
    }
    if (j.contains("policy")) {
        const auto& p = j.at("policy");
        reject_unknown_keys(p, {"kind", "context_order"}, "policy");
        if (p.contains("kind"))
            cfg.policy.kind = policy::policy_kind_from_name(p.at("kind").get<std::string>());
        cfg.policy.context_order = p.value("context_order", cfg.policy.context_order);
    }
    if (j.contains("pretrain")) {
        const auto& p = j.at("pretrain");
        reject_unknown_keys(p, {"targets_per_prompt", "sft"}, "pretrain");
        cfg.pretrain.targets_per_prompt =
            p.value("targets_per_prompt", cfg.pretrain.targets_per_prompt);
        if (p.contains("sft")) cfg.pretrain.sft = parse_sft(p.at("sft"), "pretrain.sft");
    }
    if (j.contains("sft")) cfg.sft = parse_sft(j.at("sft"), "sft");
    if (j.contains("rl")) {
        const auto& r = j.at("rl");
        reject_unknown_keys(r,
                            {"group_size", "prompts_per_rollout", "train_batch_size",
                             "clip_ratio", "learning_rate", "warmup_steps", "adam_beta1",
                             "adam_beta2", "adam_eps", "temperature", "l_max",
                             "kl_coefficient", "grad_clip_norm", "steps", "checkpoint_every"},
                            "rl");
        auto& rl = cfg.rl.rl;
        rl.group_size = r.value("group_size", rl.group_size);
        rl.prompts_per_rollout = r.value("prompts_per_rollout", rl.prompts_per_rollout);
        rl.train_batch_size = r.value("train_batch_size",
                                      rl.group_size * rl.prompts_per_rollout);
        rl.clip_ratio = r.value("clip_ratio", rl.clip_ratio);
        rl.learning_rate = r.value("learning_rate", rl.learning_rate);
        rl.warmup_steps = r.value("warmup_steps", rl.warmup_steps);
        rl.adam = parse_adam(r, rl.adam);
        rl.temperature = r.value("temperature", rl.temperature);
        rl.l_max = r.value("l_max", rl.l_max);
        rl.kl_coefficient = r.value("kl_coefficient", rl.kl_coefficient);
        rl.grad_clip_norm = r.value("grad_clip_norm", rl.grad_clip_norm);
        cfg.rl.steps = r.value("steps", cfg.rl.steps);
        cfg.rl.checkpoint_every = r.value("checkpoint_every", cfg.rl.checkpoint_every);
    }
    if (j.contains("redistill")) {
        const auto& r = j.at("redistill");
        reject_unknown_keys(r, {"samples_per_prompt", "l_filter", "temperature"}, "redistill");
        cfg.redistill.samples_per_prompt =
            r.value("samples_per_prompt", cfg.redistill.samples_per_prompt);
        cfg.redistill.l_filter = r.value("l_filter", cfg.redistill.l_filter);
        cfg.redistill.temperature = r.value("temperature", cfg.redistill.temperature);
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        reject_unknown_keys(e, {"exact", "samples_per_prompt"}, "eval");
        cfg.eval.exact = e.value("exact", cfg.eval.exact);
        cfg.eval.samples_per_prompt = e.value("samples_per_prompt", cfg.eval.samples_per_prompt);
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        reject_unknown_keys(a, {"interp_points", "position_q", "rollouts_per_checkpoint"},
                            "analysis");
        cfg.analysis.interp_points = a.value("interp_points", cfg.analysis.interp_points);
        cfg.analysis.position_q = a.value("position_q", cfg.analysis.position_q);
        cfg.analysis.rollouts_per_checkpoint =
            a.value("rollouts_per_checkpoint", cfg.analysis.rollouts_per_checkpoint);
    }
    if (j.contains("stages")) cfg.stages = j.at("stages").get<std::vector<std::string>>();
    if (j.contains("output_dir"))
        cfg.output_dir = std::filesystem::path(j.at("output_dir").get<std::string>());

    cfg.validate();
    return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    return parse_experiment_config(read_file(path));
}

effects::EvalMethod eval_method_of(const ExperimentConfig& config, std::uint64_t seed) {
    if (config.eval.exact) return effects::EvalMethod::exact();
    return effects::EvalMethod::monte_carlo(config.eval.samples_per_prompt, seed);
}

}  // namespace kklab::exp
