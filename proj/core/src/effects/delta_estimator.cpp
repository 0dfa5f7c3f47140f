#include "kklab/effects/delta_estimator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "kklab/util/stats.hpp"
#include "kklab/util/vecmath.hpp"

namespace kklab::effects {

ParamDelta ParamDelta::between(std::span<const double> theta_before,
                               std::span<const double> theta_after) {
    if (theta_before.size() != theta_after.size())
        throw std::invalid_argument("ParamDelta: dimension mismatch");
    ParamDelta d;
    d.delta.resize(theta_before.size());
    for (std::size_t i = 0; i < d.delta.size(); ++i)
        d.delta[i] = theta_after[i] - theta_before[i];
    return d;
}

std::string delta_mode_name(DeltaMode mode) { return mode == DeltaMode::Sgd ? "sgd" : "adam"; }

double delta_effect_of_grad(std::span<const double> grad_logprob_over_len, double advantage,
                            const ParamDelta& delta, DeltaMode mode,
                            const train::AdamConfig& adam_config) {
    if (grad_logprob_over_len.size() != delta.delta.size())
        throw std::invalid_argument("delta_effect_of_grad: dimension mismatch");

    // squared norm of the loss gradient g = -advantage * grad_logprob/|a|
    double norm_sq = 0.0;
    for (double g : grad_logprob_over_len) norm_sq += advantage * advantage * g * g;
    if (norm_sq == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double inv_norm = 1.0 / std::sqrt(norm_sq);

    double acc = 0.0;
    if (mode == DeltaMode::Sgd) {
        for (std::size_t i = 0; i < delta.delta.size(); ++i)
            acc += -advantage * grad_logprob_over_len[i] * inv_norm * delta.delta[i];
        return -acc;
    }
    // one Adam step from zero moments; bias correction at t = 1 collapses
    // m_hat to g/||g|| and v_hat to its square
    for (std::size_t i = 0; i < delta.delta.size(); ++i) {
        const double g_hat = -advantage * grad_logprob_over_len[i] * inv_norm;
        acc += g_hat / (std::sqrt(g_hat * g_hat) + adam_config.eps) * delta.delta[i];
    }
    return -acc;
}

DeltaEffectReport aggregate_delta_effects(const std::vector<DeltaEffectRecord>& records,
                                          DeltaMode mode) {
    DeltaEffectReport report;
    report.mode = mode;
    report.records = records;
    std::vector<double> valid;
    for (auto& rec : report.records) {
        if (!rec.valid || std::isnan(rec.value)) {
            rec.valid = false;
            rec.value = 0.0;
            report.n_missing += 1;
            continue;
        }
        valid.push_back(rec.value);
    }
    if (valid.empty())
        throw std::runtime_error("effect_estimator_delta: every sample had a zero gradient");
    report.mean = stats::mean(valid);
    if (valid.size() >= 2) {
        const auto ci = stats::mean_ci95(valid);
        report.ci_low = ci.lo;
        report.ci_high = ci.hi;
    } else {
        report.ci_low = report.ci_high = report.mean;
    }
    return report;
}

DeltaEffectReport effect_estimator_delta(const std::vector<DeltaEffectInput>& samples,
                                         const ParamDelta& delta, DeltaMode mode,
                                         const train::AdamConfig& adam_config) {
    if (samples.empty()) throw std::invalid_argument("effect_estimator_delta: no samples");
    adam_config.validate();

    std::vector<DeltaEffectRecord> records;
    records.reserve(samples.size());
    for (const auto& sample : samples) {
        DeltaEffectRecord rec;
        rec.prompt_index = sample.prompt_index;
        rec.value = delta_effect_of_grad(sample.grad_logprob_over_len, sample.advantage, delta,
                                         mode, adam_config);
        rec.valid = !std::isnan(rec.value);
        records.push_back(rec);
    }
    return aggregate_delta_effects(records, mode);
}

}  // namespace kklab::effects
