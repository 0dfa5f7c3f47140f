#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kklab/train/config.hpp"

namespace kklab::effects {

// normalized parameter movement theta_after - theta_before, used as a
// reference direction in place of the exact evaluation gradient
struct ParamDelta {
    std::vector<double> delta;

    static ParamDelta between(std::span<const double> theta_before,
                              std::span<const double> theta_after);
};

enum class DeltaMode { Sgd, Adam };

std::string delta_mode_name(DeltaMode mode);

struct DeltaEffectRecord {
    int prompt_index = -1;
    double value = 0.0;
    bool valid = true;  // false when the sample gradient had zero norm
};

struct DeltaEffectReport {
    std::vector<DeltaEffectRecord> records;
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    int n_missing = 0;
    DeltaMode mode = DeltaMode::Sgd;
};

struct DeltaEffectInput {
    int prompt_index = -1;
    std::vector<double> grad_logprob_over_len;  // grad log pi / |a|
    double advantage = 1.0;                     // 1 for the SFT variant
};

// Delta-theta effect estimators. Each sample is scored as one simulated
// optimizer step: the per-sample cross-entropy loss gradient is
// -grad_logprob/|a| (times the advantage in the RL variant), and the score
// is the inner product of the resulting update direction with delta.
//
// Sgd:  V = -(g/||g||) . delta
// Adam: one step from zero moments with t=1 bias correction,
//       V = -[m_hat / (sqrt(v_hat) + eps)] . delta
DeltaEffectReport effect_estimator_delta(const std::vector<DeltaEffectInput>& samples,
                                         const ParamDelta& delta, DeltaMode mode,
                                         const train::AdamConfig& adam_config = {});

// single-sample score; NaN when the gradient has zero norm. Lets callers
// stream over samples reusing one gradient buffer.
double delta_effect_of_grad(std::span<const double> grad_logprob_over_len, double advantage,
                            const ParamDelta& delta, DeltaMode mode,
                            const train::AdamConfig& adam_config = {});

// aggregate a list of per-sample scores (NaN entries counted missing)
DeltaEffectReport aggregate_delta_effects(const std::vector<DeltaEffectRecord>& records,
                                          DeltaMode mode);

}  // namespace kklab::effects
