#pragma once

#include <string>

namespace kklab::train {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    void validate() const;
};

struct RLConfig {
    int group_size = 8;          // G: responses per prompt
    int prompts_per_rollout = 16;
    int train_batch_size = 128;  // N: one update consumes the whole buffer
    double clip_ratio = 0.2;
    double learning_rate = 0.05;
    int warmup_steps = 4;        // linear learning-rate ramp
    AdamConfig adam{0.5, 0.999, 1e-8};
    double temperature = 1.0;
    int l_max = 24;
    double kl_coefficient = 0.0;
    double grad_clip_norm = 1.0;

    void validate() const;
};

struct SFTConfig {
    int batch_size = 16;
    double learning_rate = 0.05;
    int epochs = 2;
    int max_seq_len = 64;
    AdamConfig adam{0.9, 0.999, 1e-8};

    void validate() const;
};

}  // namespace kklab::train
