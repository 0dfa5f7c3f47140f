#include "kklab/train/config.hpp"

#include <stdexcept>

namespace kklab::train {

void AdamConfig::validate() const {
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw std::invalid_argument("AdamConfig: beta1 in [0,1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw std::invalid_argument("AdamConfig: beta2 in [0,1)");
    if (!(eps > 0.0)) throw std::invalid_argument("AdamConfig: eps must be positive");
}

void RLConfig::validate() const {
    if (group_size < 2) throw std::invalid_argument("RLConfig: group_size must be >= 2");
    if (prompts_per_rollout < 1)
        throw std::invalid_argument("RLConfig: prompts_per_rollout must be >= 1");
    if (train_batch_size != group_size * prompts_per_rollout)
        throw std::invalid_argument(
            "RLConfig: train_batch_size must equal group_size * prompts_per_rollout "
            "(one update per rollout buffer)");
    if (!(clip_ratio > 0.0 && clip_ratio < 1.0))
        throw std::invalid_argument("RLConfig: clip_ratio must be in (0,1)");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("RLConfig: learning_rate <= 0");
    if (warmup_steps < 0) throw std::invalid_argument("RLConfig: warmup_steps < 0");
    if (!(temperature > 0.0)) throw std::invalid_argument("RLConfig: temperature <= 0");
    if (l_max < 1) throw std::invalid_argument("RLConfig: l_max must be >= 1");
    if (kl_coefficient < 0.0) throw std::invalid_argument("RLConfig: kl_coefficient < 0");
    if (!(grad_clip_norm > 0.0)) throw std::invalid_argument("RLConfig: grad_clip_norm <= 0");
    adam.validate();
}

void SFTConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("SFTConfig: batch_size must be >= 1");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("SFTConfig: learning_rate <= 0");
    if (epochs < 1) throw std::invalid_argument("SFTConfig: epochs must be >= 1");
    if (max_seq_len < 1) throw std::invalid_argument("SFTConfig: max_seq_len must be >= 1");
    adam.validate();
}

}  // namespace kklab::train
