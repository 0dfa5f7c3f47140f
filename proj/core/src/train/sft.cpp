#include "kklab/train/sft.hpp"

#include <stdexcept>

#include "kklab/util/rng.hpp"

namespace kklab::train {

double sft_step(const task::Task& task, const policy::PolicyModel& model,
                std::vector<double>& params, AdamState& adam,
                std::span<const SftExample> batch, const SFTConfig& config) {
    config.validate();
    if (batch.empty()) throw std::invalid_argument("sft_step: empty batch");

    double loss = 0.0;
    std::vector<double> grad(params.size(), 0.0);
    const double inv_batch = 1.0 / double(batch.size());
    for (const auto& ex : batch) {
        if (ex.target.tokens.empty()) throw std::invalid_argument("sft_step: empty target");
        if (int(ex.target.length()) > config.max_seq_len)
            throw std::invalid_argument("sft_step: target longer than max_seq_len");
        const auto& prompt = task.prompt(ex.prompt_index);
        const double inv_len = 1.0 / double(ex.target.length());
        loss -= inv_batch * inv_len * policy::logprob(model, params, prompt, ex.target);
        // gradient of the negative mean per-token logprob
        policy::accumulate_grad_logprob(model, params, prompt, ex.target,
                                        -inv_batch * inv_len, grad);
    }
    adam_update(params, grad, adam, config.adam, config.learning_rate);
    return loss;
}

std::vector<double> run_sft(const task::Task& task, const policy::PolicyModel& model,
                            std::vector<double> initial_params, const SftDataset& dataset,
                            const SFTConfig& config, std::uint64_t seed,
                            const EpochObserver& observer) {
    config.validate();
    if (dataset.empty()) throw std::invalid_argument("run_sft: empty dataset");

    std::vector<double> params = std::move(initial_params);
    AdamState adam = AdamState::init(params.size());
    std::vector<std::size_t> order(dataset.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Rng rng(derive_seed(seed, std::uint64_t(epoch), 0x73667465ULL));
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t n_batches = 0;
        std::vector<SftExample> batch;
        for (std::size_t start = 0; start < order.size();
             start += std::size_t(config.batch_size)) {
            batch.clear();
            const std::size_t stop =
                std::min(order.size(), start + std::size_t(config.batch_size));
            for (std::size_t i = start; i < stop; ++i) batch.push_back(dataset[order[i]]);
            epoch_loss += sft_step(task, model, params, adam, batch, config);
            ++n_batches;
        }
        if (observer) observer(epoch, epoch_loss / double(n_batches));
    }
    return params;
}

}  // namespace kklab::train
