#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kklab/train/config.hpp"

namespace kklab::train {

struct AdamState {
    std::vector<double> m;  // first moment
    std::vector<double> v;  // second moment
    std::int64_t t = 0;     // completed steps

    static AdamState init(std::size_t dim) {
        AdamState s;
        s.m.assign(dim, 0.0);
        s.v.assign(dim, 0.0);
        return s;
    }
};

// standard bias-corrected Adam descent step: params -= lr * m_hat / (sqrt(v_hat) + eps)
void adam_update(std::span<double> params, std::span<const double> grad, AdamState& state,
                 const AdamConfig& config, double learning_rate);

}  // namespace kklab::train
