#include "kklab/train/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace kklab::train {

void adam_update(std::span<double> params, std::span<const double> grad, AdamState& state,
                 const AdamConfig& config, double learning_rate) {
    const std::size_t dim = params.size();
    if (grad.size() != dim || state.m.size() != dim || state.v.size() != dim)
        throw std::invalid_argument("adam_update: dimension mismatch");
    if (state.t < 0) throw std::invalid_argument("adam_update: negative step counter");

    state.t += 1;
    const double b1 = config.beta1;
    const double b2 = config.beta2;
    const double corr1 = 1.0 - std::pow(b1, double(state.t));
    const double corr2 = 1.0 - std::pow(b2, double(state.t));
    for (std::size_t i = 0; i < dim; ++i) {
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * grad[i];
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / corr1;
        const double v_hat = state.v[i] / corr2;
        params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + config.eps);
    }
}

}  // namespace kklab::train
