#pragma once

#include <vector>

#include "kklab/effects/eval.hpp"

namespace kklab::analysis {

struct InterpolationSweep {
    std::vector<double> lambda_grid;  // sorted ascending in [0, 1]
    std::vector<double> accuracy;     // Psi(lambda*theta0 + (1-lambda)*theta1)
};

// accuracy along the straight parameter path between two checkpoints of the
// same model family; lambda = 1 recovers theta0, lambda = 0 recovers theta1
InterpolationSweep interpolate(const policy::PolicyModel& model,
                               std::span<const double> theta0, std::span<const double> theta1,
                               std::span<const double> lambda_grid,
                               const task::PromptSet& eval_set,
                               const effects::EvalMethod& method);

std::vector<double> uniform_lambda_grid(int points);

// largest accuracy jump between adjacent grid points
double max_adjacent_jump(const InterpolationSweep& sweep);

}  // namespace kklab::analysis
