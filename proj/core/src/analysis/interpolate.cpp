#include "kklab/analysis/interpolate.hpp"

#include <cmath>
#include <stdexcept>

#include "kklab/util/vecmath.hpp"

namespace kklab::analysis {

InterpolationSweep interpolate(const policy::PolicyModel& model,
                               std::span<const double> theta0, std::span<const double> theta1,
                               std::span<const double> lambda_grid,
                               const task::PromptSet& eval_set,
                               const effects::EvalMethod& method) {
    if (theta0.size() != model.param_dim() || theta1.size() != model.param_dim())
        throw std::invalid_argument("interpolate: checkpoint dimensions do not match the model");
    if (lambda_grid.empty()) throw std::invalid_argument("interpolate: empty lambda grid");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (lambda_grid[i] < 0.0 || lambda_grid[i] > 1.0)
            throw std::invalid_argument("interpolate: lambda outside [0, 1]");
        if (i > 0 && lambda_grid[i] <= lambda_grid[i - 1])
            throw std::invalid_argument("interpolate: lambda grid must be strictly increasing");
    }

    InterpolationSweep sweep;
    sweep.lambda_grid.assign(lambda_grid.begin(), lambda_grid.end());
    for (double lambda : lambda_grid) {
        const auto theta = vec::lerp(theta0, theta1, lambda);
        sweep.accuracy.push_back(
            effects::eval_accuracy(model, theta, eval_set, method).value);
    }
    return sweep;
}

std::vector<double> uniform_lambda_grid(int points) {
    if (points < 2) throw std::invalid_argument("uniform_lambda_grid: need at least 2 points");
    std::vector<double> grid(std::size_t(points), 0.0);
    for (int i = 0; i < points; ++i) grid[std::size_t(i)] = double(i) / double(points - 1);
    return grid;
}

double max_adjacent_jump(const InterpolationSweep& sweep) {
    double jump = 0.0;
    for (std::size_t i = 1; i < sweep.accuracy.size(); ++i)
        jump = std::max(jump, std::fabs(sweep.accuracy[i] - sweep.accuracy[i - 1]));
    return jump;
}

}  // namespace kklab::analysis
