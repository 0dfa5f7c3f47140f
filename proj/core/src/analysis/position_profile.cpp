#include "kklab/analysis/position_profile.hpp"

#include <algorithm>

#include <cmath>
#include <stdexcept>

#include "kklab/util/stats.hpp"

namespace kklab::analysis {

int PositionProfile::argmin_quantile_position() const {
    int best = -1;
    for (std::size_t t = 0; t < quantile_logprob.size(); ++t) {
        if (low_confidence[t]) continue;
        if (best < 0 || quantile_logprob[t] < quantile_logprob[std::size_t(best)])
            best = int(t);
    }
    return best;
}

PositionProfile position_profile(const policy::PolicyModel& model,
                                 std::span<const double> params, const task::Task& task,
                                 const std::vector<TaggedResponse>& responses, double q) {
    if (!(q > 0.0 && q <= 0.5))
        throw std::invalid_argument("position_profile: q must lie in (0, 0.5]");
    if (responses.empty()) throw std::invalid_argument("position_profile: empty response set");

    std::size_t max_len = 0;
    for (const auto& r : responses) max_len = std::max(max_len, r.response.length());

    // column-major collection: logprobs per position across the set
    std::vector<std::vector<double>> columns(max_len);
    for (const auto& r : responses) {
        const auto lps =
            policy::per_token_logprobs(model, params, task.prompt(r.prompt_index), r.response);
        for (std::size_t t = 0; t < lps.size(); ++t) columns[t].push_back(lps[t]);
    }

    PositionProfile profile;
    profile.q = q;
    const double min_count = 1.0 / q;
    for (std::size_t t = 0; t < max_len; ++t) {
        auto& col = columns[t];
        // sorting first makes the aggregation independent of response order
        std::sort(col.begin(), col.end());
        profile.count.push_back(int(col.size()));
        profile.mean_logprob.push_back(stats::mean(col));
        profile.quantile_logprob.push_back(stats::quantile_nearest_rank(col, q));
        profile.low_confidence.push_back(double(col.size()) < min_count);
    }
    return profile;
}

}  // namespace kklab::analysis
