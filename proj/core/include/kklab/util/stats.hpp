#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace kklab::stats {

double mean(std::span<const double> x);
// population standard deviation (divide by n)
double stddev_pop(std::span<const double> x);
// sample standard deviation (divide by n-1); 0 for n < 2
double stddev_sample(std::span<const double> x);
double standard_error(std::span<const double> x);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double v) const { return v >= lo && v <= hi; }
};

// normal-approximation confidence interval around the sample mean
Interval mean_ci(std::span<const double> x, double z);
inline Interval mean_ci95(std::span<const double> x) { return mean_ci(x, 1.959963984540054); }
inline Interval mean_ci99(std::span<const double> x) { return mean_ci(x, 2.5758293035489004); }

// nearest-rank quantile: smallest element with cumulative rank >= q.
// q in (0, 1]; input need not be sorted.
double quantile_nearest_rank(std::span<const double> x, double q);

// Spearman rank correlation with average ranks for ties.
double spearman_rho(std::span<const double> x, std::span<const double> y);

// upper tail P(X >= x) for a chi-square distribution with k dof
double chi_square_upper_tail(double x, int dof);

}  // namespace kklab::stats
