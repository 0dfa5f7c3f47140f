#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace kklab::vec {

inline double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("vec::dot: size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("vec::axpy: size mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(std::span<double> x, double alpha) {
    for (double& v : x) v *= alpha;
}

inline std::vector<double> scaled(std::span<const double> x, double alpha) {
    std::vector<double> out(x.begin(), x.end());
    scale(out, alpha);
    return out;
}

inline void fill(std::span<double> x, double v) {
    for (double& e : x) e = v;
}

inline bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

// y = lambda * a + (1 - lambda) * b
inline std::vector<double> lerp(std::span<const double> a, std::span<const double> b,
                                double lambda) {
    if (a.size() != b.size()) throw std::invalid_argument("vec::lerp: size mismatch");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = lambda * a[i] + (1.0 - lambda) * b[i];
    return out;
}

}  // namespace kklab::vec
