#pragma once

// Statistics helpers shared by the test suites and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace hetsim::testing {

/// Ishigami function with a = 7, b = 0.1 on [-pi, pi]^3.
inline double ishigami(const std::vector<double>& x) {
    return std::sin(x[0]) + 7.0 * std::sin(x[1]) * std::sin(x[1]) + 0.1 * std::pow(x[2], 4) * std::sin(x[0]);
}

struct IshigamiIndices {
    double s1, s2, s3, st1, st2, st3;
};

inline IshigamiIndices ishigami_indices() {
    constexpr double a = 7.0, b = 0.1, pi = std::numbers::pi;
    const double v1 = 0.5 * std::pow(1.0 + b * std::pow(pi, 4) / 5.0, 2);
    const double v2 = a * a / 8.0;
    const double v13 = b * b * std::pow(pi, 8) * (1.0 / 18.0 - 1.0 / 50.0);
    const double v = v1 + v2 + v13;
    return {v1 / v, v2 / v, 0.0, (v1 + v13) / v, v2 / v, v13 / v};
}

/// Kolmogorov-Smirnov statistic of a sample against U(0, 1).
inline double ks_uniform_statistic(std::vector<double> xs) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        d = std::max(d, (static_cast<double>(i) + 1.0) / n - xs[i]);
        d = std::max(d, xs[i] - static_cast<double>(i) / n);
    }
    return d;
}

/// Asymptotic p-value of the one-sample KS test (Stephens' small-sample correction).
inline double ks_p_value(double d, std::size_t n) {
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    if (lambda < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 ? 1.0 : -1.0) * term;
        if (term < 1e-12) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

} // namespace hetsim::testing
