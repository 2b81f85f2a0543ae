#pragma once

/// Variance-based and one-factor-at-a-time sensitivity analysis.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/random/sobol.hpp>

#include "rng.hpp"

namespace hetsim {

using Point = std::vector<double>;

/// Upper limit of the bundled direction-number table.
inline constexpr std::size_t kMaxSobolDimension = 3667;

/// First `count` points of the Sobol sequence in [0,1)^dimension, starting
/// after the all-zero point.
inline std::vector<Point> sobol_sequence(std::size_t dimension, std::size_t count) {
    if (dimension < 1 || dimension > kMaxSobolDimension)
        throw std::invalid_argument("sobol dimension must be in [1, " + std::to_string(kMaxSobolDimension) + "]");
    boost::random::sobol_engine<std::uint32_t, 32> engine(static_cast<std::size_t>(dimension));
    constexpr double scale = 1.0 / 4294967296.0;
    std::vector<Point> points(count, Point(dimension));
    for (auto& p : points)
        for (auto& x : p) x = static_cast<double>(engine()) * scale;
    return points;
}

/// Axis-aligned box the unit cube is mapped onto.
struct FactorBox {
    std::vector<std::string> names;
    Point lower;
    Point upper;

    std::size_t size() const { return lower.size(); }

    void validate() const {
        if (lower.size() != upper.size() || lower.empty())
            throw std::invalid_argument("factor box needs matching, non-empty bounds");
        if (!names.empty() && names.size() != lower.size())
            throw std::invalid_argument("factor box names do not match its dimension");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]) || lower[i] > upper[i])
                throw std::invalid_argument("factor box bounds must be finite and ordered");
    }

    Point map(const Point& unit) const {
        Point x(unit.size());
        for (std::size_t i = 0; i < unit.size(); ++i) x[i] = lower[i] + unit[i] * (upper[i] - lower[i]);
        return x;
    }

    static FactorBox unit(std::size_t k) { return {{}, Point(k, 0.0), Point(k, 1.0)}; }
};

/// Saltelli sampling scheme. Rows are evaluated in blocks per base index j:
/// A_j, B_j, A_B^(1)_j .. A_B^(k)_j and, with second order, B_A^(1)_j .. B_A^(k)_j.
struct SobolDesign {
    std::size_t k = 0;
    std::size_t n = 0;
    bool second_order = false;
    FactorBox box;
    std::vector<Point> a;
    std::vector<Point> b;

    std::size_t block() const { return second_order ? 2 * k + 2 : k + 2; }
    std::size_t evaluations() const { return n * block(); }

    /// Unit-cube point of evaluation row `r`.
    Point unit_row(std::size_t r) const {
        const std::size_t j = r / block();
        const std::size_t c = r % block();
        if (c == 0) return a[j];
        if (c == 1) return b[j];
        if (c < k + 2) {
            Point p = a[j];
            p[c - 2] = b[j][c - 2];
            return p;
        }
        Point p = b[j];
        p[c - k - 2] = a[j][c - k - 2];
        return p;
    }

    Point row(std::size_t r) const { return box.map(unit_row(r)); }

    std::vector<Point> rows() const {
        std::vector<Point> out;
        out.reserve(evaluations());
        for (std::size_t r = 0; r < evaluations(); ++r) out.push_back(row(r));
        return out;
    }
};

inline SobolDesign saltelli_design(std::size_t n, const FactorBox& box, bool second_order = false) {
    box.validate();
    if (n < 2) throw std::invalid_argument("saltelli design needs N >= 2");
    SobolDesign d;
    d.k = box.size();
    d.n = n;
    d.second_order = second_order;
    d.box = box;
    const auto seq = sobol_sequence(2 * d.k, n);
    d.a.reserve(n);
    d.b.reserve(n);
    for (const auto& p : seq) {
        d.a.emplace_back(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(d.k));
        d.b.emplace_back(p.begin() + static_cast<std::ptrdiff_t>(d.k), p.end());
    }
    return d;
}

struct Interval {
    double low = 0.0;
    double high = 0.0;

    bool contains(double x) const { return low <= x && x <= high; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

struct IndexEstimate {
    double value = 0.0;
    Interval ci;
    friend bool operator==(const IndexEstimate&, const IndexEstimate&) = default;
};

struct SensitivityResult {
    std::vector<std::string> names;
    std::vector<IndexEstimate> first;
    std::vector<IndexEstimate> total;
    /// Upper triangle, second[i][j] for i < j. Empty unless requested.
    std::vector<std::vector<IndexEstimate>> second;
    std::size_t evaluations = 0;
    double variance = 0.0;
    /// Set when the output variance vanishes and the indices are undefined.
    bool degenerate = false;
    friend bool operator==(const SensitivityResult&, const SensitivityResult&) = default;
};

struct BootstrapOptions {
    std::size_t resamples = 1000;
    double confidence = 0.95;
    std::uint64_t seed = 0x5eed;
};

namespace detail {

struct SobolColumns {
    std::vector<double> fa, fb;
    std::vector<std::vector<double>> fab, fba;
};

struct RawIndices {
    std::vector<double> first, total;
    std::vector<std::vector<double>> second;
    double variance = 0.0;
};

inline RawIndices estimate(const SobolColumns& c, const std::vector<std::size_t>& rows, bool second_order) {
    const std::size_t k = c.fab.size();
    const double n = static_cast<double>(rows.size());
    RawIndices out;
    out.first.assign(k, 0.0);
    out.total.assign(k, 0.0);

    double mean = 0.0;
    for (auto j : rows) mean += c.fa[j] + c.fb[j];
    mean /= 2.0 * n;
    double var = 0.0;
    for (auto j : rows) var += (c.fa[j] - mean) * (c.fa[j] - mean) + (c.fb[j] - mean) * (c.fb[j] - mean);
    var /= 2.0 * n - 1.0;
    // Spread at rounding level of the mean counts as constant output.
    if (var <= 1e-20 * mean * mean) var = 0.0;
    out.variance = var;
    if (!(var > 0.0)) return out;

    for (std::size_t i = 0; i < k; ++i) {
        double s = 0.0, st = 0.0;
        for (auto j : rows) {
            const double fa = c.fa[j] - mean, fb = c.fb[j] - mean, fab = c.fab[i][j] - mean;
            s += fb * (fab - fa);
            st += (fa - fab) * (fa - fab);
        }
        out.first[i] = s / n / var;
        out.total[i] = st / (2.0 * n) / var;
    }
    if (second_order) {
        out.second.assign(k, std::vector<double>(k, 0.0));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t m = i + 1; m < k; ++m) {
                double v = 0.0;
                for (auto j : rows)
                    v += (c.fba[i][j] - mean) * (c.fab[m][j] - mean) - (c.fa[j] - mean) * (c.fb[j] - mean);
                out.second[i][m] = v / n / var - out.first[i] - out.first[m];
            }
    }
    return out;
}

inline double quantile(std::vector<double>& xs, double q) {
    std::sort(xs.begin(), xs.end());
    const double pos = q * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

inline IndexEstimate with_interval(double value, std::vector<double>& draws, double confidence) {
    const double tail = 0.5 * (1.0 - confidence);
    Interval ci{quantile(draws, tail), quantile(draws, 1.0 - tail)};
    // A percentile interval can miss a skewed point estimate; widen to cover it.
    ci.low = std::min(ci.low, value);
    ci.high = std::max(ci.high, value);
    return {value, ci};
}

} // namespace detail

/// First, total and (if the design carries it) second order indices with
/// percentile bootstrap intervals over base rows.
inline SensitivityResult sobol_indices(const SobolDesign& design, const std::vector<double>& outputs,
                                       const BootstrapOptions& boot = {}) {
    if (outputs.size() != design.evaluations())
        throw std::invalid_argument("sobol_indices: expected " + std::to_string(design.evaluations()) +
                                    " outputs, got " + std::to_string(outputs.size()));
    for (double y : outputs)
        if (!std::isfinite(y)) throw std::invalid_argument("sobol_indices: non-finite output");

    const std::size_t k = design.k, n = design.n, blk = design.block();
    detail::SobolColumns c;
    c.fa.resize(n);
    c.fb.resize(n);
    c.fab.assign(k, std::vector<double>(n));
    if (design.second_order) c.fba.assign(k, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) {
        const double* row = &outputs[j * blk];
        c.fa[j] = row[0];
        c.fb[j] = row[1];
        for (std::size_t i = 0; i < k; ++i) c.fab[i][j] = row[2 + i];
        if (design.second_order)
            for (std::size_t i = 0; i < k; ++i) c.fba[i][j] = row[2 + k + i];
    }

    SensitivityResult res;
    res.names = design.box.names;
    res.evaluations = outputs.size();
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    const auto point = detail::estimate(c, all, design.second_order);
    res.variance = point.variance;
    if (!(point.variance > 0.0)) {
        res.degenerate = true;
        res.first.assign(k, {});
        res.total.assign(k, {});
        if (design.second_order) res.second.assign(k, std::vector<IndexEstimate>(k));
        return res;
    }

    std::vector<std::vector<double>> first_draws(k), total_draws(k);
    std::vector<std::vector<std::vector<double>>> second_draws;
    if (design.second_order) second_draws.assign(k, std::vector<std::vector<double>>(k));
    Rng rng(boot.seed);
    std::vector<std::size_t> rows(n);
    for (std::size_t r = 0; r < boot.resamples; ++r) {
        for (auto& j : rows) j = rng.index(n);
        const auto est = detail::estimate(c, rows, design.second_order);
        if (!(est.variance > 0.0)) continue;
        for (std::size_t i = 0; i < k; ++i) {
            first_draws[i].push_back(est.first[i]);
            total_draws[i].push_back(est.total[i]);
            if (design.second_order)
                for (std::size_t m = i + 1; m < k; ++m) second_draws[i][m].push_back(est.second[i][m]);
        }
    }

    auto interval = [&](double value, std::vector<double>& draws) {
        if (draws.empty()) return IndexEstimate{value, {value, value}};
        return detail::with_interval(value, draws, boot.confidence);
    };
    for (std::size_t i = 0; i < k; ++i) {
        res.first.push_back(interval(point.first[i], first_draws[i]));
        res.total.push_back(interval(point.total[i], total_draws[i]));
    }
    if (design.second_order) {
        res.second.assign(k, std::vector<IndexEstimate>(k));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t m = i + 1; m < k; ++m) res.second[i][m] = interval(point.second[i][m], second_draws[i][m]);
    }
    return res;
}

// --- correlation and OFAT -------------------------------------------------

/// Pearson correlation; nothing when either sample is constant.
inline std::optional<double> pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: samples differ in length");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Mid-ranks, ties share their average rank.
inline std::vector<double> ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t m = i; m <= j; ++m) r[order[m]] = avg;
        i = j + 1;
    }
    return r;
}

inline std::optional<double> spearman(const std::vector<double>& x, const std::vector<double>& y) {
    return pearson(ranks(x), ranks(y));
}

/// Two-tailed p-value of t = r sqrt((n-2)/(1-r^2)) on n-2 degrees of freedom.
inline double correlation_p_value(double r, std::size_t n) {
    if (n < 3) throw std::invalid_argument("correlation test needs at least 3 pairs");
    if (std::abs(r) >= 1.0) return 0.0;
    const double dof = static_cast<double>(n - 2);
    const double t = r * std::sqrt(dof / (1.0 - r * r));
    const boost::math::students_t dist(dof);
    return std::clamp(2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))), 0.0, 1.0);
}

inline constexpr double kSignificance = 0.05;

struct OfatResult {
    std::string factor;
    std::string metric;
    std::vector<double> values;
    std::vector<double> outputs;
    double r = 0.0;
    double p = 1.0;
    /// Constant input or output: r is undefined and reported as 0 with p = 1.
    bool degenerate = false;

    bool significant(double alpha = kSignificance) const { return !degenerate && p < alpha; }
    friend bool operator==(const OfatResult&, const OfatResult&) = default;
};

inline OfatResult correlate(std::string factor, std::vector<double> values, std::vector<double> outputs) {
    if (values.size() < 3) throw std::invalid_argument("OFAT sweep needs at least 3 values");
    OfatResult res;
    res.factor = std::move(factor);
    res.values = std::move(values);
    res.outputs = std::move(outputs);
    if (auto r = pearson(res.values, res.outputs)) {
        res.r = *r;
        res.p = correlation_p_value(*r, res.values.size());
    } else {
        res.degenerate = true;
    }
    return res;
}

inline OfatResult ofat_sweep(std::string factor, const std::vector<double>& values,
                             const std::function<double(double)>& evaluate) {
    std::vector<double> outputs;
    outputs.reserve(values.size());
    for (double v : values) outputs.push_back(evaluate(v));
    return correlate(std::move(factor), values, std::move(outputs));
}

} // namespace hetsim
