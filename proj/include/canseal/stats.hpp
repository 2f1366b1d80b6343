#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "canseal/errors.hpp"

namespace canseal {

struct SummaryStats {
    std::size_t count = 0;
    double mean = 0;
    double std_dev = 0; // sample, n-1 denominator; 0 for a single sample
    double min = 0;
    double max = 0;
    double p99 = 0; // nearest-rank

    friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

namespace detail {

// Kahan-compensated sum; keeps the mean of n equal values exact.
inline double compensated_sum(std::span<const double> xs) {
    double sum = 0, c = 0;
    for (double x : xs) {
        const double y = x - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    return sum;
}

} // namespace detail

inline SummaryStats summary_stats(std::span<const double> xs) {
    if (xs.empty())
        throw insufficient_data("summary_stats: empty input");

    SummaryStats s;
    s.count = xs.size();
    s.mean = detail::compensated_sum(xs) / static_cast<double>(xs.size());

    double sq = 0;
    for (double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.std_dev = xs.size() > 1 ? std::sqrt(sq / static_cast<double>(xs.size() - 1)) : 0.0;

    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    const auto rank = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(sorted.size())));
    s.p99 = sorted[rank - 1];
    return s;
}

// Sample Pearson r, plain two-pass. Processes both series with identical
// operation order, which keeps r at exactly 1 on shift-related integer
// series. nullopt marks the zero-variance (undefined) case.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw insufficient_data("pearson: series lengths differ");
    if (x.size() < 2)
        throw insufficient_data("pearson: need at least 2 points");

    const auto n = static_cast<double>(x.size());
    double sum_x = 0, sum_y = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sum_x += x[i];
        sum_y += y[i];
    }
    const double mean_x = sum_x / n;
    const double mean_y = sum_y / n;

    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Pearson r between the series and itself shifted by lag.
inline std::optional<double> autocorrelation(std::span<const double> x, std::size_t lag) {
    if (lag < 1)
        throw insufficient_data("autocorrelation: lag must be >= 1");
    if (x.size() < lag + 2)
        throw insufficient_data("autocorrelation: lag too large for series of length " +
                                std::to_string(x.size()));
    return pearson(x.subspan(0, x.size() - lag), x.subspan(lag));
}

struct RunLengths {
    std::size_t max_ascending = 0;  // counted in values, e.g. 0,1,2 -> 3
    std::size_t max_descending = 0;
    double mean_run = 0;
};

inline RunLengths monotonic_run_lengths(std::span<const double> x) {
    if (x.size() < 2)
        throw insufficient_data("monotonic_run_lengths: need at least 2 points");

    RunLengths out;
    std::size_t total = 0, runs = 0;
    for (int dir = 0; dir < 2; ++dir) {
        const bool ascending = dir == 0;
        std::size_t len = 1;
        auto flush = [&](std::size_t l) {
            (ascending ? out.max_ascending : out.max_descending) =
                std::max(ascending ? out.max_ascending : out.max_descending, l);
            total += l;
            ++runs;
        };
        for (std::size_t i = 1; i < x.size(); ++i) {
            const bool continues = ascending ? x[i] > x[i - 1] : x[i] < x[i - 1];
            if (continues) {
                ++len;
            } else {
                flush(len);
                len = 1;
            }
        }
        flush(len);
    }
    out.mean_run = static_cast<double>(total) / static_cast<double>(runs);
    return out;
}

// Gaussian KDE on a fixed grid. Bandwidth defaults to Silverman's rule,
// h = 0.9 * min(sigma, IQR/1.34) * n^(-1/5). A zero-spread input cannot be
// smoothed and comes back as the spike marker instead.
struct DensityEstimate {
    bool is_spike = false;
    double spike_value = 0;
    double bandwidth = 0;
    std::vector<double> grid;
    std::vector<double> density;
};

inline constexpr std::size_t kDensityGridPoints = 512;

namespace detail {

// linear-interpolation quantile of a sorted sample
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double w = pos - static_cast<double>(lo);
    return sorted[lo] * (1 - w) + sorted[lo + 1] * w;
}

} // namespace detail

inline DensityEstimate density_estimate(std::span<const double> xs,
                                        std::optional<double> bandwidth = std::nullopt) {
    if (xs.size() < 2)
        throw insufficient_data("density_estimate: need at least 2 samples");

    std::vector<double> sorted(xs.begin(), xs.end());
    std::sort(sorted.begin(), sorted.end());

    DensityEstimate de;
    if (sorted.front() == sorted.back()) {
        de.is_spike = true;
        de.spike_value = sorted.front();
        return de;
    }

    if (bandwidth) {
        if (*bandwidth <= 0)
            throw config_error("density_estimate: bandwidth must be positive");
        de.bandwidth = *bandwidth;
    } else {
        const SummaryStats s = summary_stats(xs);
        const double iqr =
            detail::quantile_sorted(sorted, 0.75) - detail::quantile_sorted(sorted, 0.25);
        double scale = std::min(s.std_dev, iqr / 1.34);
        if (scale == 0.0) scale = s.std_dev; // repeated-value data can zero the IQR
        de.bandwidth = 0.9 * scale *
                       std::pow(static_cast<double>(xs.size()), -0.2);
    }

    // 4h margins keep the truncated tail mass below the 1e-3 integral
    // tolerance even when most samples sit at the extremes.
    const double h = de.bandwidth;
    const double lo = sorted.front() - 4 * h;
    const double hi = sorted.back() + 4 * h;
    const double step = (hi - lo) / static_cast<double>(kDensityGridPoints - 1);

    de.grid.resize(kDensityGridPoints);
    de.density.resize(kDensityGridPoints);
    const double norm =
        1.0 / (static_cast<double>(xs.size()) * h * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t g = 0; g < kDensityGridPoints; ++g) {
        const double at = lo + static_cast<double>(g) * step;
        double acc = 0;
        for (double x : sorted) {
            const double u = (at - x) / h;
            acc += std::exp(-0.5 * u * u);
        }
        de.grid[g] = at;
        de.density[g] = acc * norm;
    }
    return de;
}

inline double trapezoid_integral(const DensityEstimate& de) {
    if (de.is_spike || de.grid.size() < 2) return de.is_spike ? 1.0 : 0.0;
    double acc = 0;
    for (std::size_t i = 1; i < de.grid.size(); ++i)
        acc += 0.5 * (de.density[i] + de.density[i - 1]) * (de.grid[i] - de.grid[i - 1]);
    return acc;
}

} // namespace canseal
