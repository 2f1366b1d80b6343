#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "canseal/node_sim.hpp"
#include "canseal/stats.hpp"

using namespace canseal;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Reference correlation, deliberately on a different numeric route than
// the library: long double accumulators, reverse iteration order.
double reference_pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const auto n = static_cast<long double>(x.size());
    long double sx = 0, sy = 0;
    for (std::size_t i = x.size(); i-- > 0;) {
        sx += x[i];
        sy += y[i];
    }
    const long double mx = sx / n, my = sy / n;
    long double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = x.size(); i-- > 0;) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    return static_cast<double>(sxy / std::sqrt(sxx * syy));
}

std::vector<double> random_series(std::mt19937_64& rng, std::size_t n, double scale) {
    std::vector<double> out(n);
    for (double& v : out)
        v = scale * (static_cast<double>(rng()) / 1.8446744073709552e19 - 0.5);
    return out;
}

// portable standard-normal draws (Box-Muller over raw engine output)
std::vector<double> normal_draws(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> out;
    out.reserve(n + 1);
    while (out.size() < n) {
        const double u1 =
            (static_cast<double>(rng() >> 11) + 0.5) / 9007199254740992.0; // (0,1)
        const double u2 = (static_cast<double>(rng() >> 11) + 0.5) / 9007199254740992.0;
        const double r = std::sqrt(-2.0 * std::log(u1));
        out.push_back(r * std::cos(2.0 * std::numbers::pi * u2));
        out.push_back(r * std::sin(2.0 * std::numbers::pi * u2));
    }
    out.resize(n);
    return out;
}

std::vector<double> sawtooth_series(std::size_t n) {
    std::vector<double> out;
    out.reserve(n);
    SawtoothState st;
    for (std::size_t i = 0; i < n; ++i) {
        st = sawtooth_next(st);
        out.push_back(st.value);
    }
    return out;
}

} // namespace

TEST_CASE("summary stats on stated examples") {
    const std::vector<double> same{0.01, 0.01, 0.01};
    SummaryStats s = summary_stats(same);
    CHECK(s.count == 3);
    CHECK(s.mean == 0.01);
    CHECK(s.std_dev == 0.0);

    const std::vector<double> two{0.009, 0.011};
    s = summary_stats(two);
    CHECK_THAT(s.mean, WithinRel(0.010, 1e-12));
    CHECK_THAT(s.std_dev, WithinRel(std::sqrt(2e-6), 1e-9)); // sqrt(2*(1e-3)^2 / 1)
    CHECK(s.min == 0.009);
    CHECK(s.max == 0.011);

    CHECK_THROWS_AS(summary_stats(std::vector<double>{}), insufficient_data);

    const std::vector<double> one{5.0};
    s = summary_stats(one);
    CHECK(s.count == 1);
    CHECK(s.std_dev == 0.0);
    CHECK(s.p99 == 5.0);
}

TEST_CASE("p99 uses nearest-rank") {
    std::vector<double> xs;
    for (int i = 1; i <= 100; ++i) xs.push_back(i);
    CHECK(summary_stats(xs).p99 == 99.0); // ceil(0.99*100) = 99th smallest
    xs.push_back(101);
    CHECK(summary_stats(xs).p99 == 100.0); // ceil(0.99*101) = 100
}

TEST_CASE("pearson on affine and degenerate inputs") {
    const std::vector<double> a{0, 1, 2}, up{10, 11, 12}, down{2, 1, 0};
    CHECK(*pearson(a, up) == 1.0);
    CHECK(*pearson(a, down) == -1.0);

    const std::vector<double> flat{5, 5, 5};
    CHECK_FALSE(pearson(a, flat).has_value());
    CHECK_FALSE(pearson(flat, a).has_value());

    CHECK_THROWS_AS(pearson(a, std::vector<double>{1, 2}), insufficient_data);
    CHECK_THROWS_AS(pearson(std::vector<double>{1}, std::vector<double>{2}),
                    insufficient_data);
}

TEST_CASE("pearson is symmetric and shift/scale invariant") {
    std::mt19937_64 rng(0x5eed2001);
    for (int trial = 0; trial < 25; ++trial) {
        const auto x = random_series(rng, 200, 10.0);
        const auto y = random_series(rng, 200, 3.0);
        const double r = *pearson(x, y);
        CHECK(*pearson(y, x) == r);

        std::vector<double> scaled(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = 4.0 * x[i] + 7.0;
        CHECK_THAT(*pearson(scaled, y), WithinAbs(r, 1e-12));
        for (std::size_t i = 0; i < x.size(); ++i) scaled[i] = -2.0 * x[i] + 1.0;
        CHECK_THAT(*pearson(scaled, y), WithinAbs(-r, 1e-12));
    }
}

TEST_CASE("pearson and autocorrelation match an independent reference") {
    std::mt19937_64 rng(0x5eed2002);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 100 + rng() % 900;
        const auto x = random_series(rng, n, 100.0);
        const auto y = random_series(rng, n, 0.25);
        const double got = *pearson(x, y);
        const double want = reference_pearson(x, y);
        CHECK_THAT(got, WithinRel(want, 1e-12));

        const std::size_t lag = 1 + rng() % (n / 2);
        const double ac = *autocorrelation(x, lag);
        const double ac_ref = reference_pearson(
            std::vector<double>(x.begin(), x.end() - static_cast<long>(lag)),
            std::vector<double>(x.begin() + static_cast<long>(lag), x.end()));
        CHECK_THAT(ac, WithinRel(ac_ref, 1e-12));
    }
}

TEST_CASE("autocorrelation of the sawtooth") {
    const auto wave = sawtooth_series(1000); // four full periods

    // exact periodicity: the lagged slice is the same sequence
    CHECK(*autocorrelation(wave, 250) == 1.0);

    // half a period out of phase: peaks align with troughs
    CHECK(*autocorrelation(wave, 125) < -0.9);

    CHECK_THROWS_AS(autocorrelation(wave, 0), insufficient_data);
    CHECK_THROWS_AS(autocorrelation(wave, 999), insufficient_data);
    CHECK_THROWS_AS(autocorrelation(wave, 5000), insufficient_data);
}

TEST_CASE("monotonic run lengths") {
    const auto wave = sawtooth_series(1000);
    const RunLengths rl = monotonic_run_lengths(wave);
    CHECK(rl.max_ascending == 126); // 0..125 across the period seam
    CHECK(rl.max_descending == 126);

    const std::vector<double> flat{5, 5, 5};
    const RunLengths fl = monotonic_run_lengths(flat);
    CHECK(fl.max_ascending == 1);
    CHECK(fl.max_descending == 1);
    CHECK(fl.mean_run == 1.0);

    const std::vector<double> up{0, 1, 2};
    CHECK(monotonic_run_lengths(up).max_ascending == 3);
    CHECK(monotonic_run_lengths(up).max_descending == 1);

    CHECK_THROWS_AS(monotonic_run_lengths(std::vector<double>{1}), insufficient_data);
}

TEST_CASE("iid uniform bytes stay below the randomness thresholds") {
    // derivation oracle for the encrypted-side thresholds: 18,000 draws
    std::mt19937_64 rng(0x5eed2003);
    std::vector<double> bytes(18000);
    for (double& b : bytes) b = static_cast<double>(rng() & 0xFF);

    const RunLengths rl = monotonic_run_lengths(bytes);
    CHECK(std::max(rl.max_ascending, rl.max_descending) <= 12);

    std::array<std::size_t, 256> counts{};
    for (double b : bytes) ++counts[static_cast<std::size_t>(b)];
    std::size_t distinct = 0;
    double entropy = 0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        ++distinct;
        const double p = static_cast<double>(c) / 18000.0;
        entropy -= p * std::log2(p);
    }
    CHECK(distinct >= 250);
    CHECK(entropy >= 7.9);

    CHECK_THAT(std::abs(*autocorrelation(bytes, 250)), WithinAbs(0.0, 0.05));
}

TEST_CASE("kde of a standard normal sample") {
    std::mt19937_64 rng(0x5eed2004);
    const auto xs = normal_draws(rng, 10000);
    const DensityEstimate de = density_estimate(xs);
    REQUIRE_FALSE(de.is_spike);
    REQUIRE(de.grid.size() == kDensityGridPoints);

    // density at 0 within 15% of 1/sqrt(2*pi)
    double at0 = 0;
    double best = 1e18;
    for (std::size_t i = 0; i < de.grid.size(); ++i)
        if (std::abs(de.grid[i]) < best) {
            best = std::abs(de.grid[i]);
            at0 = de.density[i];
        }
    CHECK_THAT(at0, WithinRel(0.3989422804014327, 0.15));

    CHECK_THAT(trapezoid_integral(de), WithinAbs(1.0, 1e-3));
    for (double d : de.density) CHECK(d >= 0.0);
}

TEST_CASE("kde integral stays within tolerance on varied inputs") {
    std::mt19937_64 rng(0x5eed2005);

    const auto normal = normal_draws(rng, 2000);
    CHECK_THAT(trapezoid_integral(density_estimate(normal)), WithinAbs(1.0, 1e-3));

    std::vector<double> uniform(1000);
    for (double& v : uniform) v = static_cast<double>(rng() % 1000);
    CHECK_THAT(trapezoid_integral(density_estimate(uniform)), WithinAbs(1.0, 1e-3));

    // the hard case: every sample sits at an edge of the support
    const std::vector<double> two{0.0, 1.0};
    CHECK_THAT(trapezoid_integral(density_estimate(two)), WithinAbs(1.0, 1e-3));

    std::vector<double> skewed;
    for (int i = 0; i < 500; ++i) skewed.push_back(0.01);
    skewed.push_back(5.0);
    skewed.push_back(5.0);
    CHECK_THAT(trapezoid_integral(density_estimate(skewed)), WithinAbs(1.0, 1e-3));
}

TEST_CASE("kde degenerate and error cases") {
    const std::vector<double> same{3.5, 3.5, 3.5};
    const DensityEstimate spike = density_estimate(same);
    CHECK(spike.is_spike);
    CHECK(spike.spike_value == 3.5);
    CHECK(trapezoid_integral(spike) == 1.0);

    CHECK_THROWS_AS(density_estimate(std::vector<double>{1.0}), insufficient_data);
    CHECK_THROWS_AS(density_estimate(std::vector<double>{1.0, 2.0}, -0.5), config_error);
}

TEST_CASE("silverman bandwidth matches the hand-computed value") {
    std::vector<double> xs;
    for (int i = 0; i < 100; ++i) xs.push_back(i);
    const DensityEstimate de = density_estimate(xs);
    // sigma = 29.011491975882016, IQR = 49.5 -> 0.9*min(sigma, IQR/1.34)*100^(-1/5)
    CHECK_THAT(de.bandwidth, WithinRel(10.39471468564849, 1e-12));

    const DensityEstimate fixed = density_estimate(xs, 2.0);
    CHECK(fixed.bandwidth == 2.0);
}
