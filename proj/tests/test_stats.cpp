#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "mbmm/stats.hpp"

using namespace mbmm;

namespace {

// Upper tail by direct quadrature of the chi-square density.
double sf_by_quadrature(double x, double df) {
    const double k = df / 2.0;
    const double log_norm = -k * std::log(2.0) - std::lgamma(k);
    auto density = [&](double t) {
        const double u = x + t;
        if (u <= 0.0) return 0.0;
        return std::exp(log_norm + (k - 1.0) * std::log(u) - u / 2.0);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    return integrator.integrate(density);
}

CustomHistogram make_hist(std::vector<std::size_t> counts) {
    CustomHistogram h;
    h.counts = std::move(counts);
    for (std::size_t i = 0; i <= h.counts.size(); ++i) h.edges.push_back(static_cast<double>(i));
    h.total = std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0});
    return h;
}

}  // namespace

TEST_CASE("chi-square survival function against quadrature on a 20-point grid") {
    const std::vector<std::pair<double, double>> grid{
        {0.5, 1},   {3.84, 1},   {2.0, 2},     {7.5, 3},    {11.07, 5},  {2.0, 7},   {15.0, 10},
        {30.0, 12}, {14.93, 16}, {77.04, 18},  {19.97, 21}, {32.57, 23}, {5.0, 25},  {88.4, 45},
        {40.0, 47}, {90.68, 70}, {251.37, 72}, {150.0, 120}, {210.0, 200}, {600.0, 200}};
    REQUIRE(grid.size() == 20);
    for (auto [x, df] : grid) {
        const double mine = chi_square_sf(x, df);
        CHECK(std::abs(mine - sf_by_quadrature(x, df)) < 1e-8);
        CHECK(mine == doctest::Approx(boost::math::gamma_q(df / 2.0, x / 2.0)).epsilon(1e-12).scale(0.0));
    }
}

TEST_CASE("chi-square survival function edge cases and monotonicity") {
    for (double df : {1.0, 4.0, 45.0, 200.0}) {
        CHECK(chi_square_sf(0.0, df) == 1.0);
        double prev = 1.0;
        for (double x = 0.25; x <= 1500.0; x *= 1.3) {
            const double v = chi_square_sf(x, df);
            CHECK(v <= prev);
            CHECK(v >= 0.0);
            prev = v;
        }
    }
    // Absolute accuracy across the stated domain.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> xs(0.0, 1500.0);
    for (int i = 0; i < 400; ++i) {
        const double x = xs(rng);
        const double df = 1.0 + static_cast<double>(rng() % 200);
        CHECK(std::abs(chi_square_sf(x, df) - boost::math::gamma_q(df / 2.0, x / 2.0)) < 1e-12);
    }
}

TEST_CASE("p-values quoted for the fitted S&P500 periods") {
    struct Triple {
        double stat;
        std::size_t bins;
        int params;
        double p;
        double rel;
    };
    const std::vector<Triple> quoted{{77.04, 21, kGbmParams, 2.80e-9, 0.005},  {14.93, 21, kMbmmParams, 0.53, 0.01},
                                     {32.57, 26, kGbmParams, 0.09, 0.06},      {19.97, 26, kMbmmParams, 0.52, 0.01},
                                     {251.37, 75, kGbmParams, 1.04e-21, 0.005}, {90.68, 75, kMbmmParams, 0.05, 0.1},
                                     {88.4, 50, kMbmmParams, 0.00012, 0.01}};
    for (const auto& t : quoted) {
        const int df = static_cast<int>(t.bins) - t.params - 1;
        CHECK(chi_square_sf(t.stat, df) == doctest::Approx(t.p).epsilon(t.rel).scale(0.0));
    }
    CHECK(chi_square_sf(614.26, 50 - kGbmParams - 1) < 1e-90);
}

TEST_CASE("chi_square report") {
    const auto h = make_hist({10, 20, 30, 25, 15});
    const std::vector<double> same{10, 20, 30, 25, 15};
    const auto r0 = chi_square(h, same, kGbmParams);
    CHECK(r0.statistic == 0.0);
    CHECK(r0.p_value == 1.0);
    CHECK(r0.df == 2);

    const std::vector<double> e{12, 18, 28, 27, 15};
    const auto r = chi_square(h, e, 1);
    double oracle = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) oracle += (h.counts[i] - e[i]) * (h.counts[i] - e[i]) / e[i];
    CHECK(r.statistic == doctest::Approx(oracle).epsilon(1e-15));
    CHECK(r.statistic > 0.0);
    CHECK(r.df == 3);
    CHECK(r.p_value == doctest::Approx(chi_square_sf(oracle, 3)));

    // Relabeling the bins leaves the statistic unchanged.
    std::vector<std::size_t> perm{4, 2, 0, 3, 1};
    std::vector<std::size_t> pc;
    std::vector<double> pe;
    for (auto i : perm) {
        pc.push_back(h.counts[i]);
        pe.push_back(e[i]);
    }
    CHECK(chi_square(make_hist(pc), pe, 1).statistic == doctest::Approx(r.statistic).epsilon(1e-14));

    CHECK_THROWS(chi_square(h, std::vector<double>{1, 2, 3}, 1));
    CHECK_THROWS(chi_square(h, std::vector<double>{10, 0, 30, 25, 15}, 1));
    CHECK_THROWS(chi_square(h, e, 4));  // df would be 0
}

TEST_CASE("customized histogram examples") {
    std::mt19937_64 rng(17);
    SUBCASE("uniform sample keeps every bin") {
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        std::vector<double> v(1000);
        for (double& x : v) x = u(rng);
        BinningOptions o;
        o.initial_bins = 10;
        const auto h = customize_bins(v, 0.0, 1.0, o);
        CHECK(h.n_bins() == 10);
        CHECK(h.total == 1000);
        for (auto c : h.counts) CHECK(c > 60);
        CHECK(h.lo() == -3.0);
        CHECK(h.hi() == 3.0);
    }
    SUBCASE("normal sample merges the extreme tails") {
        std::normal_distribution<double> n;
        std::vector<double> v(500);
        for (double& x : v) x = n(rng);
        BinningOptions o;
        o.initial_bins = 60;
        const auto m = moments(v);
        const auto h = customize_bins(v, m.mean, m.std, o);
        CHECK(h.n_bins() < 60);
        for (auto c : h.counts) CHECK(c >= 5);
        CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == h.total);
        const auto in = in_range(v, h.lo(), h.hi());
        CHECK(h.total == in.size());
        CHECK(bin_counts(h, v) == h.counts);
    }
}

TEST_CASE("customization invariants on random samples") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 50 + rng() % 3000;
        std::student_t_distribution<double> t(2.5 + (rng() % 10));
        std::vector<double> v(n);
        for (double& x : v) x = 0.01 * t(rng);
        const auto m = moments(v);
        BinningOptions o;
        o.initial_bins = 20 + rng() % 120;
        CustomHistogram h;
        try {
            h = customize_bins(v, m.mean, m.std, o);
        } catch (const DegenerateData&) {
            continue;
        }
        const auto need = static_cast<std::size_t>(std::ceil(0.01 * static_cast<double>(h.total)));
        CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::size_t{0}) == h.total);
        for (auto c : h.counts) CHECK(c >= need);
        CHECK(std::is_sorted(h.edges.begin(), h.edges.end()));
        CHECK(h.edges.size() == h.counts.size() + 1);
        CHECK(bin_counts(h, v) == h.counts);

        // Clamping keeps every observation.
        o.out_of_range = OutOfRange::Clamp;
        const auto hc = customize_bins(v, m.mean, m.std, o);
        CHECK(hc.total == n);
    }
}

TEST_CASE("histogram bin lookup") {
    const auto h = make_hist({1, 1, 1, 1});
    CHECK(*h.bin_of(0.0) == 0);
    CHECK(*h.bin_of(1.0) == 1);
    CHECK(*h.bin_of(4.0) == 3);
    CHECK_FALSE(h.bin_of(4.0000001).has_value());
    CHECK_FALSE(h.bin_of(-1e-12).has_value());
}

TEST_CASE("degenerate inputs") {
    const std::vector<double> flat(100, 0.0);
    CHECK_THROWS_AS(customize_bins(flat, 0.0, 0.0), DegenerateData);
    CHECK_THROWS_AS(moments(flat), DegenerateData);
    CHECK_THROWS_AS(moments(std::vector<double>{1.0, 2.0, 3.0}), DegenerateData);
}

TEST_CASE("moments examples") {
    const auto two = moments(std::vector<double>{-1, -1, 1, 1});
    CHECK(two.mean == 0.0);
    CHECK(two.skewness == doctest::Approx(0.0));
    CHECK(two.kurtosis == doctest::Approx(1.0).epsilon(1e-15));

    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    std::vector<double> v(200000);
    for (double& x : v) x = n(rng);
    const auto m = moments(v);
    CHECK(std::abs(m.kurtosis - 3.0) < 3.0 * std::sqrt(24.0 / v.size()));

    std::vector<double> shifted(v);
    for (double& x : shifted) x += 7.5;
    const auto ms = moments(shifted);
    CHECK(ms.mean == doctest::Approx(m.mean + 7.5).epsilon(1e-12));
    CHECK(ms.std == doctest::Approx(m.std).epsilon(1e-9));
    CHECK(ms.skewness == doctest::Approx(m.skewness).epsilon(1e-6));
    CHECK(ms.kurtosis == doctest::Approx(m.kurtosis).epsilon(1e-9));
}

TEST_CASE("moment accumulator merge equals a single pass") {
    std::mt19937_64 rng(21);
    std::exponential_distribution<double> e(3.0);
    std::vector<double> v(10007);
    for (double& x : v) x = e(rng);
    const auto whole = moments(v);
    MomentAccumulator a, b, c;
    for (std::size_t i = 0; i < v.size(); ++i) (i < 3000 ? a : (i < 7000 ? b : c)).add(v[i]);
    a.merge(b);
    a.merge(c);
    MomentAccumulator empty;
    a.merge(empty);
    const auto r = a.result();
    CHECK(r.n == v.size());
    CHECK(r.mean == doctest::Approx(whole.mean).epsilon(1e-12));
    CHECK(r.std == doctest::Approx(whole.std).epsilon(1e-12));
    CHECK(r.skewness == doctest::Approx(whole.skewness).epsilon(1e-10));
    CHECK(r.kurtosis == doctest::Approx(whole.kurtosis).epsilon(1e-10));

    // Brute-force central moments.
    double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
    double m2 = 0, m3 = 0, m4 = 0;
    for (double x : v) {
        const double d = x - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= v.size();
    m3 /= v.size();
    m4 /= v.size();
    CHECK(whole.skewness == doctest::Approx(m3 / std::pow(m2, 1.5)).epsilon(1e-10));
    CHECK(whole.kurtosis == doctest::Approx(m4 / (m2 * m2)).epsilon(1e-10));
}

TEST_CASE("ks distance and Jarque-Bera") {
    CHECK(ks_distance({1, 2, 3}, {1, 2, 3}) == 0.0);
    CHECK(ks_distance({1, 2}, {3, 4}) == 1.0);
    CHECK(ks_distance({1, 2, 3, 4}, {3, 4, 5, 6}) == doctest::Approx(0.5));

    std::mt19937_64 rng(8);
    std::normal_distribution<double> n;
    std::vector<double> v(5000);
    for (double& x : v) x = n(rng);
    CHECK(jarque_bera(v).p_value > 0.01);
    std::vector<double> heavy(5000);
    std::student_t_distribution<double> t(3.0);
    for (double& x : heavy) x = t(rng);
    CHECK(jarque_bera(heavy).p_value < 1e-6);
}

TEST_CASE("incomplete gamma agrees with boost") {
    for (double a : {0.5, 1.0, 3.5, 22.5, 100.0})
        for (double x : {0.01, 0.7, 5.0, 30.0, 150.0, 700.0})
            CHECK(gamma_q(a, x) == doctest::Approx(boost::math::gamma_q(a, x)).epsilon(1e-11).scale(0.0));
}
