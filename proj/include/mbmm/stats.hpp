#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "mbmm/ingest.hpp"

namespace mbmm {

/// Input cannot support the requested statistic (zero variance, too few
/// bins, ...).
class DegenerateData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class OutOfRange { Discard, Clamp };

struct BinningOptions {
    std::size_t initial_bins = 100;
    double min_fraction = 0.01;       // each final bin holds >= ceil(min_fraction * total)
    double half_width_sigmas = 3.0;   // range is centre +- half_width_sigmas * scale
    OutOfRange out_of_range = OutOfRange::Discard;
};

/// Histogram over [lo, hi] after merging sparse bins. Bins are half-open
/// [e_i, e_{i+1}) except the last, which also includes hi.
struct CustomHistogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::size_t total = 0;

    std::size_t n_bins() const noexcept { return counts.size(); }
    double lo() const { return edges.front(); }
    double hi() const { return edges.back(); }
    bool contains(double x) const { return x >= lo() && x <= hi(); }
    std::optional<std::size_t> bin_of(double x) const;
};

struct ChiSquareReport {
    double statistic = 0.0;
    int df = 0;
    double p_value = 1.0;
    std::size_t n_bins = 0;
    int n_params = 0;
};

struct Moments {
    double mean = 0.0;
    double std = 0.0;       // sample std (n-1)
    double skewness = 0.0;  // standardized third central moment (population)
    double kurtosis = 0.0;  // Pearson kurtosis, 3 for a normal
    std::size_t n = 0;
};

/// Number of model parameters in the chi-square df convention.
inline constexpr int kGbmParams = 2;
inline constexpr int kMbmmParams = 4;
inline constexpr int kSkewedMbmmParams = 5;

/// Equal-width binning of [centre - w, centre + w] then merging from both
/// tails inward until each bin holds at least ceil(min_fraction * total).
CustomHistogram customize_bins(std::span<const double> values, double centre, double scale,
                               const BinningOptions& opts = {});

/// Range is mu_hat*dt +- 3 sigma_hat*sqrt(dt), dt = base_dt.
CustomHistogram customize_bins(const ReturnSeries& returns, const BinningOptions& opts = {});

/// Count `values` into the fixed edges of `bins`; out-of-range values dropped.
std::vector<std::size_t> bin_counts(const CustomHistogram& bins, std::span<const double> values);

/// Values lying inside [lo, hi].
std::vector<double> in_range(std::span<const double> values, double lo, double hi);

ChiSquareReport chi_square(const CustomHistogram& observed, std::span<const double> expected, int n_params);

/// Upper-tail probability of the chi-square distribution, Q(df/2, x/2).
double chi_square_sf(double x, double df);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

Moments moments(std::span<const double> values);

/// Streaming moment accumulator; merge() is order-sensitive only through
/// floating-point rounding, so reduce in a fixed order for reproducibility.
class MomentAccumulator {
public:
    void add(double x);
    void merge(const MomentAccumulator& other);
    std::size_t count() const noexcept { return n_; }
    Moments result() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0, m2_ = 0.0, m3_ = 0.0, m4_ = 0.0;
};

/// Two-sample Kolmogorov-Smirnov distance sup |F_a - F_b|.
double ks_distance(std::vector<double> a, std::vector<double> b);

struct JarqueBera {
    double statistic = 0.0;
    double p_value = 1.0;
};
JarqueBera jarque_bera(std::span<const double> values);

}  // namespace mbmm
