#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mbmm/model.hpp"
#include "mbmm/rng.hpp"

namespace mbmm {

struct ExceedanceOptions {
    std::size_t min_count = 10;   // levels with fewer joint exceedances are omitted
    std::size_t min_length = 50;  // minimum series length
};

struct ExceedancePoint {
    double q = 0.0;
    double rho = 0.0;
    std::size_t count = 0;
    bool upper_tail = false;
    // Only at q == 0.5: the upper-tail branch, reported alongside the lower one.
    std::optional<double> rho_upper;
    std::size_t count_upper = 0;
};

struct ExceedanceCurve {
    std::vector<ExceedancePoint> points;
    std::vector<double> omitted_levels;  // too few joint exceedances or zero variance
};

/// Type-7 (linear interpolation) empirical quantile of `sorted` at q.
double empirical_quantile(std::span<const double> sorted, double q);

/// Pearson correlation; nullopt when either variance is zero or n < 2.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// Correlation of (x, y) conditioned on both lying at or below their q
/// quantiles (q <= 0.5) or strictly above them (q >= 0.5).
ExceedanceCurve exceedance_correlation(std::span<const double> x, std::span<const double> y,
                                       std::span<const double> levels, const ExceedanceOptions& opts = {});

struct ForecastSpec {
    ModelParams params_x;
    ModelParams params_y;
    double rho_z = 0.0;  // correlation of the driving normals
    std::size_t horizon = 0;
    std::size_t n_reps = 1000;
    std::uint64_t seed = kDefaultSeed;
    StepForm form = StepForm::Exponential;
};

/// Simulated return pairs (pooled over replications) for the forecast.
void simulate_pair(const ForecastSpec& spec, std::vector<double>& x, std::vector<double>& y);

/// Exceedance curve of jointly simulated model returns.
ExceedanceCurve forecast_exceedance(const ForecastSpec& spec, std::span<const double> levels,
                                    const ExceedanceOptions& opts = {});

}  // namespace mbmm
