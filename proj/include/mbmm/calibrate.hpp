#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mbmm/ensemble.hpp"
#include "mbmm/ingest.hpp"
#include "mbmm/model.hpp"
#include "mbmm/rng.hpp"
#include "mbmm/stats.hpp"

namespace mbmm {

/// Inclusive arithmetic grid lo, lo+step, ..., <= hi.
struct GridRange {
    double lo = 0.0;
    double hi = 0.0;
    double step = 1.0;

    std::vector<double> values() const;
};

struct GridSpec {
    GridRange K{-50.0, 0.0, 0.5};
    GridRange c{0.1, 2.0, 0.1};
    std::optional<GridRange> m;  // skew fitting when set, m fixed at 0 otherwise
    std::uint64_t seed = kDefaultSeed;
    std::size_t n_reps = 1000;
    bool refine = false;  // extra step/5 pass around the coarse optimum

    void validate() const;
    /// K grid values; 0 is always included so the GBM point is searched.
    std::vector<double> K_values() const;
    std::vector<double> c_values() const { return c.values(); }
    std::vector<double> m_values() const;
    int n_params() const { return m ? kSkewedMbmmParams : kMbmmParams; }
};

struct FitOptions {
    BinningOptions binning;
    Channel channel = Channel::Mean;
    StepForm form = StepForm::Exponential;
    unsigned workers = 0;
};

struct GridPoint {
    double K = 0.0;
    double c = 0.0;
    double m = 0.0;
    double statistic = 0.0;  // +inf when some expected bin is empty
};

struct FitReport {
    ModelParams best_params;
    ChiSquareReport best_chi2;
    ChiSquareReport gbm_chi2;
    double kurtosis_observed = 0.0;
    double kurtosis_model = 0.0;
    std::vector<GridPoint> grid_trace;
    std::vector<GridPoint> refine_trace;

    CustomHistogram histogram;
    std::vector<double> best_expected;
    std::vector<double> gbm_expected;
    std::size_t n_steps = 0;
    StepForm form = StepForm::Exponential;
};

/// Expected bin frequencies under common random numbers: every evaluation
/// uses the same per-replication streams derived from one seed.
///
/// Steps and replications are i.i.d., so the mean per-replication count of a
/// bin is the pooled count divided by n_reps. The pooled innovations are
/// sorted once; for each parameter set the map z -> log-return is split into
/// monotone pieces at the zeros of its derivative and every bin edge is
/// inverted on each piece. Draws inside the final root bracket are classified
/// by direct evaluation, so the counts agree with binning simulated returns.
class CrnObjective {
public:
    CrnObjective(std::uint64_t seed, std::size_t n_steps, std::size_t n_reps, unsigned workers = 0);

    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t n_reps() const noexcept { return n_reps_; }
    const std::vector<double>& sorted_innovations() const noexcept { return z_; }

    /// Mean per-replication counts in each bin of `bins`.
    std::vector<double> expected(const ModelParams& params, StepForm form, const CustomHistogram& bins) const;

    /// Zeros of d(log-return)/dz inside the sampled innovation range.
    std::vector<double> critical_points(const ModelParams& params, StepForm form) const;

private:
    std::size_t count_below(const ModelParams& params, StepForm form, double edge, bool inclusive,
                            const std::vector<double>& cuts) const;

    std::uint64_t seed_;
    std::size_t n_steps_;
    std::size_t n_reps_;
    unsigned workers_;
    std::vector<double> z_;
};

/// Grid search over (K, c[, m]) minimizing the chi-square statistic.
FitReport fit(const ReturnSeries& returns, const GridSpec& grid, const FitOptions& opts = {});

struct ChannelComparison {
    FitReport mean;
    FitReport sigma;
};

/// Fit with the modifier on the drift and on the volatility.
ChannelComparison diagnostic_channel(const ReturnSeries& returns, const GridSpec& grid, FitOptions opts = {});

}  // namespace mbmm
