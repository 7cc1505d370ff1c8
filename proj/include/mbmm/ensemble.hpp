#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mbmm/model.hpp"
#include "mbmm/rng.hpp"
#include "mbmm/stats.hpp"

namespace mbmm {

struct EnsembleSpec {
    ModelParams params;
    StepForm form = StepForm::Exponential;
    std::size_t n_steps = 0;
    std::size_t n_reps = 1000;
    std::uint64_t seed = kDefaultSeed;
    double p0 = 100.0;
    unsigned workers = 0;  // 0 = hardware concurrency; results do not depend on it

    void validate() const;
};

/// An arithmetic-form path produced a non-positive price.
class PathRejected : public std::runtime_error {
public:
    PathRejected(std::size_t rep, std::size_t step);
    std::size_t rep() const noexcept { return rep_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t rep_, step_;
};

struct ExpectedFrequencies {
    std::vector<double> mean_counts;     // per bin, averaged over accepted replications
    std::vector<double> standard_error;  // per bin, sd of per-rep counts / sqrt(n_reps_used)
    std::size_t n_reps_used = 0;
    std::size_t n_rejected = 0;
};

/// Standard-normal innovations of replication `rep_index`.
std::vector<double> draw_innovations(const EnsembleSpec& spec, std::size_t rep_index);

/// One path's log-returns; throws PathRejected on a non-positive
/// arithmetic-form price.
std::vector<double> simulate_returns(const EnsembleSpec& spec, std::size_t rep_index);

/// Same path as simulate_returns, also returning the innovations used.
std::vector<double> simulate_returns(const EnsembleSpec& spec, std::size_t rep_index, std::vector<double>& innovations);

/// Price path P_0..P_n built with model-core step().
std::vector<double> simulate_prices(const EnsembleSpec& spec, std::size_t rep_index);

/// Per-bin mean count of simulated returns on the fixed edges of `bins`.
/// Aborts (DegenerateData) when more than 1% of replications are rejected.
ExpectedFrequencies expected_frequencies(const EnsembleSpec& spec, const CustomHistogram& bins);

/// Moments of pooled simulated returns inside [lo, hi] across replications.
Moments simulated_moments(const EnsembleSpec& spec, double lo, double hi);

/// Moments of all pooled simulated returns (no range filter).
Moments simulated_moments(const EnsembleSpec& spec);

}  // namespace mbmm
