#include "mbmm/ensemble.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "mbmm/parallel.hpp"

namespace mbmm {

void EnsembleSpec::validate() const {
    params.validate();
    if (n_steps < 1) throw std::invalid_argument("ensemble: n_steps must be >= 1");
    if (n_reps < 1) throw std::invalid_argument("ensemble: n_reps must be >= 1");
    if (!(p0 > 0.0)) throw std::invalid_argument("ensemble: p0 must be > 0");
}

PathRejected::PathRejected(std::size_t rep, std::size_t step)
    : std::runtime_error("replication " + std::to_string(rep) + ": non-positive price at step " + std::to_string(step)),
      rep_(rep),
      step_(step) {}

std::vector<double> draw_innovations(const EnsembleSpec& spec, std::size_t rep_index) {
    std::vector<double> z(spec.n_steps);
    NormalStream stream(spec.seed, rep_index);
    stream.fill(z);
    return z;
}

std::vector<double> simulate_returns(const EnsembleSpec& spec, std::size_t rep_index, std::vector<double>& innovations) {
    if (rep_index >= spec.n_reps) throw std::out_of_range("simulate_returns: rep_index >= n_reps");
    innovations = draw_innovations(spec, rep_index);
    std::vector<double> out(spec.n_steps);
    for (std::size_t t = 0; t < spec.n_steps; ++t) {
        const auto r = log_return(spec.params, innovations[t], spec.form);
        if (!r) throw PathRejected(rep_index, t);
        out[t] = *r;
    }
    return out;
}

std::vector<double> simulate_returns(const EnsembleSpec& spec, std::size_t rep_index) {
    std::vector<double> z;
    return simulate_returns(spec, rep_index, z);
}

std::vector<double> simulate_prices(const EnsembleSpec& spec, std::size_t rep_index) {
    if (rep_index >= spec.n_reps) throw std::out_of_range("simulate_prices: rep_index >= n_reps");
    const auto z = draw_innovations(spec, rep_index);
    std::vector<double> prices(spec.n_steps + 1);
    prices[0] = spec.p0;
    for (std::size_t t = 0; t < spec.n_steps; ++t) {
        const auto next = step(prices[t], spec.params, z[t], spec.form);
        if (!next) throw PathRejected(rep_index, t);
        prices[t + 1] = *next;
    }
    return prices;
}

namespace {

void check_rejections(std::size_t rejected, std::size_t n_reps) {
    if (static_cast<double>(rejected) > 0.01 * static_cast<double>(n_reps))
        throw DegenerateData("ensemble: " + std::to_string(rejected) + " of " + std::to_string(n_reps) +
                             " replications rejected (non-positive arithmetic price), more than 1%");
}

}  // namespace

ExpectedFrequencies expected_frequencies(const EnsembleSpec& spec, const CustomHistogram& bins) {
    spec.validate();
    const std::size_t nb = bins.n_bins();
    std::vector<std::size_t> per_rep(spec.n_reps * nb, 0);
    std::vector<char> rejected(spec.n_reps, 0);

    parallel_for(spec.n_reps, spec.workers, [&](std::size_t rep) {
        try {
            const auto r = simulate_returns(spec, rep);
            std::size_t* row = per_rep.data() + rep * nb;
            for (double x : r)
                if (auto b = bins.bin_of(x)) ++row[*b];
        } catch (const PathRejected&) {
            rejected[rep] = 1;
        }
    });

    ExpectedFrequencies out;
    for (char r : rejected) out.n_rejected += static_cast<std::size_t>(r);
    check_rejections(out.n_rejected, spec.n_reps);
    out.n_reps_used = spec.n_reps - out.n_rejected;
    if (out.n_reps_used == 0) throw DegenerateData("ensemble: every replication rejected");

    const double n = static_cast<double>(out.n_reps_used);
    out.mean_counts.assign(nb, 0.0);
    out.standard_error.assign(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        double sum = 0.0;
        for (std::size_t rep = 0; rep < spec.n_reps; ++rep)
            if (!rejected[rep]) sum += static_cast<double>(per_rep[rep * nb + b]);
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t rep = 0; rep < spec.n_reps; ++rep) {
            if (rejected[rep]) continue;
            const double d = static_cast<double>(per_rep[rep * nb + b]) - mean;
            ss += d * d;
        }
        out.mean_counts[b] = mean;
        out.standard_error[b] = out.n_reps_used > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
    }
    return out;
}

namespace {

Moments pooled_moments(const EnsembleSpec& spec, double lo, double hi) {
    spec.validate();
    std::vector<MomentAccumulator> acc(spec.n_reps);
    std::vector<char> rejected(spec.n_reps, 0);
    parallel_for(spec.n_reps, spec.workers, [&](std::size_t rep) {
        try {
            for (double x : simulate_returns(spec, rep))
                if (x >= lo && x <= hi) acc[rep].add(x);
        } catch (const PathRejected&) {
            rejected[rep] = 1;
        }
    });
    std::size_t n_rejected = 0;
    for (char r : rejected) n_rejected += static_cast<std::size_t>(r);
    check_rejections(n_rejected, spec.n_reps);
    MomentAccumulator total;
    for (std::size_t rep = 0; rep < spec.n_reps; ++rep)
        if (!rejected[rep]) total.merge(acc[rep]);
    return total.result();
}

}  // namespace

Moments simulated_moments(const EnsembleSpec& spec, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("simulated_moments: empty range");
    return pooled_moments(spec, lo, hi);
}

Moments simulated_moments(const EnsembleSpec& spec) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return pooled_moments(spec, -inf, inf);
}

}  // namespace mbmm
