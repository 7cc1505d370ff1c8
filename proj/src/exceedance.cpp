#include "mbmm/exceedance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mbmm/ensemble.hpp"

namespace mbmm {

double empirical_quantile(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw std::invalid_argument("empirical_quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("empirical_quantile: q outside [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = x.size();
    if (n < 2) return std::nullopt;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0)) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

struct Branch {
    std::optional<double> rho;
    std::size_t count = 0;
};

Branch conditioned(std::span<const double> x, std::span<const double> y, double qx, double qy, bool upper) {
    std::vector<double> cx, cy;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const bool in = upper ? (x[i] > qx && y[i] > qy) : (x[i] <= qx && y[i] <= qy);
        if (in) {
            cx.push_back(x[i]);
            cy.push_back(y[i]);
        }
    }
    return Branch{pearson(cx, cy), cx.size()};
}

}  // namespace

ExceedanceCurve exceedance_correlation(std::span<const double> x, std::span<const double> y,
                                       std::span<const double> levels, const ExceedanceOptions& opts) {
    if (x.size() != y.size()) throw std::invalid_argument("exceedance_correlation: series lengths differ");
    if (x.size() < opts.min_length)
        throw std::invalid_argument("exceedance_correlation: need at least " + std::to_string(opts.min_length) +
                                    " observations");
    if (!std::is_sorted(levels.begin(), levels.end()))
        throw std::invalid_argument("exceedance_correlation: levels must be sorted");
    for (double q : levels)
        if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("exceedance_correlation: levels must lie in (0, 1)");

    std::vector<double> sx(x.begin(), x.end());
    std::vector<double> sy(y.begin(), y.end());
    std::sort(sx.begin(), sx.end());
    std::sort(sy.begin(), sy.end());
    const std::size_t min_count = std::max<std::size_t>(opts.min_count, 2);

    ExceedanceCurve curve;
    for (double q : levels) {
        const double qx = empirical_quantile(sx, q);
        const double qy = empirical_quantile(sy, q);
        const bool upper = q > 0.5;
        const Branch main = conditioned(x, y, qx, qy, upper);
        if (main.count < min_count || !main.rho) {
            curve.omitted_levels.push_back(q);
            continue;
        }
        ExceedancePoint pt;
        pt.q = q;
        pt.rho = *main.rho;
        pt.count = main.count;
        pt.upper_tail = upper;
        if (q == 0.5) {
            const Branch up = conditioned(x, y, qx, qy, true);
            pt.count_upper = up.count;
            if (up.count >= min_count) pt.rho_upper = up.rho;
        }
        curve.points.push_back(pt);
    }
    return curve;
}

void simulate_pair(const ForecastSpec& spec, std::vector<double>& x, std::vector<double>& y) {
    if (!(std::fabs(spec.rho_z) <= 1.0)) throw std::invalid_argument("forecast_exceedance: |rho_z| must be <= 1");
    spec.params_x.validate();
    spec.params_y.validate();
    if (spec.horizon < 1 || spec.n_reps < 1) throw std::invalid_argument("forecast_exceedance: horizon and n_reps must be >= 1");

    const double w_coef = std::sqrt(std::max(0.0, 1.0 - spec.rho_z * spec.rho_z));
    x.clear();
    y.clear();
    x.reserve(spec.horizon * spec.n_reps);
    y.reserve(spec.horizon * spec.n_reps);
    for (std::size_t rep = 0; rep < spec.n_reps; ++rep) {
        NormalStream stream(spec.seed, rep);
        std::vector<double> rx, ry;
        rx.reserve(spec.horizon);
        ry.reserve(spec.horizon);
        bool ok = true;
        for (std::size_t t = 0; t < spec.horizon; ++t) {
            const double zx = stream();
            const double w = stream();
            const double zy = spec.rho_z * zx + w_coef * w;
            const auto a = log_return(spec.params_x, zx, spec.form);
            const auto b = log_return(spec.params_y, zy, spec.form);
            if (!a || !b) {
                ok = false;
                break;
            }
            rx.push_back(*a);
            ry.push_back(*b);
        }
        // Paths with a non-positive arithmetic price are dropped, as in the ensemble.
        if (!ok) continue;
        x.insert(x.end(), rx.begin(), rx.end());
        y.insert(y.end(), ry.begin(), ry.end());
    }
}

ExceedanceCurve forecast_exceedance(const ForecastSpec& spec, std::span<const double> levels,
                                    const ExceedanceOptions& opts) {
    std::vector<double> x, y;
    simulate_pair(spec, x, y);
    return exceedance_correlation(x, y, levels, opts);
}

}  // namespace mbmm
