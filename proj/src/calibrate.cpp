#include "mbmm/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

#include <boost/math/tools/toms748_solve.hpp>

#include "mbmm/parallel.hpp"

namespace mbmm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kScanStep = 0.01;

double snap(double v) {
    const double r = std::round(v * 1e12) / 1e12;
    return r == 0.0 ? 0.0 : r;
}

void validate_range(const GridRange& r, const char* name) {
    if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !std::isfinite(r.step))
        throw std::invalid_argument(std::string("grid ") + name + ": non-finite bound");
    if (!(r.step > 0.0)) throw std::invalid_argument(std::string("grid ") + name + ": step must be > 0");
    if (r.hi < r.lo) throw std::invalid_argument(std::string("grid ") + name + ": empty range");
}

double slope(const ModelParams& p, StepForm form, double z) {
    const double lin = p.sigma * std::sqrt(p.dt);
    if (p.K == 0.0) return lin;
    return lin + modifier_coefficient(p, form) * p.K * p.dt * modifier_derivative(z, p.c, p.m);
}

// log-return, or -inf where the arithmetic multiplier is non-positive.
double log_return_or_floor(const ModelParams& p, double z, StepForm form) {
    const auto r = log_return(p, z, form);
    return r ? *r : -kInf;
}

}  // namespace

std::vector<double> GridRange::values() const {
    validate_range(*this, "range");
    const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = snap(lo + step * static_cast<double>(i));
    return out;
}

void GridSpec::validate() const {
    validate_range(K, "K");
    validate_range(c, "c");
    if (!(c.lo > 0.0)) throw std::invalid_argument("grid c: lower bound must be > 0");
    if (m) validate_range(*m, "m");
    if (n_reps < 1) throw std::invalid_argument("grid: n_reps must be >= 1");
}

std::vector<double> GridSpec::K_values() const {
    auto v = K.values();
    if (std::find(v.begin(), v.end(), 0.0) == v.end()) {
        v.push_back(0.0);
        std::sort(v.begin(), v.end());
    }
    return v;
}

std::vector<double> GridSpec::m_values() const { return m ? m->values() : std::vector<double>{0.0}; }

CrnObjective::CrnObjective(std::uint64_t seed, std::size_t n_steps, std::size_t n_reps, unsigned workers)
    : seed_(seed), n_steps_(n_steps), n_reps_(n_reps), workers_(workers) {
    if (n_steps < 1 || n_reps < 1) throw std::invalid_argument("CrnObjective: n_steps and n_reps must be >= 1");
    EnsembleSpec spec;
    spec.n_steps = n_steps;
    spec.n_reps = n_reps;
    spec.seed = seed;
    z_.resize(n_steps * n_reps);
    parallel_for(n_reps, workers, [&](std::size_t rep) {
        const auto z = draw_innovations(spec, rep);
        std::copy(z.begin(), z.end(), z_.begin() + static_cast<std::ptrdiff_t>(rep * n_steps));
    });
    std::sort(z_.begin(), z_.end());
}

std::vector<double> CrnObjective::critical_points(const ModelParams& p, StepForm form) const {
    std::vector<double> cuts;
    if (p.K == 0.0) return cuts;
    const double a = z_.front();
    const double b = z_.back();
    const auto n = static_cast<std::size_t>(std::ceil((b - a) / kScanStep));
    if (n == 0) return cuts;
    const double h = (b - a) / static_cast<double>(n);
    auto d = [&](double z) { return slope(p, form, z); };
    double x0 = a;
    double d0 = d(x0);
    for (std::size_t i = 1; i <= n; ++i) {
        const double x1 = i == n ? b : a + h * static_cast<double>(i);
        const double d1 = d(x1);
        if (d1 == 0.0) {
            if (x1 < b) cuts.push_back(x1);
        } else if (d0 != 0.0 && (d0 < 0.0) != (d1 < 0.0)) {
            boost::uintmax_t iters = 200;
            const auto br = boost::math::tools::toms748_solve(d, x0, x1, d0, d1,
                                                              boost::math::tools::eps_tolerance<double>(50), iters);
            cuts.push_back(0.5 * (br.first + br.second));
        }
        x0 = x1;
        d0 = d1;
    }
    return cuts;
}

std::size_t CrnObjective::count_below(const ModelParams& p, StepForm form, double edge, bool inclusive,
                                      const std::vector<double>& cuts) const {
    auto pred = [&](double z) {
        const double r = log_return_or_floor(p, z, form);
        return inclusive ? r <= edge : r < edge;
    };
    auto h = [&](double z) { return log_return_or_floor(p, z, form) - edge; };

    std::size_t total = 0;
    const std::size_t n_seg = cuts.size() + 1;
    for (std::size_t s = 0; s < n_seg; ++s) {
        const double za = s == 0 ? z_.front() : cuts[s - 1];
        const double zb = s + 1 == n_seg ? z_.back() : cuts[s];
        const auto first = s == 0 ? z_.begin() : std::lower_bound(z_.begin(), z_.end(), za);
        const auto last = s + 1 == n_seg ? z_.end() : std::lower_bound(z_.begin(), z_.end(), zb);
        if (first >= last) continue;

        const bool pa = pred(za);
        const bool pb = pred(zb);
        if (pa && pb) {
            total += static_cast<std::size_t>(last - first);
            continue;
        }
        if (!pa && !pb) continue;

        // Exactly one crossing on a monotone piece.
        const double ha = h(za);
        const double hb = h(zb);
        double lo = za, hi = zb;
        if (std::isfinite(ha) && std::isfinite(hb) && ha != 0.0 && hb != 0.0) {
            boost::uintmax_t iters = 200;
            const auto br = boost::math::tools::toms748_solve(h, za, zb, ha, hb,
                                                              boost::math::tools::eps_tolerance<double>(50), iters);
            lo = br.first;
            hi = br.second;
        } else {
            // Floored arithmetic region or an exact hit: bisect on the predicate.
            for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) break;
                if (pred(mid) == pa) lo = mid; else hi = mid;
            }
        }
        const auto blo = std::lower_bound(first, last, lo);
        const auto bhi = std::upper_bound(blo, last, hi);
        if (pa) {
            total += static_cast<std::size_t>(blo - first);
        } else {
            total += static_cast<std::size_t>(last - bhi);
        }
        for (auto it = blo; it != bhi; ++it) total += pred(*it) ? 1u : 0u;
    }
    return total;
}

std::vector<double> CrnObjective::expected(const ModelParams& p, StepForm form, const CustomHistogram& bins) const {
    p.validate();
    if (form == StepForm::Arithmetic) {
        // Whole replications are rejected on a non-positive price; pooling
        // cannot express that, so fall back to the per-path route.
        const auto cuts = critical_points(p, form);
        bool any_floor = arithmetic_multiplier(p, z_.front()) <= 0.0 || arithmetic_multiplier(p, z_.back()) <= 0.0;
        for (double t : cuts) any_floor = any_floor || arithmetic_multiplier(p, t) <= 0.0;
        if (any_floor) {
            EnsembleSpec spec;
            spec.params = p;
            spec.form = form;
            spec.n_steps = n_steps_;
            spec.n_reps = n_reps_;
            spec.seed = seed_;
            spec.workers = workers_;
            return expected_frequencies(spec, bins).mean_counts;
        }
    }
    const auto cuts = critical_points(p, form);
    const std::size_t nb = bins.n_bins();
    std::vector<std::size_t> below(nb + 1);
    for (std::size_t i = 0; i < nb; ++i) below[i] = count_below(p, form, bins.edges[i], false, cuts);
    below[nb] = count_below(p, form, bins.edges[nb], true, cuts);
    std::vector<double> out(nb);
    const double n = static_cast<double>(n_reps_);
    for (std::size_t i = 0; i < nb; ++i) out[i] = static_cast<double>(below[i + 1] - below[i]) / n;
    return out;
}

namespace {

ModelParams base_params(const ReturnSeries& returns, const FitOptions& opts) {
    ModelParams p;
    p.mu = returns.mu_hat;
    p.sigma = returns.sigma_hat;
    p.dt = static_cast<double>(returns.base_dt);
    p.channel = opts.channel;
    return p;
}

double statistic_or_inf(const CustomHistogram& bins, const std::vector<double>& expected, int n_params) {
    try {
        return chi_square(bins, expected, n_params).statistic;
    } catch (const DegenerateData&) {
        return kInf;
    }
}

ChiSquareReport report_or_inf(const CustomHistogram& bins, const std::vector<double>& expected, int n_params) {
    try {
        return chi_square(bins, expected, n_params);
    } catch (const DegenerateData&) {
        return ChiSquareReport{kInf, static_cast<int>(bins.n_bins()) - n_params - 1, 0.0, bins.n_bins(), n_params};
    }
}

// Lower statistic wins; ties go to the more parsimonious point.
bool better(const GridPoint& a, const GridPoint& b) {
    return std::make_tuple(a.statistic, std::fabs(a.K), a.c, std::fabs(a.m)) <
           std::make_tuple(b.statistic, std::fabs(b.K), b.c, std::fabs(b.m));
}

std::vector<GridPoint> evaluate_grid(const CrnObjective& objective, const CustomHistogram& bins, ModelParams base,
                                     const std::vector<double>& Ks, const std::vector<double>& cs,
                                     const std::vector<double>& ms, const FitOptions& opts, int n_params) {
    std::vector<GridPoint> trace;
    trace.reserve(Ks.size() * cs.size() * ms.size());
    for (double K : Ks)
        for (double c : cs)
            for (double m : ms) trace.push_back({K, c, m, 0.0});
    parallel_for(trace.size(), opts.workers, [&](std::size_t i) {
        ModelParams p = base;
        p.K = trace[i].K;
        p.c = trace[i].c;
        p.m = trace[i].m;
        trace[i].statistic = statistic_or_inf(bins, objective.expected(p, opts.form, bins), n_params);
    });
    return trace;
}

std::vector<double> around(double centre, double step, double floor_value) {
    std::vector<double> out;
    const double fine = step / 5.0;
    for (int i = -5; i <= 5; ++i) {
        const double v = snap(centre + fine * i);
        if (v >= floor_value) out.push_back(v);
    }
    return out;
}

}  // namespace

FitReport fit(const ReturnSeries& returns, const GridSpec& grid, const FitOptions& opts) {
    grid.validate();
    FitReport report;
    report.form = opts.form;
    report.histogram = customize_bins(returns, opts.binning);
    const auto& bins = report.histogram;
    const int n_params = grid.n_params();
    if (static_cast<int>(bins.n_bins()) - n_params - 1 < 1)
        throw DegenerateData("fit: too few customized bins (" + std::to_string(bins.n_bins()) + ") for the parameter count");

    report.n_steps = returns.returns.size();
    const CrnObjective objective(grid.seed, report.n_steps, grid.n_reps, opts.workers);
    const ModelParams base = base_params(returns, opts);

    report.grid_trace = evaluate_grid(objective, bins, base, grid.K_values(), grid.c_values(), grid.m_values(), opts, n_params);
    GridPoint best = report.grid_trace.front();
    for (const auto& g : report.grid_trace)
        if (better(g, best)) best = g;
    if (!std::isfinite(best.statistic)) throw DegenerateData("fit: every grid point has an empty expected bin");

    if (grid.refine) {
        const auto Ks = around(best.K, grid.K.step, -kInf);
        const auto cs = around(best.c, grid.c.step, grid.c.lo > 0.0 ? std::min(grid.c.lo, best.c) : 1e-6);
        const auto ms = grid.m ? around(best.m, grid.m->step, -kInf) : std::vector<double>{0.0};
        report.refine_trace = evaluate_grid(objective, bins, base, Ks, cs, ms, opts, n_params);
        for (const auto& g : report.refine_trace)
            if (better(g, best)) best = g;
    }

    report.best_params = base;
    report.best_params.K = best.K;
    report.best_params.c = best.c;
    report.best_params.m = best.m;
    report.best_expected = objective.expected(report.best_params, opts.form, bins);
    report.best_chi2 = report_or_inf(bins, report.best_expected, n_params);

    ModelParams gbm = base;
    gbm.K = 0.0;
    report.gbm_expected = objective.expected(gbm, opts.form, bins);
    report.gbm_chi2 = report_or_inf(bins, report.gbm_expected, kGbmParams);

    report.kurtosis_observed = moments(in_range(returns.returns, bins.lo(), bins.hi())).kurtosis;
    EnsembleSpec spec;
    spec.params = report.best_params;
    spec.form = opts.form;
    spec.n_steps = report.n_steps;
    spec.n_reps = grid.n_reps;
    spec.seed = grid.seed;
    spec.workers = opts.workers;
    report.kurtosis_model = simulated_moments(spec, bins.lo(), bins.hi()).kurtosis;
    return report;
}

ChannelComparison diagnostic_channel(const ReturnSeries& returns, const GridSpec& grid, FitOptions opts) {
    ChannelComparison out;
    opts.channel = Channel::Mean;
    out.mean = fit(returns, grid, opts);
    opts.channel = Channel::Sigma;
    out.sigma = fit(returns, grid, opts);
    return out;
}

}  // namespace mbmm
