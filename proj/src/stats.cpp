#include "mbmm/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace mbmm {

std::optional<std::size_t> CustomHistogram::bin_of(double x) const {
    if (!(x >= lo()) || !(x <= hi())) return std::nullopt;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::size_t idx = static_cast<std::size_t>(it - edges.begin());
    // upper_bound gives the first edge > x; x == hi lands past the end.
    if (idx == 0) return std::nullopt;
    return std::min(idx - 1, counts.size() - 1);
}

std::vector<double> in_range(std::span<const double> values, double lo, double hi) {
    std::vector<double> out;
    out.reserve(values.size());
    for (double v : values)
        if (v >= lo && v <= hi) out.push_back(v);
    return out;
}

CustomHistogram customize_bins(std::span<const double> values, double centre, double scale,
                               const BinningOptions& opts) {
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(centre))
        throw DegenerateData("customize_bins: degenerate series (sigma = 0)");
    if (opts.initial_bins < 4) throw std::invalid_argument("customize_bins: initial_bins must be >= 4");
    if (!(opts.min_fraction >= 0.0) || opts.min_fraction >= 1.0)
        throw std::invalid_argument("customize_bins: min_fraction must lie in [0, 1)");

    const double lo = centre - opts.half_width_sigmas * scale;
    const double hi = centre + opts.half_width_sigmas * scale;
    const std::size_t n0 = opts.initial_bins;
    const double width = (hi - lo) / static_cast<double>(n0);

    std::vector<double> edges(n0 + 1);
    for (std::size_t i = 0; i <= n0; ++i) edges[i] = lo + width * static_cast<double>(i);
    edges.front() = lo;
    edges.back() = hi;

    std::vector<std::size_t> counts(n0, 0);
    std::size_t total = 0;
    for (double v : values) {
        if (!std::isfinite(v)) continue;
        double x = v;
        if (x < lo || x > hi) {
            if (opts.out_of_range == OutOfRange::Discard) continue;
            x = std::clamp(x, lo, hi);
        }
        auto it = std::upper_bound(edges.begin(), edges.end(), x);
        std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(it - edges.begin()), n0) - 1;
        ++counts[idx];
        ++total;
    }
    if (total == 0) throw DegenerateData("customize_bins: no observations inside the range");

    const auto threshold = static_cast<std::size_t>(std::ceil(opts.min_fraction * static_cast<double>(total) - 1e-9));

    // Bin i spans [edges[i], edges[i+1]]. Merging bin i into i+1 removes edges[i+1].
    auto merge_right = [&](std::size_t i) {
        counts[i + 1] += counts[i];
        counts.erase(counts.begin() + static_cast<std::ptrdiff_t>(i));
        edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(i + 1));
    };
    auto merge_left = [&](std::size_t i) {
        counts[i - 1] += counts[i];
        counts.erase(counts.begin() + static_cast<std::ptrdiff_t>(i));
        edges.erase(edges.begin() + static_cast<std::ptrdiff_t>(i));
    };

    std::size_t left = 0;
    std::size_t right = counts.size() - 1;
    while (left < right) {
        if (counts[left] < threshold) {
            merge_right(left);
            --right;
        } else {
            ++left;
        }
        if (left >= right) break;
        if (counts[right] < threshold) {
            merge_left(right);
        }
        --right;
    }
    // The fronts met on a single unvisited bin.
    if (counts.size() > 1 && counts[left] < threshold) {
        if (left == 0) {
            merge_right(left);
        } else if (left + 1 >= counts.size() || counts[left - 1] <= counts[left + 1]) {
            merge_left(left);
        } else {
            merge_right(left);
        }
    }
    if (counts.size() < 4)
        throw DegenerateData("customize_bins: customization collapsed to " + std::to_string(counts.size()) + " bins");

    return CustomHistogram{std::move(edges), std::move(counts), total};
}

CustomHistogram customize_bins(const ReturnSeries& returns, const BinningOptions& opts) {
    const double dt = static_cast<double>(returns.base_dt);
    return customize_bins(returns.returns, returns.mu_hat * dt, returns.sigma_hat * std::sqrt(dt), opts);
}

std::vector<std::size_t> bin_counts(const CustomHistogram& bins, std::span<const double> values) {
    std::vector<std::size_t> out(bins.n_bins(), 0);
    for (double v : values)
        if (auto b = bins.bin_of(v)) ++out[*b];
    return out;
}

ChiSquareReport chi_square(const CustomHistogram& observed, std::span<const double> expected, int n_params) {
    if (expected.size() != observed.n_bins())
        throw std::invalid_argument("chi_square: expected has " + std::to_string(expected.size()) + " bins, observed " +
                                    std::to_string(observed.n_bins()));
    const int df = static_cast<int>(observed.n_bins()) - n_params - 1;
    if (df < 1) throw std::invalid_argument("chi_square: degrees of freedom must be >= 1");
    double stat = 0.0;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (!(expected[i] > 0.0))
            throw DegenerateData("chi_square: zero expected frequency in bin " + std::to_string(i));
        const double d = static_cast<double>(observed.counts[i]) - expected[i];
        stat += d * d / expected[i];
    }
    return ChiSquareReport{stat, df, chi_square_sf(stat, df), observed.n_bins(), n_params};
}

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 100000;

// Series for the lower regularized gamma P(a, x), valid for x < a + 1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double gamma_q_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_q(double a, double x) {
    if (!(a > 0.0)) throw std::invalid_argument("gamma_q: a must be > 0");
    if (!(x >= 0.0)) throw std::invalid_argument("gamma_q: x must be >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_fraction(a, x);
}

double chi_square_sf(double x, double df) {
    if (!(df > 0.0)) throw std::invalid_argument("chi_square_sf: df must be > 0");
    if (!(x >= 0.0)) throw std::invalid_argument("chi_square_sf: x must be >= 0");
    return gamma_q(0.5 * df, 0.5 * x);
}

Moments moments(std::span<const double> values) {
    if (values.size() < 4) throw DegenerateData("moments: need at least 4 values");
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    if (!(m2 > 0.0)) throw DegenerateData("moments: zero variance");
    m2 /= n;
    m3 /= n;
    m4 /= n;
    Moments out;
    out.n = values.size();
    out.mean = mean;
    out.std = std::sqrt(m2 * n / (n - 1.0));
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
    return out;
}

void MomentAccumulator::add(double x) {
    // Terriberry's online update of central moments.
    const double n1 = static_cast<double>(n_);
    ++n_;
    const double n = static_cast<double>(n_);
    const double delta = x - mean_;
    const double delta_n = delta / n;
    const double delta_n2 = delta_n * delta_n;
    const double term1 = delta * delta_n * n1;
    mean_ += delta_n;
    m4_ += term1 * delta_n2 * (n * n - 3.0 * n + 3.0) + 6.0 * delta_n2 * m2_ - 4.0 * delta_n * m3_;
    m3_ += term1 * delta_n * (n - 2.0) - 3.0 * delta_n * m2_;
    m2_ += term1;
}

void MomentAccumulator::merge(const MomentAccumulator& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double delta = o.mean_ - mean_;
    const double d2 = delta * delta;
    const double d3 = d2 * delta;
    const double d4 = d2 * d2;
    const double m2 = m2_ + o.m2_ + d2 * na * nb / n;
    const double m3 = m3_ + o.m3_ + d3 * na * nb * (na - nb) / (n * n) + 3.0 * delta * (na * o.m2_ - nb * m2_) / n;
    const double m4 = m4_ + o.m4_ + d4 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n) +
                      6.0 * d2 * (na * na * o.m2_ + nb * nb * m2_) / (n * n) + 4.0 * delta * (na * o.m3_ - nb * m3_) / n;
    mean_ += delta * nb / n;
    m2_ = m2;
    m3_ = m3;
    m4_ = m4;
    n_ += o.n_;
}

Moments MomentAccumulator::result() const {
    if (n_ < 4) throw DegenerateData("moments: need at least 4 values");
    if (!(m2_ > 0.0)) throw DegenerateData("moments: zero variance");
    const double n = static_cast<double>(n_);
    Moments out;
    out.n = n_;
    out.mean = mean_;
    out.std = std::sqrt(m2_ / (n - 1.0));
    out.skewness = std::sqrt(n) * m3_ / std::pow(m2_, 1.5);
    out.kurtosis = n * m4_ / (m2_ * m2_);
    return out;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("ks_distance: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

JarqueBera jarque_bera(std::span<const double> values) {
    const Moments m = moments(values);
    const double n = static_cast<double>(m.n);
    const double ex = m.kurtosis - 3.0;
    const double jb = n / 6.0 * (m.skewness * m.skewness + 0.25 * ex * ex);
    return JarqueBera{jb, chi_square_sf(jb, 2.0)};
}

}  // namespace mbmm
