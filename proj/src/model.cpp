#include "mbmm/model.hpp"

#include <cmath>
#include <stdexcept>

namespace mbmm {

void ModelParams::validate() const {
    if (!std::isfinite(mu) || !std::isfinite(sigma) || !std::isfinite(K) || !std::isfinite(m))
        throw std::invalid_argument("model parameters must be finite");
    if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be > 0");
    if (K != 0.0 && !(c > 0.0)) throw std::invalid_argument("c must be > 0 when K != 0");
}

double modifier(double z, double c, double m) {
    const double u = z - m;
    return (2.0 * std::exp(-0.5 * c * u * u) - 1.0) * std::atan(z);
}

double modifier_derivative(double z, double c, double m) {
    const double u = z - m;
    const double g = std::exp(-0.5 * c * u * u);
    return -2.0 * c * u * g * std::atan(z) + (2.0 * g - 1.0) / (1.0 + z * z);
}

double modifier_root(double c) {
    if (!(c > 0.0)) throw std::invalid_argument("modifier_root: c must be > 0");
    return std::sqrt(2.0 * std::log(2.0) / c);
}

double form_drift(const ModelParams& p, StepForm form) {
    return form == StepForm::Exponential ? p.mu : p.mu + 0.5 * p.sigma * p.sigma;
}

double modifier_coefficient(const ModelParams& p, StepForm form) {
    return p.channel == Channel::Mean ? form_drift(p, form) : p.sigma;
}

double arithmetic_multiplier(const ModelParams& p, double z) {
    const double alpha = form_drift(p, StepForm::Arithmetic);
    double x = 1.0 + alpha * p.dt + p.sigma * z * std::sqrt(p.dt);
    if (p.K != 0.0) x += modifier_coefficient(p, StepForm::Arithmetic) * p.K * modifier(z, p.c, p.m) * p.dt;
    return x;
}

std::optional<double> log_return(const ModelParams& p, double z, StepForm form) {
    if (form == StepForm::Exponential) {
        double r = p.mu * p.dt + p.sigma * z * std::sqrt(p.dt);
        // K == 0 must reproduce the plain GBM exponent bit-for-bit.
        if (p.K != 0.0) r += modifier_coefficient(p, form) * p.K * modifier(z, p.c, p.m) * p.dt;
        return r;
    }
    const double x = arithmetic_multiplier(p, z);
    if (!(x > 0.0)) return std::nullopt;
    return std::log(x);
}

std::optional<double> step(double price, const ModelParams& p, double z, StepForm form) {
    if (!(price > 0.0)) throw std::invalid_argument("step: price must be > 0");
    if (form == StepForm::Exponential) return price * std::exp(*log_return(p, z, form));
    const double x = arithmetic_multiplier(p, z);
    if (!(x > 0.0)) return std::nullopt;
    return price * x;
}

}  // namespace mbmm
