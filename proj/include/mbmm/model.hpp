#pragma once

#include <optional>

namespace mbmm {

/// Which term the modifier K·f(Z) scales: the drift (the model proper) or
/// the volatility (the diagnostic variant).
enum class Channel { Mean, Sigma };

/// Exponential is the log-normal step; Arithmetic is the Ito-corrected
/// first-order form with alpha = mu + sigma^2/2.
enum class StepForm { Exponential, Arithmetic };

struct ModelParams {
    double mu = 0.0;     // drift per unit time step
    double sigma = 0.0;  // volatility per sqrt(time step)
    double dt = 1.0;     // step length in base periods
    double K = 0.0;      // modifier weight, typically <= 0
    double c = 1.0;      // tail-onset parameter, > 0 when K != 0
    double m = 0.0;      // skew shift inside the Gaussian factor
    Channel channel = Channel::Mean;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
};

/// f(z) = (2 exp(-c (z - m)^2 / 2) - 1) * atan(z), atan in radians.
double modifier(double z, double c, double m = 0.0);

/// Derivative of modifier() with respect to z.
double modifier_derivative(double z, double c, double m = 0.0);

/// Positive root sqrt(2 ln 2 / c) of the symmetric modifier.
double modifier_root(double c);

/// Drift used by a form: mu for Exponential, mu + sigma^2/2 for Arithmetic.
double form_drift(const ModelParams& p, StepForm form);

/// Coefficient multiplying K f(z) dt for the given channel and form.
double modifier_coefficient(const ModelParams& p, StepForm form);

/// Log-return of one step for innovation z. nullopt when the arithmetic
/// multiplier is non-positive (the price would be floored).
std::optional<double> log_return(const ModelParams& p, double z, StepForm form);

/// Arithmetic multiplier 1 + alpha dt + sigma z sqrt(dt) + alpha K f(z) dt.
double arithmetic_multiplier(const ModelParams& p, double z);

/// Advance price `price` by one step. nullopt signals the arithmetic form
/// produced a non-positive price; the caller chooses the policy.
std::optional<double> step(double price, const ModelParams& p, double z, StepForm form);

}  // namespace mbmm
