#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "mbmm/model.hpp"

using namespace mbmm;

namespace {

// Direct transcription used as an oracle.
double f_oracle(double z, double c) { return (2.0 * std::exp(-c * z * z / 2.0) - 1.0) * std::atan(z); }

}  // namespace

TEST_CASE("modifier at reference points") {
    CHECK(modifier(0.0, 0.6) == 0.0);
    CHECK(std::abs(modifier(1.5202, 0.6)) < 5e-4);
    CHECK(std::abs(modifier(1.1774, 1.0)) < 5e-4);
    CHECK(modifier(3.0, 0.6) == doctest::Approx(-1.0812).epsilon(1e-4));
    CHECK(modifier(3.0, 0.6) == doctest::Approx(f_oracle(3.0, 0.6)).epsilon(1e-15));
}

TEST_CASE("modifier root") {
    CHECK(modifier_root(1.0) == doctest::Approx(1.1774).epsilon(1e-4));
    CHECK(modifier_root(0.6) == doctest::Approx(1.5202).epsilon(1e-4));
    CHECK(modifier_root(2.0 * std::log(2.0)) == doctest::Approx(1.0).epsilon(1e-15));
    for (double c : {0.1, 0.4, 0.6, 1.0, 2.0, 5.0}) CHECK(std::abs(modifier(modifier_root(c), c)) < 1e-12);
    CHECK_THROWS_AS(modifier_root(0.0), std::invalid_argument);
    CHECK_THROWS_AS(modifier_root(-1.0), std::invalid_argument);
}

TEST_CASE("modifier derivative matches central differences") {
    for (double c : {0.3, 0.6, 1.5})
        for (double m : {0.0, 0.5, -1.0})
            for (double z = -4.0; z <= 4.0; z += 0.37) {
                const double h = 1e-6;
                const double fd = (modifier(z + h, c, m) - modifier(z - h, c, m)) / (2 * h);
                CHECK(modifier_derivative(z, c, m) == doctest::Approx(fd).epsilon(1e-6));
            }
}

TEST_CASE("modifier symmetry, sign structure and bound") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> zdist(-8.0, 8.0), cdist(0.05, 3.0), mdist(-2.0, 2.0);
    for (int i = 0; i < 2000; ++i) {
        const double z = zdist(rng), c = cdist(rng), m = mdist(rng);
        CHECK(modifier(-z, c) == -modifier(z, c));
        CHECK(std::abs(modifier(z, c, m)) < M_PI / 2);
        const double root = modifier_root(c);
        const double az = std::abs(z);
        const double Kf = -5.0 * modifier(az, c);
        if (az > 1e-9 && az < root * (1 - 1e-9)) CHECK(Kf < 0.0);
        if (az > root * (1 + 1e-9)) CHECK(Kf > 0.0);
    }
}

TEST_CASE("step examples") {
    const ModelParams gbm{0.0005, 0.01, 1.0, 0.0, 0.6, 0.0, Channel::Mean};
    for (double z : {-3.0, -0.4, 0.0, 1.7}) {
        const double expect = 100.0 * std::exp(0.0005 + 0.01 * z);
        CHECK(*step(100.0, gbm, z, StepForm::Exponential) == expect);
    }
    ModelParams p = gbm;
    p.K = -28.0;
    CHECK(*step(100.0, p, 0.0, StepForm::Exponential) == doctest::Approx(100.0 * std::exp(0.0005)).epsilon(1e-15));

    const double f2 = f_oracle(2.0, 0.6);
    CHECK(f2 == doctest::Approx(-0.44022).epsilon(1e-4));
    const double oracle = 100.0 * std::exp(0.0005 + 0.02 + 0.0005 * (-28.0) * f2);
    CHECK(*step(100.0, p, 2.0, StepForm::Exponential) == doctest::Approx(oracle).epsilon(1e-14));
    CHECK(oracle == doctest::Approx(102.70217).epsilon(1e-6));
}

TEST_CASE("K = 0 is bit-identical to GBM for both channels") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    for (Channel ch : {Channel::Mean, Channel::Sigma}) {
        const ModelParams p{3e-4, 0.012, 2.0, 0.0, 0.6, 0.0, ch};
        for (int i = 0; i < 500; ++i) {
            const double z = n(rng);
            const double gbm = 100.0 * std::exp(p.mu * p.dt + p.sigma * z * std::sqrt(p.dt));
            CHECK(*step(100.0, p, z, StepForm::Exponential) == gbm);
        }
    }
}

TEST_CASE("channels and forms") {
    const ModelParams p{4e-4, 0.011, 2.0, -10.0, 0.6, 0.0, Channel::Mean};
    ModelParams s = p;
    s.channel = Channel::Sigma;
    const double z = 1.9;
    const double base = p.mu * p.dt + p.sigma * z * std::sqrt(2.0);
    CHECK(std::sqrt(p.dt) == doctest::Approx(1.4142).epsilon(1e-4));
    CHECK(*log_return(p, z, StepForm::Exponential) == doctest::Approx(base + p.mu * p.K * f_oracle(z, p.c) * p.dt));
    CHECK(*log_return(s, z, StepForm::Exponential) == doctest::Approx(base + p.sigma * p.K * f_oracle(z, p.c) * p.dt));

    const double alpha = p.mu + p.sigma * p.sigma / 2;
    CHECK(form_drift(p, StepForm::Arithmetic) == doctest::Approx(alpha));
    const double mult = 1 + alpha * p.dt + p.sigma * z * std::sqrt(p.dt) + alpha * p.K * f_oracle(z, p.c) * p.dt;
    CHECK(*step(50.0, p, z, StepForm::Arithmetic) == doctest::Approx(50.0 * mult));
}

TEST_CASE("arithmetic form signals non-positive prices") {
    const ModelParams p{0.0, 0.5, 1.0, 0.0, 1.0, 0.0, Channel::Mean};
    CHECK_FALSE(step(100.0, p, -3.0, StepForm::Arithmetic).has_value());
    CHECK_FALSE(log_return(p, -3.0, StepForm::Arithmetic).has_value());
    CHECK(step(100.0, p, -3.0, StepForm::Exponential).has_value());
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS((ModelParams{0.0, -0.1}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((ModelParams{0.0, 0.1, 0.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS((ModelParams{0.0, 0.1, 1.0, -1.0, 0.0}).validate(), std::invalid_argument);
    CHECK_NOTHROW((ModelParams{0.0, 0.1, 1.0, 0.0, 0.0}).validate());
    CHECK_THROWS_AS((ModelParams{std::nan(""), 0.1}).validate(), std::invalid_argument);
}
