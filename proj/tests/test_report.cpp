#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "mbmm/report.hpp"

using namespace mbmm;
using nlohmann::json;

TEST_CASE("shortest round-trip formatting") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double v = u(rng) * std::pow(10.0, static_cast<int>(rng() % 40) - 20);
        CHECK(std::stod(format_double(v)) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(INFINITY) == "inf");
    CHECK(number_or_null(NAN).is_null());
    CHECK(number_or_null(2.5) == 2.5);
}

TEST_CASE("enum names round-trip") {
    CHECK(parse_channel(to_string(Channel::Sigma)) == Channel::Sigma);
    CHECK(parse_form(to_string(StepForm::Arithmetic)) == StepForm::Arithmetic);
    CHECK_THROWS_AS(parse_channel("drift"), std::invalid_argument);
    CHECK_THROWS_AS(parse_form("log"), std::invalid_argument);
}

TEST_CASE("fit report serialization") {
    EnsembleSpec s;
    s.params = ModelParams{4e-4, 0.011, 1.0, -20.0, 0.6};
    s.n_steps = 504;
    s.n_reps = 1;
    const auto data = make_return_series(simulate_returns(s, 0));
    GridSpec g;
    g.K = {-30.0, 0.0, 5.0};
    g.c = {0.2, 1.0, 0.4};
    g.n_reps = 100;
    const auto r = fit(data, g);
    const json j = to_json(r);
    for (const char* key : {"statistic", "df", "p_value", "n_bins", "kurtosis_observed", "kurtosis_model", "best_params",
                            "gbm", "mbmm", "histogram", "grid_trace"})
        CHECK(j.contains(key));
    CHECK(j["statistic"].get<double>() == r.best_chi2.statistic);
    CHECK(j["gbm"]["n_params"] == kGbmParams);
    CHECK(j["grid_trace"].size() == r.grid_trace.size());
    CHECK(j["histogram"]["edges"].size() == r.histogram.n_bins() + 1);

    // Text round trip keeps every double bit-exact.
    const json back = json::parse(j.dump());
    const ModelParams p = params_from_report(back);
    CHECK(p.K == r.best_params.K);
    CHECK(p.c == r.best_params.c);
    CHECK(p.mu == r.best_params.mu);
    CHECK(p.sigma == r.best_params.sigma);

    std::ostringstream csv;
    write_grid_trace_csv(csv, r.grid_trace);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "K,c,m,chi2");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == r.grid_trace.size());
}

TEST_CASE("market config from json") {
    const json j = json::parse(R"({
        "sectors": 2, "mu_m": 0.01, "sigma_md": 0.05, "initial_prices": [10, 20], "seed": 9,
        "agents": [{"archetype": "bubble", "threshold": 0.5, "count": 3}, {"archetype": "random"}]
    })");
    const auto cfg = market_config_from_json(j);
    CHECK(cfg.sectors == 2);
    CHECK(cfg.agents.size() == 4);
    CHECK(cfg.agents[0].archetype == market::Archetype::Bubble);
    CHECK(cfg.agents[2].threshold == 0.5);
    CHECK(cfg.agents[3].archetype == market::Archetype::Random);
    CHECK(cfg.initial_price(1) == 20.0);
    CHECK(cfg.seed == 9);
    CHECK_THROWS_AS(market_config_from_json(json::parse(R"({"sectors": 2, "initial_prices": [1]})")), std::invalid_argument);
    CHECK_THROWS_AS(market_config_from_json(json::parse(R"({"agents": [{"archetype": "whale"}]})")), std::invalid_argument);

    const auto log = market::run_session(cfg, 2);
    const json rec = to_json(log[0]);
    CHECK(rec["schema_version"] == kSchemaVersion);
    CHECK(rec["fills"].size() == 4);
    CHECK(rec["prices"].size() == 2);
}

TEST_CASE("exceedance csv") {
    ExceedanceCurve c;
    c.points.push_back({0.1, 0.25, 40, false, std::nullopt, 0});
    c.points.push_back({0.5, 0.1, 400, false, 0.2, 380});
    std::ostringstream os;
    write_exceedance_csv(os, c);
    CHECK(os.str() == "q,rho,count\n0.1,0.25,40\n0.5,0.1,400\n");
    const json j = to_json(c);
    CHECK(j["points"][1]["rho_upper"] == 0.2);
    CHECK(j["points"][0]["tail"] == "lower");
}
