#include "mbmm/report.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace mbmm {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of negative zero
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string to_string(Channel c) { return c == Channel::Mean ? "mean" : "sigma"; }
std::string to_string(StepForm f) { return f == StepForm::Exponential ? "exponential" : "arithmetic"; }

Channel parse_channel(const std::string& s) {
    if (s == "mean") return Channel::Mean;
    if (s == "sigma") return Channel::Sigma;
    throw std::invalid_argument("channel must be 'mean' or 'sigma', got '" + s + "'");
}

StepForm parse_form(const std::string& s) {
    if (s == "exponential") return StepForm::Exponential;
    if (s == "arithmetic") return StepForm::Arithmetic;
    throw std::invalid_argument("form must be 'exponential' or 'arithmetic', got '" + s + "'");
}

json to_json(const ModelParams& p) {
    return json{{"mu", p.mu}, {"sigma", p.sigma}, {"dt", p.dt}, {"K", p.K},
                {"c", p.c},   {"m", p.m},         {"channel", to_string(p.channel)}};
}

json to_json(const ChiSquareReport& r) {
    return json{{"statistic", number_or_null(r.statistic)},
                {"df", r.df},
                {"p_value", number_or_null(r.p_value)},
                {"n_bins", r.n_bins},
                {"n_params", r.n_params}};
}

json to_json(const CustomHistogram& h) {
    return json{{"edges", h.edges}, {"counts", h.counts}, {"total", h.total}, {"n_bins", h.n_bins()}};
}

json to_json(const GridRange& r) { return json{{"lo", r.lo}, {"hi", r.hi}, {"step", r.step}}; }

json to_json(const GridSpec& g) {
    json j{{"K", to_json(g.K)}, {"c", to_json(g.c)}, {"seed", g.seed}, {"n_reps", g.n_reps}, {"refine", g.refine}};
    j["m"] = g.m ? to_json(*g.m) : json(nullptr);
    return j;
}

json to_json(const FitReport& r) {
    auto trace_json = [](const std::vector<GridPoint>& trace) {
        json out = json::array();
        for (const auto& p : trace) out.push_back({{"K", p.K}, {"c", p.c}, {"m", p.m}, {"chi2", number_or_null(p.statistic)}});
        return out;
    };
    json j;
    j["statistic"] = number_or_null(r.best_chi2.statistic);
    j["df"] = r.best_chi2.df;
    j["p_value"] = number_or_null(r.best_chi2.p_value);
    j["n_bins"] = r.best_chi2.n_bins;
    j["kurtosis_observed"] = r.kurtosis_observed;
    j["kurtosis_model"] = r.kurtosis_model;
    j["best_params"] = to_json(r.best_params);
    j["form"] = to_string(r.form);
    j["mbmm"] = to_json(r.best_chi2);
    j["gbm"] = to_json(r.gbm_chi2);
    j["n_steps"] = r.n_steps;
    j["histogram"] = to_json(r.histogram);
    j["expected_mbmm"] = r.best_expected;
    j["expected_gbm"] = r.gbm_expected;
    j["grid_points"] = r.grid_trace.size();
    j["grid_trace"] = trace_json(r.grid_trace);
    if (!r.refine_trace.empty()) j["refine_trace"] = trace_json(r.refine_trace);
    return j;
}

json to_json(const ExceedanceCurve& c) {
    json pts = json::array();
    for (const auto& p : c.points) {
        json e{{"q", p.q}, {"rho", p.rho}, {"count", p.count}, {"tail", p.upper_tail ? "upper" : "lower"}};
        if (p.q == 0.5) {
            e["median_both_branches"] = true;
            e["rho_upper"] = p.rho_upper ? json(*p.rho_upper) : json(nullptr);
            e["count_upper"] = p.count_upper;
        }
        pts.push_back(std::move(e));
    }
    return json{{"points", pts}, {"omitted_levels", c.omitted_levels}};
}

json to_json(const market::StepRecord& r) {
    return json{{"schema_version", kSchemaVersion},
                {"step", r.step},
                {"z", r.z},
                {"prices", r.prices},
                {"next_prices", r.next_prices},
                {"demand", r.demand},
                {"supply", r.supply},
                {"net_demand", r.net_demand},
                {"fills", r.fills},
                {"cash", r.cash},
                {"flags", r.flags}};
}

ModelParams params_from_report(const json& j) {
    const json& b = j.contains("best_params") ? j.at("best_params") : j;
    ModelParams p;
    p.mu = b.at("mu").get<double>();
    p.sigma = b.at("sigma").get<double>();
    p.dt = b.value("dt", 1.0);
    p.K = b.at("K").get<double>();
    p.c = b.at("c").get<double>();
    p.m = b.value("m", 0.0);
    p.channel = parse_channel(b.value("channel", std::string("mean")));
    p.validate();
    return p;
}

market::MarketConfig market_config_from_json(const json& j) {
    market::MarketConfig cfg;
    cfg.sectors = j.value("sectors", cfg.sectors);
    if (j.contains("sector_names")) cfg.sector_names = j.at("sector_names").get<std::vector<std::string>>();
    cfg.mu_m = j.value("mu_m", cfg.mu_m);
    cfg.sigma_md = j.value("sigma_md", cfg.sigma_md);
    if (j.contains("initial_prices")) cfg.initial_prices = j.at("initial_prices").get<std::vector<double>>();
    cfg.initial_shares = j.value("initial_shares", cfg.initial_shares);
    cfg.initial_cash = j.value("initial_cash", cfg.initial_cash);
    cfg.seed = j.value("seed", cfg.seed);
    for (const auto& a : j.value("agents", json::array())) {
        market::AgentSpec spec;
        spec.archetype = market::parse_archetype(a.at("archetype").get<std::string>());
        spec.slope = a.value("slope", spec.slope);
        spec.threshold = a.value("threshold", spec.threshold);
        spec.scale = a.value("scale", spec.scale);
        const int count = a.value("count", 1);
        if (count < 0) throw std::invalid_argument("agent count must be >= 0");
        for (int k = 0; k < count; ++k) cfg.agents.push_back(spec);
    }
    cfg.validate();
    return cfg;
}

void write_grid_trace_csv(std::ostream& os, const std::vector<GridPoint>& trace) {
    os << "K,c,m,chi2\n";
    for (const auto& p : trace)
        os << format_double(p.K) << ',' << format_double(p.c) << ',' << format_double(p.m) << ','
           << format_double(p.statistic) << '\n';
}

void write_exceedance_csv(std::ostream& os, const ExceedanceCurve& c) {
    os << "q,rho,count\n";
    for (const auto& p : c.points) os << format_double(p.q) << ',' << format_double(p.rho) << ',' << p.count << '\n';
}

}  // namespace mbmm
