#include "cli.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbmm/calibrate.hpp"
#include "mbmm/ensemble.hpp"
#include "mbmm/exceedance.hpp"
#include "mbmm/ingest.hpp"
#include "mbmm/market.hpp"
#include "mbmm/report.hpp"

namespace mbmm::cli {

namespace {

using nlohmann::json;

struct Common {
    std::uint64_t seed = kDefaultSeed;
    std::size_t reps = 1000;
    std::string out = "-";
    std::string format;
    unsigned workers = 0;
};

struct ParamFlags {
    double mu = 0.0004;
    double sigma = 0.011;
    double dt = 1.0;
    double K = 0.0;
    double c = 0.6;
    double m = 0.0;
    std::string channel = "mean";

    ModelParams params() const {
        ModelParams p{mu, sigma, dt, K, c, m, parse_channel(channel)};
        p.validate();
        return p;
    }
};

struct GridFlags {
    double k_min = -50, k_max = 0, k_step = 0.5;
    double c_min = 0.1, c_max = 2.0, c_step = 0.1;
    bool skew = false;
    double m_min = -1, m_max = 1, m_step = 0.1;
    bool refine = false;

    GridSpec spec(const Common& common) const {
        GridSpec g;
        g.K = {k_min, k_max, k_step};
        g.c = {c_min, c_max, c_step};
        if (skew) g.m = GridRange{m_min, m_max, m_step};
        g.seed = common.seed;
        g.n_reps = common.reps;
        g.refine = refine;
        g.validate();
        return g;
    }
};

void add_common(CLI::App* app, Common& c, const std::string& default_format, std::size_t default_reps) {
    c.format = default_format;
    c.reps = default_reps;
    app->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    app->add_option("--reps", c.reps, "Monte Carlo replications")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--out", c.out, "Output file ('-' for stdout)")->capture_default_str();
    app->add_option("--format", c.format, "Output format")->capture_default_str()->check(CLI::IsMember({"json", "csv"}));
    app->add_option("--workers", c.workers, "Worker threads (0 = all cores); results do not depend on it");
}

void add_params(CLI::App* app, ParamFlags& p) {
    app->add_option("--mu", p.mu, "Drift per step")->capture_default_str();
    app->add_option("--sigma", p.sigma, "Volatility per sqrt(step)")->capture_default_str();
    app->add_option("--dt", p.dt, "Time step in base periods")->capture_default_str();
    app->add_option("--k", p.K, "Modifier weight K")->capture_default_str();
    app->add_option("--c", p.c, "Tail-onset parameter c")->capture_default_str();
    app->add_option("--m", p.m, "Skew shift m")->capture_default_str();
    app->add_option("--channel", p.channel, "Modifier channel")->capture_default_str()->check(CLI::IsMember({"mean", "sigma"}));
}

void add_grid(CLI::App* app, GridFlags& g) {
    app->add_option("--k-min", g.k_min)->capture_default_str();
    app->add_option("--k-max", g.k_max)->capture_default_str();
    app->add_option("--k-step", g.k_step)->capture_default_str();
    app->add_option("--c-min", g.c_min)->capture_default_str();
    app->add_option("--c-max", g.c_max)->capture_default_str();
    app->add_option("--c-step", g.c_step)->capture_default_str();
    app->add_flag("--skew", g.skew, "Also search the skew shift m");
    app->add_option("--m-min", g.m_min)->capture_default_str();
    app->add_option("--m-max", g.m_max)->capture_default_str();
    app->add_option("--m-step", g.m_step)->capture_default_str();
    app->add_flag("--refine", g.refine, "Refine around the coarse optimum at step/5");
}

/// Writes to the --out file or the default stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) {
        if (path.empty() || path == "-") {
            os_ = &fallback;
        } else {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw std::runtime_error("cannot open output file " + path);
            os_ = file_.get();
        }
    }
    std::ostream& get() { return *os_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_ = nullptr;
};

std::string csv_header(const std::string& command, const Common& c) {
    return "# schema_version=" + std::to_string(kSchemaVersion) + " command=" + command + " seed=" + std::to_string(c.seed) +
           " reps=" + std::to_string(c.reps) + "\n";
}

json data_json(const ReturnSeries& r) {
    return json{{"n_returns", r.returns.size()}, {"mu_hat", r.mu_hat}, {"sigma_hat", r.sigma_hat}, {"dt", r.base_dt}};
}

std::vector<double> parse_levels(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument("bad level '" + item + "'");
        out.push_back(v);
    }
    return out;
}

struct FitArgs {
    Common common;
    GridFlags grid;
    std::string input;
    int window = 1;
    std::size_t bins = 100;
    std::string channel = "mean";
    std::string form = "exponential";
    bool clamp = false;
    std::string trace_csv;
};

void add_fit_args(CLI::App* app, FitArgs& a, int default_window) {
    a.window = default_window;
    add_common(app, a.common, "json", 1000);
    add_grid(app, a.grid);
    app->add_option("--input", a.input, "CSV with date,close columns")->required();
    app->add_option("--window", a.window, "Aggregation window in days")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--bins", a.bins, "Equal-width bins before merging")->capture_default_str();
    app->add_option("--form", a.form, "Step form")->capture_default_str()->check(CLI::IsMember({"exponential", "arithmetic"}));
    app->add_flag("--clamp", a.clamp, "Clamp out-of-range observations into the end bins instead of discarding");
}

FitOptions fit_options(const FitArgs& a) {
    FitOptions o;
    o.binning.initial_bins = a.bins;
    o.binning.out_of_range = a.clamp ? OutOfRange::Clamp : OutOfRange::Discard;
    o.channel = parse_channel(a.channel);
    o.form = parse_form(a.form);
    o.workers = a.common.workers;
    return o;
}

json fit_header(const std::string& command, const FitArgs& a, const GridSpec& g, const ReturnSeries& r) {
    return json{{"schema_version", kSchemaVersion}, {"command", command}, {"seed", a.common.seed},
                {"n_reps", a.common.reps},          {"input", a.input},    {"window", a.window},
                {"initial_bins", a.bins},           {"grid", to_json(g)},  {"data", data_json(r)}};
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const auto prices = load_csv(a.input);
    const auto returns = to_returns(prices, a.window);
    const GridSpec grid = a.grid.spec(a.common);
    const FitReport report = fit(returns, grid, fit_options(a));

    if (!a.trace_csv.empty()) {
        std::ofstream tf(a.trace_csv);
        if (!tf) throw std::runtime_error("cannot open " + a.trace_csv);
        write_grid_trace_csv(tf, report.grid_trace);
    }
    Sink sink(a.common.out, out);
    if (a.common.format == "csv") {
        write_grid_trace_csv(sink.get(), report.grid_trace);
        return kExitOk;
    }
    json j = fit_header("fit", a, grid, returns);
    j.update(to_json(report));
    j["channel"] = a.channel;
    sink.get() << j.dump(2) << '\n';
    return kExitOk;
}

int cmd_diagnose(const FitArgs& a, std::ostream& out) {
    const auto prices = load_csv(a.input);
    const auto returns = to_returns(prices, a.window);
    const GridSpec grid = a.grid.spec(a.common);
    const ChannelComparison cmp = diagnostic_channel(returns, grid, fit_options(a));
    json j = fit_header("diagnose2day", a, grid, returns);
    j["sqrt_dt"] = std::sqrt(static_cast<double>(returns.base_dt));
    j["mean_channel"] = to_json(cmp.mean);
    j["sigma_channel"] = to_json(cmp.sigma);
    j["summary"] = {{"mean_channel_chi2", number_or_null(cmp.mean.best_chi2.statistic)},
                    {"sigma_channel_chi2", number_or_null(cmp.sigma.best_chi2.statistic)},
                    {"mean_channel_p", number_or_null(cmp.mean.best_chi2.p_value)},
                    {"sigma_channel_p", number_or_null(cmp.sigma.best_chi2.p_value)}};
    Sink sink(a.common.out, out);
    sink.get() << j.dump(2) << '\n';
    return kExitOk;
}

struct SimulateArgs {
    Common common;
    ParamFlags params;
    std::string form = "exponential";
    std::size_t steps = 504;
    bool as_prices = false;
    double p0 = 100.0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    EnsembleSpec spec;
    spec.params = a.params.params();
    spec.form = parse_form(a.form);
    spec.n_steps = a.steps;
    spec.n_reps = a.common.reps;
    spec.seed = a.common.seed;
    spec.p0 = a.p0;
    spec.validate();
    Sink sink(a.common.out, out);
    std::ostream& os = sink.get();

    if (a.as_prices) {
        // A loadable date,close fixture built from replication 0 on weekdays.
        const auto prices = simulate_prices(spec, 0);
        std::chrono::sys_days day = std::chrono::sys_days{std::chrono::year{2000} / 1 / 3};
        os << "date,close\n";
        for (double p : prices) {
            while (std::chrono::weekday{day} == std::chrono::Saturday || std::chrono::weekday{day} == std::chrono::Sunday)
                day += std::chrono::days{1};
            os << format_iso_date(std::chrono::year_month_day{day}) << ',' << format_double(p) << '\n';
            day += std::chrono::days{1};
        }
        return kExitOk;
    }
    if (a.common.format == "json") {
        json paths = json::array();
        for (std::size_t rep = 0; rep < spec.n_reps; ++rep) paths.push_back(simulate_returns(spec, rep));
        json j{{"schema_version", kSchemaVersion}, {"command", "simulate"}, {"seed", spec.seed},
               {"n_reps", spec.n_reps},            {"n_steps", spec.n_steps}, {"form", to_string(spec.form)},
               {"params", to_json(spec.params)},   {"returns", paths}};
        os << j.dump() << '\n';
        return kExitOk;
    }
    os << csv_header("simulate", a.common) << "rep,step,log_return\n";
    for (std::size_t rep = 0; rep < spec.n_reps; ++rep) {
        const auto r = simulate_returns(spec, rep);
        for (std::size_t t = 0; t < r.size(); ++t) os << rep << ',' << t << ',' << format_double(r[t]) << '\n';
    }
    return kExitOk;
}

struct HistplotArgs {
    Common common;
    std::string input;
    std::string report;
    int window = 1;
    std::size_t bins = 100;
    double K = std::nan("");
    double c = 0.6;
    double m = 0.0;
    std::string channel = "mean";
    std::string tail;
};

int cmd_histplot(const HistplotArgs& a, std::ostream& out) {
    const auto returns = to_returns(load_csv(a.input), a.window);
    ModelParams p;
    p.mu = returns.mu_hat;
    p.sigma = returns.sigma_hat;
    p.dt = static_cast<double>(returns.base_dt);
    if (!a.report.empty()) {
        std::ifstream in(a.report);
        if (!in) throw std::runtime_error("cannot open " + a.report);
        const ModelParams fitted = params_from_report(json::parse(in));
        p.K = fitted.K;
        p.c = fitted.c;
        p.m = fitted.m;
        p.channel = fitted.channel;
    } else {
        if (std::isnan(a.K)) throw std::invalid_argument("histplot needs --report or --k/--c");
        p.K = a.K;
        p.c = a.c;
        p.m = a.m;
        p.channel = parse_channel(a.channel);
    }
    p.validate();
    BinningOptions bo;
    bo.initial_bins = a.bins;
    const CustomHistogram hist = customize_bins(returns, bo);
    const CrnObjective objective(a.common.seed, returns.returns.size(), a.common.reps, a.common.workers);
    ModelParams gbm = p;
    gbm.K = 0.0;
    const auto e_gbm = objective.expected(gbm, StepForm::Exponential, hist);
    const auto e_mbmm = objective.expected(p, StepForm::Exponential, hist);

    // Tail bins lie beyond the modifier's transition point.
    const double centre = p.mu * p.dt;
    const double scale = p.sigma * std::sqrt(p.dt);
    const double root = modifier_root(p.c);
    Sink sink(a.common.out, out);
    std::ostream& os = sink.get();
    if (a.common.format == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < hist.n_bins(); ++i) {
            const double centre_i = 0.5 * (hist.edges[i] + hist.edges[i + 1]);
            if (a.tail == "right" && centre_i <= centre + root * scale) continue;
            if (a.tail == "left" && centre_i >= centre - root * scale) continue;
            rows.push_back({{"bin_lo", hist.edges[i]}, {"bin_hi", hist.edges[i + 1]}, {"bin_center", centre_i},
                            {"observed", hist.counts[i]}, {"gbm_expected", e_gbm[i]}, {"mbmm_expected", e_mbmm[i]}});
        }
        os << json{{"schema_version", kSchemaVersion}, {"command", "histplot"}, {"seed", a.common.seed},
                   {"n_reps", a.common.reps}, {"params", to_json(p)}, {"rows", rows}}.dump(2)
           << '\n';
        return kExitOk;
    }
    os << csv_header("histplot", a.common);
    os << "bin_lo,bin_hi,bin_center,observed,gbm_expected,mbmm_expected\n";
    for (std::size_t i = 0; i < hist.n_bins(); ++i) {
        const double centre_i = 0.5 * (hist.edges[i] + hist.edges[i + 1]);
        if (a.tail == "right" && centre_i <= centre + root * scale) continue;
        if (a.tail == "left" && centre_i >= centre - root * scale) continue;
        os << format_double(hist.edges[i]) << ',' << format_double(hist.edges[i + 1]) << ',' << format_double(centre_i) << ','
           << hist.counts[i] << ',' << format_double(e_gbm[i]) << ',' << format_double(e_mbmm[i]) << '\n';
    }
    return kExitOk;
}

struct FplotArgs {
    Common common;
    double c = 1.0;
    double m = 0.0;
    std::vector<double> Ks{-1.0, -2.0, -5.0, -10.0};
    double z_min = -4.0, z_max = 4.0;
    std::size_t points = 161;
};

int cmd_fplot(const FplotArgs& a, std::ostream& out) {
    if (!(a.c > 0.0)) throw std::invalid_argument("fplot: c must be > 0");
    if (a.points < 2 || !(a.z_max > a.z_min)) throw std::invalid_argument("fplot: need points >= 2 and z-max > z-min");
    Sink sink(a.common.out, out);
    std::ostream& os = sink.get();
    os << "# schema_version=" << kSchemaVersion << " command=fplot c=" << format_double(a.c) << " m=" << format_double(a.m)
       << " root=" << format_double(modifier_root(a.c)) << '\n';
    os << 'z';
    for (double K : a.Ks) os << ",K=" << format_double(K);
    os << '\n';
    for (std::size_t i = 0; i < a.points; ++i) {
        const double z = a.z_min + (a.z_max - a.z_min) * static_cast<double>(i) / static_cast<double>(a.points - 1);
        os << format_double(z);
        const double f = modifier(z, a.c, a.m);
        for (double K : a.Ks) os << ',' << format_double(K * f);
        os << '\n';
    }
    return kExitOk;
}

struct ExceedanceArgs {
    Common common;
    std::string x_csv, y_csv;
    double mu_x = 0.0004, sigma_x = 0.011, k_x = 0.0, c_x = 0.6, m_x = 0.0;
    double mu_y = 0.0004, sigma_y = 0.011, k_y = 0.0, c_y = 0.6, m_y = 0.0;
    double rho = 0.0;
    std::size_t horizon = 250;
    std::string levels = "0.05,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,0.95";
    std::size_t min_count = 10;
};

std::vector<double> aligned_returns(const PriceSeries& a, const PriceSeries& b, bool first) {
    // Log-returns over dates present in both files.
    std::map<std::chrono::sys_days, double> other;
    const auto& keep = first ? a : b;
    const auto& ref = first ? b : a;
    for (const auto& o : ref.observations()) other[std::chrono::sys_days{o.date}] = o.close;
    std::vector<double> closes;
    for (const auto& o : keep.observations())
        if (other.count(std::chrono::sys_days{o.date})) closes.push_back(o.close);
    return to_returns(closes, 1, 1).returns;
}

int cmd_exceedance(const ExceedanceArgs& a, std::ostream& out) {
    const auto levels = parse_levels(a.levels);
    ExceedanceOptions opts;
    opts.min_count = a.min_count;
    ExceedanceCurve curve;
    json source;
    if (!a.x_csv.empty() || !a.y_csv.empty()) {
        if (a.x_csv.empty() || a.y_csv.empty()) throw std::invalid_argument("exceedance: give both --x-csv and --y-csv");
        const auto px = load_csv(a.x_csv);
        const auto py = load_csv(a.y_csv);
        const auto rx = aligned_returns(px, py, true);
        const auto ry = aligned_returns(px, py, false);
        curve = exceedance_correlation(rx, ry, levels, opts);
        source = {{"mode", "empirical"}, {"x", a.x_csv}, {"y", a.y_csv}, {"n", rx.size()}};
    } else {
        ForecastSpec spec;
        spec.params_x = ModelParams{a.mu_x, a.sigma_x, 1.0, a.k_x, a.c_x, a.m_x, Channel::Mean};
        spec.params_y = ModelParams{a.mu_y, a.sigma_y, 1.0, a.k_y, a.c_y, a.m_y, Channel::Mean};
        spec.rho_z = a.rho;
        spec.horizon = a.horizon;
        spec.n_reps = a.common.reps;
        spec.seed = a.common.seed;
        curve = forecast_exceedance(spec, levels, opts);
        source = {{"mode", "forecast"}, {"params_x", to_json(spec.params_x)}, {"params_y", to_json(spec.params_y)},
                  {"rho_z", a.rho}, {"horizon", a.horizon}};
    }
    Sink sink(a.common.out, out);
    if (a.common.format == "json") {
        json j{{"schema_version", kSchemaVersion}, {"command", "exceedance"}, {"seed", a.common.seed},
               {"n_reps", a.common.reps}, {"source", source}};
        j.update(to_json(curve));
        sink.get() << j.dump(2) << '\n';
    } else {
        sink.get() << csv_header("exceedance", a.common);
        write_exceedance_csv(sink.get(), curve);
    }
    return kExitOk;
}

struct MarketArgs {
    Common common;
    std::string config;
    std::size_t steps = 35;
    bool seed_given = false;
};

int cmd_marketsim(const MarketArgs& a, std::ostream& out) {
    std::ifstream in(a.config);
    if (!in) throw std::runtime_error("cannot open " + a.config);
    json cfg_json;
    try {
        cfg_json = json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("bad config JSON: ") + e.what());
    }
    auto cfg = market_config_from_json(cfg_json);
    if (a.seed_given) cfg.seed = a.common.seed;
    const auto log = market::run_session(cfg, a.steps);
    Sink sink(a.common.out, out);
    for (const auto& rec : log) {
        json j = to_json(rec);
        j["seed"] = cfg.seed;
        sink.get() << j.dump() << '\n';
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Modified Brownian motion returns model: fitting, simulation and market experiments", "mbmm"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit_cmd = app.add_subcommand("fit", "Calibrate (K, c) against a price history by chi-square");
    add_fit_args(fit_cmd, fit_args, 1);
    fit_cmd->add_option("--channel", fit_args.channel)->capture_default_str()->check(CLI::IsMember({"mean", "sigma"}));
    fit_cmd->add_option("--trace-csv", fit_args.trace_csv, "Write the grid trace (K,c,m,chi2) to this file");

    FitArgs diag_args;
    auto* diag_cmd = app.add_subcommand("diagnose2day", "Compare drift- and volatility-channel fits on aggregated data");
    add_fit_args(diag_cmd, diag_args, 2);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Simulate GBM/MBMM log-returns");
    add_common(sim_cmd, sim_args.common, "csv", 1);
    add_params(sim_cmd, sim_args.params);
    sim_cmd->add_option("--form", sim_args.form)->capture_default_str()->check(CLI::IsMember({"exponential", "arithmetic"}));
    sim_cmd->add_option("--steps", sim_args.steps)->capture_default_str()->check(CLI::PositiveNumber);
    sim_cmd->add_option("--p0", sim_args.p0, "Initial price")->capture_default_str();
    sim_cmd->add_flag("--as-prices", sim_args.as_prices, "Emit replication 0 as a date,close price file");

    HistplotArgs hist_args;
    auto* hist_cmd = app.add_subcommand("histplot", "Per-bin observed vs GBM/MBMM expected frequencies");
    add_common(hist_cmd, hist_args.common, "csv", 1000);
    hist_cmd->add_option("--input", hist_args.input)->required();
    hist_cmd->add_option("--report", hist_args.report, "Fit report JSON supplying K, c, m");
    hist_cmd->add_option("--window", hist_args.window)->capture_default_str()->check(CLI::PositiveNumber);
    hist_cmd->add_option("--bins", hist_args.bins)->capture_default_str();
    hist_cmd->add_option("--k", hist_args.K);
    hist_cmd->add_option("--c", hist_args.c)->capture_default_str();
    hist_cmd->add_option("--m", hist_args.m)->capture_default_str();
    hist_cmd->add_option("--channel", hist_args.channel)->capture_default_str()->check(CLI::IsMember({"mean", "sigma"}));
    hist_cmd->add_option("--tail", hist_args.tail, "Only bins beyond the modifier root")->check(CLI::IsMember({"left", "right"}));

    FplotArgs fplot_args;
    auto* fplot_cmd = app.add_subcommand("fplot", "Sample K*f(z) curves");
    add_common(fplot_cmd, fplot_args.common, "csv", 1);
    fplot_cmd->add_option("--c", fplot_args.c)->capture_default_str();
    fplot_cmd->add_option("--m", fplot_args.m)->capture_default_str();
    fplot_cmd->add_option("--k", fplot_args.Ks, "One or more K values")->delimiter(',');
    fplot_cmd->add_option("--z-min", fplot_args.z_min)->capture_default_str();
    fplot_cmd->add_option("--z-max", fplot_args.z_max)->capture_default_str();
    fplot_cmd->add_option("--points", fplot_args.points)->capture_default_str();

    ExceedanceArgs exc_args;
    auto* exc_cmd = app.add_subcommand("exceedance", "Empirical or simulated exceedance correlations");
    add_common(exc_cmd, exc_args.common, "csv", 1000);
    exc_cmd->add_option("--x-csv", exc_args.x_csv);
    exc_cmd->add_option("--y-csv", exc_args.y_csv);
    exc_cmd->add_option("--mu-x", exc_args.mu_x)->capture_default_str();
    exc_cmd->add_option("--sigma-x", exc_args.sigma_x)->capture_default_str();
    exc_cmd->add_option("--k-x", exc_args.k_x)->capture_default_str();
    exc_cmd->add_option("--c-x", exc_args.c_x)->capture_default_str();
    exc_cmd->add_option("--m-x", exc_args.m_x)->capture_default_str();
    exc_cmd->add_option("--mu-y", exc_args.mu_y)->capture_default_str();
    exc_cmd->add_option("--sigma-y", exc_args.sigma_y)->capture_default_str();
    exc_cmd->add_option("--k-y", exc_args.k_y)->capture_default_str();
    exc_cmd->add_option("--c-y", exc_args.c_y)->capture_default_str();
    exc_cmd->add_option("--m-y", exc_args.m_y)->capture_default_str();
    exc_cmd->add_option("--rho", exc_args.rho, "Correlation of the driving normals")->capture_default_str();
    exc_cmd->add_option("--horizon", exc_args.horizon)->capture_default_str();
    exc_cmd->add_option("--levels", exc_args.levels, "Comma-separated quantile levels")->capture_default_str();
    exc_cmd->add_option("--min-count", exc_args.min_count)->capture_default_str();

    MarketArgs mkt_args;
    auto* mkt_cmd = app.add_subcommand("marketsim", "Run the semi-closed market with scripted agents");
    add_common(mkt_cmd, mkt_args.common, "json", 1);
    mkt_cmd->add_option("--config", mkt_args.config, "Market config JSON")->required();
    mkt_cmd->add_option("--steps", mkt_args.steps)->capture_default_str();

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, er;
        const int code = app.exit(e, o, er);
        err << er.str() << o.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*fit_cmd) return cmd_fit(fit_args, out);
        if (*diag_cmd) return cmd_diagnose(diag_args, out);
        if (*sim_cmd) return cmd_simulate(sim_args, out);
        if (*hist_cmd) return cmd_histplot(hist_args, out);
        if (*fplot_cmd) return cmd_fplot(fplot_args, out);
        if (*exc_cmd) return cmd_exceedance(exc_args, out);
        if (*mkt_cmd) {
            mkt_args.seed_given = mkt_cmd->count("--seed") > 0;
            return cmd_marketsim(mkt_args, out);
        }
    } catch (const ParseError& e) {
        err << "mbmm: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "mbmm: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "mbmm: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace mbmm::cli
