#include "mbmm/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace mbmm {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

double parse_price(const std::string& field, std::size_t line_no) {
    const std::string s = trim(field);
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc{} || ptr != last)
        throw ParseError(line_no, "line " + std::to_string(line_no) + ": cannot parse close '" + s + "'");
    if (!std::isfinite(v) || v <= 0.0)
        throw ParseError(line_no, "line " + std::to_string(line_no) + ": close must be a positive number, got '" + s + "'");
    return v;
}

}  // namespace

ParseError::ParseError(std::size_t line, const std::string& what) : std::runtime_error(what), line_(line) {}

PriceSeries::PriceSeries(std::vector<PriceObservation> obs) : obs_(std::move(obs)) {
    if (obs_.size() < 2) throw std::invalid_argument("price series needs at least 2 observations");
    for (std::size_t i = 0; i < obs_.size(); ++i) {
        if (!(obs_[i].close > 0.0) || !std::isfinite(obs_[i].close))
            throw std::invalid_argument("price series: non-positive price at index " + std::to_string(i));
        if (i > 0 && !(obs_[i - 1].date < obs_[i].date))
            throw std::invalid_argument("price series: dates must be strictly increasing");
    }
}

std::vector<double> PriceSeries::closes() const {
    std::vector<double> out;
    out.reserve(obs_.size());
    for (const auto& o : obs_) out.push_back(o.close);
    return out;
}

std::vector<std::string> split_csv_record(const std::string& line, std::size_t line_no) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(ch);
            }
        } else if (ch == '"') {
            if (!trim(cur).empty() || was_quoted)
                throw ParseError(line_no, "line " + std::to_string(line_no) + ": stray quote");
            cur.clear();
            quoted = true;
            was_quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else if (ch == '\r' && i + 1 == line.size()) {
            // CRLF line ending
        } else {
            if (was_quoted && ch != ' ' && ch != '\t')
                throw ParseError(line_no, "line " + std::to_string(line_no) + ": text after closing quote");
            cur.push_back(ch);
        }
    }
    if (quoted) throw ParseError(line_no, "line " + std::to_string(line_no) + ": unterminated quote");
    fields.push_back(std::move(cur));
    return fields;
}

std::chrono::year_month_day parse_iso_date(const std::string& field, std::size_t line_no) {
    const std::string s = trim(field);
    int y = 0;
    unsigned mo = 0, d = 0;
    char tail = 0;
    if (s.size() != 10 || s[4] != '-' || s[7] != '-' ||
        std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &mo, &d, &tail) != 3)
        throw ParseError(line_no, "line " + std::to_string(line_no) + ": bad ISO-8601 date '" + s + "'");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{mo}, std::chrono::day{d}};
    if (!ymd.ok()) throw ParseError(line_no, "line " + std::to_string(line_no) + ": invalid calendar date '" + s + "'");
    return ymd;
}

std::string format_iso_date(std::chrono::year_month_day d) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    return buf;
}

PriceSeries read_price_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t date_col = 0, close_col = 0, n_cols = 0;
    bool have_header = false;
    std::vector<std::pair<PriceObservation, std::size_t>> rows;

    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto fields = split_csv_record(line, line_no);
        if (!have_header) {
            bool found_date = false, found_close = false;
            for (std::size_t i = 0; i < fields.size(); ++i) {
                const auto name = lower(trim(fields[i]));
                if (name == "date" && !found_date) {
                    date_col = i;
                    found_date = true;
                } else if (name == "close" && !found_close) {
                    close_col = i;
                    found_close = true;
                }
            }
            if (!found_date || !found_close)
                throw ParseError(line_no, "line " + std::to_string(line_no) + ": header must name 'date' and 'close' columns");
            n_cols = fields.size();
            have_header = true;
            continue;
        }
        if (fields.size() != n_cols)
            throw ParseError(line_no, "line " + std::to_string(line_no) + ": expected " + std::to_string(n_cols) +
                                          " fields, got " + std::to_string(fields.size()));
        rows.push_back({{parse_iso_date(fields[date_col], line_no), parse_price(fields[close_col], line_no)}, line_no});
    }
    if (!have_header) throw ParseError(0, "empty CSV: missing 'date,close' header");
    if (rows.size() < 2) throw ParseError(0, "CSV has fewer than 2 price rows");

    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first.date < b.first.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].first.date == rows[i - 1].first.date) {
            const std::size_t l = std::max(rows[i].second, rows[i - 1].second);
            throw ParseError(l, "line " + std::to_string(l) + ": duplicate date " + format_iso_date(rows[i].first.date) +
                                    " (also on line " + std::to_string(std::min(rows[i].second, rows[i - 1].second)) + ")");
        }
    }
    std::vector<PriceObservation> obs;
    obs.reserve(rows.size());
    for (auto& r : rows) obs.push_back(r.first);
    return PriceSeries(std::move(obs));
}

PriceSeries load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return read_price_csv(in);
}

namespace {

void estimate_daily(const std::vector<double>& daily, ReturnSeries& out) {
    const double n = static_cast<double>(daily.size());
    out.mu_hat = std::accumulate(daily.begin(), daily.end(), 0.0) / n;
    if (daily.size() < 2) {
        out.sigma_hat = 0.0;
        return;
    }
    double ss = 0.0;
    for (double r : daily) ss += (r - out.mu_hat) * (r - out.mu_hat);
    out.sigma_hat = std::sqrt(ss / (n - 1.0));
}

}  // namespace

ReturnSeries to_returns(const std::vector<double>& closes, int window, std::size_t min_returns) {
    if (window < 1) throw std::invalid_argument("to_returns: window must be >= 1");
    if (closes.size() < 2) throw std::invalid_argument("to_returns: need at least 2 prices");
    const auto w = static_cast<std::size_t>(window);
    const std::size_t n_out = (closes.size() - 1) / w;
    if (n_out < std::max<std::size_t>(min_returns, 1))
        throw std::invalid_argument("to_returns: series too short: " + std::to_string(n_out) + " returns at window " +
                                    std::to_string(window) + ", need " + std::to_string(std::max<std::size_t>(min_returns, 1)));

    std::vector<double> daily(closes.size() - 1);
    for (std::size_t i = 0; i + 1 < closes.size(); ++i) daily[i] = std::log(closes[i + 1] / closes[i]);

    ReturnSeries out;
    out.base_dt = window;
    estimate_daily(daily, out);
    if (w == 1) {
        out.returns = std::move(daily);
        return out;
    }
    out.returns.resize(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < w; ++j) s += daily[i * w + j];
        out.returns[i] = s;
    }
    return out;
}

ReturnSeries to_returns(const PriceSeries& prices, int window, std::size_t min_returns) {
    return to_returns(prices.closes(), window, min_returns);
}

ReturnSeries make_return_series(std::vector<double> returns, int base_dt) {
    if (returns.empty()) throw std::invalid_argument("make_return_series: empty sample");
    if (base_dt < 1) throw std::invalid_argument("make_return_series: base_dt must be >= 1");
    ReturnSeries out;
    out.base_dt = base_dt;
    // Per-period sample moments rescaled to one base period.
    ReturnSeries tmp;
    estimate_daily(returns, tmp);
    out.mu_hat = tmp.mu_hat / base_dt;
    out.sigma_hat = tmp.sigma_hat / std::sqrt(static_cast<double>(base_dt));
    out.returns = std::move(returns);
    return out;
}

}  // namespace mbmm
