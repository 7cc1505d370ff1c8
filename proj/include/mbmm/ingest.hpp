#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <istream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mbmm {

/// Malformed input file. `line()` is the 1-based physical line, 0 when the
/// problem is not tied to a single line.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what);
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

struct PriceObservation {
    std::chrono::year_month_day date;
    double close;
};

/// Closing prices with strictly increasing dates, all > 0, at least 2 rows.
class PriceSeries {
public:
    explicit PriceSeries(std::vector<PriceObservation> obs);

    const std::vector<PriceObservation>& observations() const noexcept { return obs_; }
    std::size_t size() const noexcept { return obs_.size(); }
    std::vector<double> closes() const;

private:
    std::vector<PriceObservation> obs_;
};

struct ReturnSeries {
    std::vector<double> returns;  // log-returns over base_dt periods
    double mu_hat = 0.0;          // daily mean log-return
    double sigma_hat = 0.0;       // daily sample std (n-1)
    int base_dt = 1;
};

/// Split one CSV record (RFC 4180 quoting, no embedded newlines).
std::vector<std::string> split_csv_record(const std::string& line, std::size_t line_no);

/// "YYYY-MM-DD"; throws ParseError on anything else.
std::chrono::year_month_day parse_iso_date(const std::string& s, std::size_t line_no);
std::string format_iso_date(std::chrono::year_month_day d);

PriceSeries read_price_csv(std::istream& in);
PriceSeries load_csv(const std::filesystem::path& path);

/// Log-returns over non-overlapping windows of `window` observations.
/// mu_hat and sigma_hat always come from the daily series.
ReturnSeries to_returns(const PriceSeries& prices, int window = 1, std::size_t min_returns = 10);
ReturnSeries to_returns(const std::vector<double>& closes, int window = 1, std::size_t min_returns = 10);

/// Wrap an already computed return sample (e.g. simulated data).
ReturnSeries make_return_series(std::vector<double> returns, int base_dt = 1);

}  // namespace mbmm
