#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mbmm/calibrate.hpp"
#include "mbmm/exceedance.hpp"
#include "mbmm/market.hpp"

namespace mbmm {

inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// Non-finite values become null.
nlohmann::json number_or_null(double v);

std::string to_string(Channel c);
std::string to_string(StepForm f);
Channel parse_channel(const std::string& s);
StepForm parse_form(const std::string& s);

nlohmann::json to_json(const ModelParams& p);
nlohmann::json to_json(const ChiSquareReport& r);
nlohmann::json to_json(const CustomHistogram& h);
nlohmann::json to_json(const GridRange& r);
nlohmann::json to_json(const GridSpec& g);
/// Flat fields (statistic, df, p_value, n_bins, kurtosis_observed,
/// kurtosis_model) plus the nested detail.
nlohmann::json to_json(const FitReport& r);
nlohmann::json to_json(const ExceedanceCurve& c);
nlohmann::json to_json(const market::StepRecord& r);

/// Reads best_params from a fit report produced by to_json(FitReport).
ModelParams params_from_report(const nlohmann::json& j);

market::MarketConfig market_config_from_json(const nlohmann::json& j);

void write_grid_trace_csv(std::ostream& os, const std::vector<GridPoint>& trace);
void write_exceedance_csv(std::ostream& os, const ExceedanceCurve& c);

}  // namespace mbmm
