#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mbmm/rng.hpp"

namespace mbmm::market {

enum class Archetype { ConcordantLinear, Bubble, Burst, Random };

struct AgentSpec {
    Archetype archetype = Archetype::Random;
    double slope = 1.0;      // ConcordantLinear only
    double threshold = 0.0;  // Bubble / Burst only
    double scale = 10.0;     // order size per unit of news

    void validate() const;
};

struct MarketConfig {
    std::size_t sectors = 4;
    std::vector<std::string> sector_names{"Banking", "IT/Telecommunication", "Retailing", "Industrial"};
    double mu_m = 0.0;      // growth rate fed into the market per step
    double sigma_md = 0.0;  // volatility transmission (sqrt(dt) and coefficient folded in)
    std::vector<double> initial_prices;  // one per sector; defaults to 100
    std::vector<AgentSpec> agents;
    std::int64_t initial_shares = 1000;  // per sector per agent
    double initial_cash = 20000.0;
    std::uint64_t seed = kDefaultSeed;

    void validate() const;
    double initial_price(std::size_t sector) const;
};

/// Filled quantities after pro-rata rationing of the long side.
struct Allocation {
    std::vector<std::int64_t> demand_fills;
    std::vector<std::int64_t> supply_fills;
};

/// Match aggregate demand D and supply S: the short side fills fully, the
/// long side gets d_j / max(D,S) * min(D,S), rounded by largest remainder so
/// both sides total exactly min(D, S).
Allocation allocate(std::span<const std::int64_t> demands, std::span<const std::int64_t> supplies);

/// Per-sector inputs of the pricing rule.
struct SectorFlow {
    double price = 0.0;
    double net_demand = 0.0;       // D - S at t
    double average = 0.0;          // (D + S) / 2 at t
    double prev_net_demand = 0.0;  // at t-1
    double prev_average = 0.0;     // at t-1
};

struct PriceUpdate {
    double price = 0.0;
    bool zero_activity = false;  // A_t = 0, demand terms set to 0
    bool floored = false;        // multiplier <= 0, floored
};

/// P_{t+1} = P_t (1 + mu_m (1 + netD/A) + sigma_md (Z + dNetD / ((A_t + A_{t-1}) / 2))).
PriceUpdate price_update(const SectorFlow& flow, double mu_m, double sigma_md, double z);

struct StepRecord {
    std::size_t step = 0;
    double z = 0.0;
    std::vector<double> prices;       // at which trades settled
    std::vector<double> next_prices;  // after the pricing rule
    std::vector<std::int64_t> demand;
    std::vector<std::int64_t> supply;
    std::vector<std::int64_t> net_demand;
    // fills[agent][sector]: signed, positive = bought
    std::vector<std::vector<std::int64_t>> fills;
    std::vector<std::vector<std::int64_t>> holdings;
    std::vector<double> cash;
    std::vector<std::string> flags;
};

/// Sequential session: news Z_t, scripted orders, allocation, settlement at
/// the pre-update price, then the pricing rule.
std::vector<StepRecord> run_session(const MarketConfig& config, std::size_t n_steps);

Archetype parse_archetype(const std::string& name);
std::string to_string(Archetype a);

}  // namespace mbmm::market
