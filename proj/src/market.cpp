#include "mbmm/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mbmm::market {

namespace {

constexpr double kMinMultiplier = 1e-6;

// Largest-remainder apportionment of `target` units in proportion to `orders`
// (whose sum is `total` > target).
std::vector<std::int64_t> ration(std::span<const std::int64_t> orders, std::int64_t total, std::int64_t target) {
    std::vector<std::int64_t> fills(orders.size());
    std::vector<std::pair<std::int64_t, std::size_t>> rem;
    rem.reserve(orders.size());
    std::int64_t assigned = 0;
    for (std::size_t j = 0; j < orders.size(); ++j) {
        const __int128 num = static_cast<__int128>(orders[j]) * target;
        fills[j] = static_cast<std::int64_t>(num / total);
        rem.emplace_back(static_cast<std::int64_t>(num % total), j);
        assigned += fills[j];
    }
    std::stable_sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::int64_t k = 0; k < target - assigned; ++k) ++fills[rem[static_cast<std::size_t>(k)].second];
    return fills;
}

}  // namespace

void AgentSpec::validate() const {
    if (!std::isfinite(slope)) throw std::invalid_argument("agent: slope must be finite");
    if (!(threshold >= 0.0)) throw std::invalid_argument("agent: threshold must be >= 0");
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw std::invalid_argument("agent: scale must be finite and >= 0");
}

void MarketConfig::validate() const {
    if (sectors < 1) throw std::invalid_argument("market: sectors must be >= 1");
    if (!(sigma_md >= 0.0)) throw std::invalid_argument("market: sigma_md must be >= 0");
    if (!std::isfinite(mu_m)) throw std::invalid_argument("market: mu_m must be finite");
    if (!initial_prices.empty() && initial_prices.size() != sectors)
        throw std::invalid_argument("market: initial_prices must list one price per sector");
    for (double p : initial_prices)
        if (!(p > 0.0)) throw std::invalid_argument("market: prices must be > 0");
    if (initial_shares < 0) throw std::invalid_argument("market: initial_shares must be >= 0");
    if (!(initial_cash >= 0.0)) throw std::invalid_argument("market: initial_cash must be >= 0");
    for (const auto& a : agents) a.validate();
}

double MarketConfig::initial_price(std::size_t sector) const {
    return initial_prices.empty() ? 100.0 : initial_prices.at(sector);
}

Allocation allocate(std::span<const std::int64_t> demands, std::span<const std::int64_t> supplies) {
    for (auto d : demands)
        if (d < 0) throw std::invalid_argument("allocate: negative demand");
    for (auto s : supplies)
        if (s < 0) throw std::invalid_argument("allocate: negative supply");
    const std::int64_t D = std::accumulate(demands.begin(), demands.end(), std::int64_t{0});
    const std::int64_t S = std::accumulate(supplies.begin(), supplies.end(), std::int64_t{0});
    Allocation out;
    if (D > S) {
        out.demand_fills = ration(demands, D, S);
        out.supply_fills.assign(supplies.begin(), supplies.end());
    } else if (S > D) {
        out.demand_fills.assign(demands.begin(), demands.end());
        out.supply_fills = ration(supplies, S, D);
    } else {
        out.demand_fills.assign(demands.begin(), demands.end());
        out.supply_fills.assign(supplies.begin(), supplies.end());
    }
    return out;
}

PriceUpdate price_update(const SectorFlow& f, double mu_m, double sigma_md, double z) {
    if (!(f.price > 0.0)) throw std::invalid_argument("price_update: price must be > 0");
    PriceUpdate out;
    double level = 0.0;
    double change = 0.0;
    if (f.average > 0.0) {
        level = f.net_demand / f.average;
        change = (f.net_demand - f.prev_net_demand) / ((f.average + f.prev_average) / 2.0);
    } else {
        out.zero_activity = true;
    }
    double mult = 1.0 + mu_m * (1.0 + level) + sigma_md * (z + change);
    if (!(mult > 0.0)) {
        mult = kMinMultiplier;
        out.floored = true;
    }
    out.price = f.price * mult;
    return out;
}

namespace {

std::int64_t desired_order(const AgentSpec& a, double z, NormalStream& own) {
    double q = 0.0;
    switch (a.archetype) {
        case Archetype::ConcordantLinear:
            q = a.scale * a.slope * z;
            break;
        case Archetype::Bubble:
            q = z > a.threshold ? a.scale * z : 0.0;
            break;
        case Archetype::Burst:
            q = z < -a.threshold ? a.scale * z : 0.0;
            break;
        case Archetype::Random:
            q = a.scale * own();
            break;
    }
    return static_cast<std::int64_t>(std::llround(q));
}

}  // namespace

std::vector<StepRecord> run_session(const MarketConfig& config, std::size_t n_steps) {
    config.validate();
    const std::size_t n_sec = config.sectors;
    const std::size_t n_ag = config.agents.size();

    std::vector<double> prices(n_sec);
    for (std::size_t i = 0; i < n_sec; ++i) prices[i] = config.initial_price(i);
    std::vector<std::vector<std::int64_t>> holdings(n_ag, std::vector<std::int64_t>(n_sec, config.initial_shares));
    std::vector<double> cash(n_ag, config.initial_cash);
    std::vector<double> prev_net(n_sec, 0.0), prev_avg(n_sec, 0.0);

    // Stream 0 is the news; agent j draws from stream j + 1.
    NormalStream news(config.seed, 0);
    std::vector<NormalStream> own;
    own.reserve(n_ag);
    for (std::size_t j = 0; j < n_ag; ++j) own.emplace_back(config.seed, j + 1);

    std::vector<StepRecord> log;
    log.reserve(n_steps);
    for (std::size_t t = 0; t < n_steps; ++t) {
        StepRecord rec;
        rec.step = t;
        rec.z = news();
        rec.prices = prices;

        // Orders are placed knowing (netD_{t-1}, Z_t) and current prices.
        std::vector<std::vector<std::int64_t>> buy(n_ag, std::vector<std::int64_t>(n_sec, 0));
        std::vector<std::vector<std::int64_t>> sell(n_ag, std::vector<std::int64_t>(n_sec, 0));
        for (std::size_t j = 0; j < n_ag; ++j) {
            for (std::size_t i = 0; i < n_sec; ++i) {
                const std::int64_t q = desired_order(config.agents[j], rec.z, own[j]);
                if (q > 0) {
                    buy[j][i] = q;
                } else if (q < 0) {
                    sell[j][i] = std::min(-q, holdings[j][i]);
                    if (sell[j][i] < -q)
                        rec.flags.push_back("agent " + std::to_string(j) + " sector " + std::to_string(i) + ": sell clipped to holdings");
                }
            }
            double cost = 0.0;
            for (std::size_t i = 0; i < n_sec; ++i) cost += static_cast<double>(buy[j][i]) * prices[i];
            if (cost > cash[j]) {
                const double ratio = cash[j] / cost;
                for (std::size_t i = 0; i < n_sec; ++i)
                    buy[j][i] = static_cast<std::int64_t>(std::floor(static_cast<double>(buy[j][i]) * ratio));
                rec.flags.push_back("agent " + std::to_string(j) + ": buys scaled to available cash");
            }
        }

        rec.demand.assign(n_sec, 0);
        rec.supply.assign(n_sec, 0);
        rec.net_demand.assign(n_sec, 0);
        rec.fills.assign(n_ag, std::vector<std::int64_t>(n_sec, 0));
        std::vector<double> cash_delta(n_ag, 0.0);
        for (std::size_t i = 0; i < n_sec; ++i) {
            std::vector<std::int64_t> d(n_ag), s(n_ag);
            for (std::size_t j = 0; j < n_ag; ++j) {
                d[j] = buy[j][i];
                s[j] = sell[j][i];
            }
            const Allocation alloc = allocate(d, s);
            for (std::size_t j = 0; j < n_ag; ++j) {
                const std::int64_t net = alloc.demand_fills[j] - alloc.supply_fills[j];
                rec.fills[j][i] = net;
                holdings[j][i] += net;
                cash_delta[j] -= static_cast<double>(net) * prices[i];
                rec.demand[i] += d[j];
                rec.supply[i] += s[j];
            }
            rec.net_demand[i] = rec.demand[i] - rec.supply[i];
        }
        for (std::size_t j = 0; j < n_ag; ++j) cash[j] += cash_delta[j];

        rec.next_prices.resize(n_sec);
        for (std::size_t i = 0; i < n_sec; ++i) {
            SectorFlow f;
            f.price = prices[i];
            f.net_demand = static_cast<double>(rec.net_demand[i]);
            f.average = static_cast<double>(rec.demand[i] + rec.supply[i]) / 2.0;
            f.prev_net_demand = prev_net[i];
            f.prev_average = prev_avg[i];
            const PriceUpdate u = price_update(f, config.mu_m, config.sigma_md, rec.z);
            if (u.zero_activity) rec.flags.push_back("sector " + std::to_string(i) + ": zero activity");
            if (u.floored) rec.flags.push_back("sector " + std::to_string(i) + ": price multiplier floored");
            rec.next_prices[i] = u.price;
            prev_net[i] = f.net_demand;
            prev_avg[i] = f.average;
        }
        prices = rec.next_prices;
        rec.holdings = holdings;
        rec.cash = cash;
        log.push_back(std::move(rec));
    }
    return log;
}

Archetype parse_archetype(const std::string& name) {
    if (name == "concordant_linear" || name == "concordant") return Archetype::ConcordantLinear;
    if (name == "bubble") return Archetype::Bubble;
    if (name == "burst") return Archetype::Burst;
    if (name == "random") return Archetype::Random;
    throw std::invalid_argument("unknown agent archetype '" + name + "'");
}

std::string to_string(Archetype a) {
    switch (a) {
        case Archetype::ConcordantLinear: return "concordant_linear";
        case Archetype::Bubble: return "bubble";
        case Archetype::Burst: return "burst";
        case Archetype::Random: return "random";
    }
    return "random";
}

}  // namespace mbmm::market
