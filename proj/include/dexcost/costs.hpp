#pragma once

// Per-swap cost breakdown in USD and bps, size-bucket aggregation, and
// latency / fill-rate statistics.

#include "dexcost/chain.hpp"
#include "dexcost/slippage.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dexcost {

// USD for gas_used units at gas_price_wei, with 1 ETH = 1e18 wei.
double gas_cost_usd(double gas_used, double gas_price_wei, double eth_usd);

// Which pool token is ETH and which is the USD stable; -1 when neither.
struct PairInfo {
    std::string name = "ETH<>USDC";
    int eth_token = 0;
    int stable_token = 1;
};

// USD value of one unit of `token` (0 or 1). Uses eth_usd for the ETH side, 1
// for the stable side, and the pool spot price (token1 per token0) to carry
// either across. Throws MissingField when neither route is available.
double token_usd(const PairInfo& pair, int token, std::optional<double> eth_usd, const Real& spot_price);

struct CostBreakdown {
    TxId swap;
    std::string pair;
    double order_size_usd = 0;
    double gas_usd = 0;
    double lp_fee_usd = 0;
    double price_impact_usd = 0;
    double slippage_usd = 0;  // positive slippage (price improvement) is a negative cost
    double total_usd = 0;

    double bps(double usd) const { return usd / order_size_usd * 1e4; }
};

// Order size is the quote's input amount at `input_token_usd`.
CostBreakdown breakdown(const SwapTx& swap, const SlippageDecomposition& decomposition, std::optional<double> eth_usd,
                        double input_token_usd, const std::string& pair = "ETH<>USDC");

enum class Bucket { all, large, medium, small };
const char* to_string(Bucket bucket);

struct BucketThresholds {
    double small_below = 1'000;     // small: size < small_below
    double large_above = 100'000;   // large: size > large_above; medium is the closed range between
};

Bucket size_bucket(double order_size_usd, const BucketThresholds& thresholds = {});

enum class CostItem { gas, slippage, lp_fee, price_impact, total };
inline constexpr std::array<CostItem, 5> kCostItems{CostItem::gas, CostItem::slippage, CostItem::lp_fee,
                                                    CostItem::price_impact, CostItem::total};
const char* to_string(CostItem item);
double item_usd(const CostBreakdown& b, CostItem item);

struct BucketRow {
    std::string pair;
    Bucket bucket = Bucket::all;
    std::size_t count = 0;
    double volume_usd = 0;
    std::array<double, 5> mean_usd{};  // per swap, indexed like kCostItems
    std::array<double, 5> bps{};       // item total over volume
};

// Rows ordered by pair name, then all/large/medium/small. Sums are exact
// rationals, so the table does not depend on input order.
std::vector<BucketRow> bucket_aggregate(std::span<const CostBreakdown> breakdowns, const BucketThresholds& thresholds = {});

// Table cell such as "$40.7 (22bps)".
std::string format_cell(double mean_usd, double bps);

struct LatencyObservation {
    double seconds = 0;
    bool failed = false;
};

inline constexpr std::array<double, 7> kLatencyPercentiles{50, 80, 90, 95, 97, 99, 99.5};

struct LatencyStats {
    std::size_t count = 0;
    std::size_t failed = 0;
    double fail_rate = 0;
    std::array<double, 7> percentiles{};  // nearest rank, indexed like kLatencyPercentiles
};

// Nearest-rank percentile of unsorted data: the ceil(p/100 * n)-th smallest value.
double nearest_rank(std::span<const double> values, double percentile);

LatencyStats latency_fill_stats(std::span<const LatencyObservation> observations);

}  // namespace dexcost
