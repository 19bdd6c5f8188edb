#include "dexcost/costs.hpp"

#include "dexcost/errors.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

namespace dexcost {

namespace {

using Rational = mp::cpp_rational;

// Conversion from a finite double is exact.
Rational exact(double v) { return Rational(v); }

struct Accumulator {
    std::size_t count = 0;
    Rational volume;
    std::array<Rational, 5> items;

    void add(const CostBreakdown& b) {
        ++count;
        volume += exact(b.order_size_usd);
        for (std::size_t i = 0; i < kCostItems.size(); ++i) items[i] += exact(item_usd(b, kCostItems[i]));
    }
};

}  // namespace

double gas_cost_usd(double gas_used, double gas_price_wei, double eth_usd) {
    if (gas_used < 0 || gas_price_wei < 0 || eth_usd < 0) {
        throw InvalidArgument("gas cost inputs must be nonnegative");
    }
    return gas_used * gas_price_wei * 1e-18 * eth_usd;
}

double token_usd(const PairInfo& pair, int token, std::optional<double> eth_usd, const Real& spot_price) {
    if (token != 0 && token != 1) {
        throw InvalidArgument("token must be 0 or 1");
    }
    auto direct = [&](int t) -> std::optional<double> {
        if (t == pair.stable_token) return 1.0;
        if (t == pair.eth_token) {
            if (!eth_usd) throw MissingField("ETH/USD price missing for pair " + pair.name);
            return *eth_usd;
        }
        return std::nullopt;
    };
    if (auto v = direct(token)) return *v;
    const int other = 1 - token;
    const auto other_usd = direct(other);
    if (!other_usd) {
        throw MissingField("pair " + pair.name + " has neither an ETH nor a stable token");
    }
    // Spot is token1 per token0.
    const double spot = to_double(spot_price);
    return token == 0 ? *other_usd * spot : *other_usd / spot;
}

CostBreakdown breakdown(const SwapTx& swap, const SlippageDecomposition& decomposition, std::optional<double> eth_usd,
                        double input_token_usd, const std::string& pair) {
    if (!swap.quote) {
        throw MissingField("swap " + swap.tx_hash + " has no quote");
    }
    if (!eth_usd) {
        throw MissingField("swap " + swap.tx_hash + " has no ETH/USD price");
    }
    CostBreakdown b;
    b.swap = swap.id();
    b.pair = pair;
    b.order_size_usd = to_double(swap.quote->quoted_amount_in) * input_token_usd;
    b.gas_usd = gas_cost_usd(static_cast<double>(swap.gas_used), swap.gas_price_wei, *eth_usd);
    b.lp_fee_usd = b.order_size_usd * swap.quote->lp_fee_bps / 1e4;
    b.price_impact_usd = b.order_size_usd * swap.quote->price_impact_bps / 1e4;
    b.slippage_usd = -decomposition.total_bps * b.order_size_usd / 1e4;
    b.total_usd = b.gas_usd + b.lp_fee_usd + b.price_impact_usd + b.slippage_usd;
    return b;
}

const char* to_string(Bucket bucket) {
    switch (bucket) {
        case Bucket::all: return "All";
        case Bucket::large: return "Large";
        case Bucket::medium: return "Medium";
        case Bucket::small: return "Small";
    }
    return "?";
}

Bucket size_bucket(double order_size_usd, const BucketThresholds& thresholds) {
    if (order_size_usd > thresholds.large_above) return Bucket::large;
    if (order_size_usd < thresholds.small_below) return Bucket::small;
    return Bucket::medium;
}

const char* to_string(CostItem item) {
    switch (item) {
        case CostItem::gas: return "gas";
        case CostItem::slippage: return "slippage";
        case CostItem::lp_fee: return "lp_fee";
        case CostItem::price_impact: return "price_impact";
        case CostItem::total: return "total";
    }
    return "?";
}

double item_usd(const CostBreakdown& b, CostItem item) {
    switch (item) {
        case CostItem::gas: return b.gas_usd;
        case CostItem::slippage: return b.slippage_usd;
        case CostItem::lp_fee: return b.lp_fee_usd;
        case CostItem::price_impact: return b.price_impact_usd;
        case CostItem::total: return b.total_usd;
    }
    return 0;
}

std::vector<BucketRow> bucket_aggregate(std::span<const CostBreakdown> breakdowns, const BucketThresholds& thresholds) {
    if (breakdowns.empty()) {
        throw EmptyInput("no cost breakdowns to aggregate");
    }
    constexpr std::array<Bucket, 4> order{Bucket::all, Bucket::large, Bucket::medium, Bucket::small};
    std::map<std::string, std::array<Accumulator, 4>> acc;
    for (const CostBreakdown& b : breakdowns) {
        auto& row = acc[b.pair];
        row[0].add(b);
        const Bucket k = size_bucket(b.order_size_usd, thresholds);
        row[static_cast<std::size_t>(std::find(order.begin(), order.end(), k) - order.begin())].add(b);
    }
    std::vector<BucketRow> rows;
    for (const auto& [pair, buckets] : acc) {
        for (std::size_t k = 0; k < order.size(); ++k) {
            const Accumulator& a = buckets[k];
            BucketRow row;
            row.pair = pair;
            row.bucket = order[k];
            row.count = a.count;
            row.volume_usd = a.volume.convert_to<double>();
            for (std::size_t i = 0; i < kCostItems.size(); ++i) {
                if (a.count > 0) row.mean_usd[i] = Rational(a.items[i] / a.count).convert_to<double>();
                if (a.volume != 0) row.bps[i] = Rational(a.items[i] * 10000 / a.volume).convert_to<double>();
            }
            rows.push_back(row);
        }
    }
    return rows;
}

std::string format_cell(double mean_usd, double bps) {
    char usd[64];
    std::snprintf(usd, sizeof usd, "%.1f", std::abs(mean_usd));
    char b[64];
    if (std::abs(bps) >= 10) {
        std::snprintf(b, sizeof b, "%.0f", bps);
    } else {
        std::snprintf(b, sizeof b, "%.1f", bps);
        std::string s = b;
        if (s.ends_with(".0")) s.resize(s.size() - 2);
        if (s == "-0") s = "0";
        std::snprintf(b, sizeof b, "%s", s.c_str());
    }
    const bool negative = mean_usd < 0 && std::string(usd).find_first_not_of("0.") != std::string::npos;
    return std::string(negative ? "-$" : "$") + usd + " (" + b + "bps)";
}

double nearest_rank(std::span<const double> values, double percentile) {
    if (values.empty()) {
        throw EmptyInput("percentile of an empty sample");
    }
    if (!(percentile > 0) || percentile > 100) {
        throw InvalidArgument("percentile must lie in (0, 100]");
    }
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    // Percentiles are given to 0.1; work in integer tenths to keep the rank exact.
    const auto tenths = static_cast<long long>(std::llround(percentile * 10));
    const auto n = static_cast<long long>(sorted.size());
    long long rank = (tenths * n + 999) / 1000;
    rank = std::clamp(rank, 1LL, n);
    return sorted[static_cast<std::size_t>(rank - 1)];
}

LatencyStats latency_fill_stats(std::span<const LatencyObservation> observations) {
    if (observations.empty()) {
        throw EmptyInput("no swaps for latency statistics");
    }
    LatencyStats stats;
    std::vector<double> seconds;
    seconds.reserve(observations.size());
    for (const LatencyObservation& o : observations) {
        seconds.push_back(o.seconds);
        if (o.failed) ++stats.failed;
    }
    stats.count = observations.size();
    stats.fail_rate = static_cast<double>(stats.failed) / static_cast<double>(stats.count);
    for (std::size_t i = 0; i < kLatencyPercentiles.size(); ++i) {
        stats.percentiles[i] = nearest_rank(seconds, kLatencyPercentiles[i]);
    }
    return stats;
}

}  // namespace dexcost
