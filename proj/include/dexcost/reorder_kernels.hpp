#pragma once

// Expected hypothetical price of one trade over uniformly random orderings of
// the items in its block. Each kernel has a serial and an OpenMP form; both
// accumulate in the same fixed order, so their results are bit-identical.

#include "dexcost/amm.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

namespace dexcost {

// Trades replay as exact-in with their realized input.
struct ReplayTrade {
    Direction direction = Direction::zero_for_one;
    Real amount_in;
};

struct ReplayLiquidity {
    LiquidityAction action = LiquidityAction::mint;
    int lower_tick = 0;
    int upper_tick = 0;
    Real liquidity;
};

using ReplayItem = std::variant<ReplayTrade, ReplayLiquidity>;

struct PricePoint {
    Real price;
    bool saturated = false;
};

enum class Execution { serial, parallel };

// Applies an item unconditionally. A burn that the pool cannot honour in this
// ordering (its mint has not happened yet) is skipped.
void apply_item(PoolState& pool, const ReplayItem& item);

PricePoint price_of(const PoolState& pool, const ReplayTrade& trade);

// Price of items[target] after executing items[0..target) from `initial`.
PricePoint price_in_sequence(const PoolState& initial, std::span<const ReplayItem> items, std::size_t target);

struct ExpectedPrice {
    Real mean;
    double std_error = 0;       // standard error of the mean; 0 for exact enumeration
    double price_stddev = 0;    // sample standard deviation of the hypothetical prices
    std::size_t orderings = 0;  // permutations enumerated or sampled
    bool saturated = false;
};

// Exact expectation over all n! orderings. Walks ordered prefixes of the
// other items, so the cost is sum_k (n-1)!/(n-1-k)! pool steps instead of n * n!.
ExpectedPrice expected_price_exact(const PoolState& initial, std::span<const ReplayItem> items,
                                   std::size_t target, Execution execution = Execution::parallel);

// Monte-Carlo expectation over `n_samples` orderings drawn from `stream_seed`.
ExpectedPrice expected_price_sampled(const PoolState& initial, std::span<const ReplayItem> items,
                                     std::size_t target, std::size_t n_samples, std::uint64_t stream_seed,
                                     Execution execution = Execution::parallel);

// Seed for one (run seed, block, trade) stream; independent of evaluation order.
std::uint64_t stream_seed(std::uint64_t seed, std::int64_t block_height, std::size_t trade_index);

// Uniform permutations of {0..n_items-1} from a seeded mt19937_64, using
// Fisher-Yates with rejection sampling so the stream is platform independent.
std::vector<std::vector<std::uint32_t>> draw_permutations(std::size_t n_items, std::size_t n_samples,
                                                          std::uint64_t stream_seed);

}  // namespace dexcost
