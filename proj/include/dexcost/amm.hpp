#pragma once

// Concentrated-liquidity pool engine.
//
// Prices are quoted as P = token1 / token0 and the pool stores sqrt(P).
// Inside one initialized tick range the pool behaves like a constant-product
// pool with virtual reserves x = L / sqrt(P), y = L * sqrt(P):
//   selling token0:  1/sqrt(P') = 1/sqrt(P) + dx / L,   dy = L * (sqrt(P) - sqrt(P'))
//   selling token1:  sqrt(P')   = sqrt(P)   + dy / L,   dx = L * (1/sqrt(P) - 1/sqrt(P'))
// The LP fee is taken from the input before the curve math.

#include "dexcost/numeric.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

namespace dexcost {

inline constexpr int kMinTick = -887272;
inline constexpr int kMaxTick = 887272;
inline constexpr int kMaxFeeBps = 10000;

enum class Direction { zero_for_one, one_for_zero };
enum class TradeKind { exact_in, exact_out };
enum class LiquidityAction { mint, burn };

inline Direction opposite(Direction d) {
    return d == Direction::zero_for_one ? Direction::one_for_zero : Direction::zero_for_one;
}

// sqrt(1.0001^tick)
Real sqrt_price_at_tick(int tick);
// Largest tick t with sqrt_price_at_tick(t) <= sqrt_price, clamped to the tick domain.
int tick_at_sqrt_price(const Real& sqrt_price);

inline int default_tick_spacing(int fee_bps) {
    switch (fee_bps) {
        case 1: return 1;
        case 5: return 10;
        case 30: return 60;
        case 100: return 200;
        default: return 1;
    }
}

// Widest spacing-aligned range inside the tick domain.
inline std::pair<int, int> full_range_ticks(int tick_spacing) {
    return {-(-kMinTick / tick_spacing) * tick_spacing, (kMaxTick / tick_spacing) * tick_spacing};
}

struct TickInfo {
    Real liquidity_net;
    Real sqrt_price;  // cached sqrt_price_at_tick(index)
    bool operator==(const TickInfo&) const = default;
};

struct Position {
    int lower_tick = 0;
    int upper_tick = 0;
    Real liquidity;
};

struct PoolState {
    int fee_bps = 0;
    int tick_spacing = 1;
    Real sqrt_price = 1;
    Real active_liquidity = 0;
    std::map<int, TickInfo> tick_table;
    // Liquidity owned per exact (lower, upper) range; burns are checked against it.
    std::map<std::pair<int, int>, Real> positions;
    int current_tick = 0;

    Real spot_price() const { return sqrt_price * sqrt_price; }
    bool operator==(const PoolState&) const = default;
};

struct Trade {
    Direction direction = Direction::zero_for_one;
    TradeKind kind = TradeKind::exact_in;
    Real amount;
};

struct SwapFill {
    Real amount_in;   // gross, fee-inclusive
    Real amount_out;
    Real avg_price;   // amount_in / amount_out; marginal price when nothing was filled
    Real end_sqrt_price;
    std::vector<int> ticks_crossed;
    Real fee_paid;
    bool saturated = false;  // ran out of liquidity before the input was consumed
};

struct SwapResult {
    SwapFill fill;
    PoolState pool;
};

struct Quote {
    Real quoted_price;       // expected average execution price (input per output, fee included)
    std::int64_t quote_block = 0;
    Real mid_price;          // spot price at quote time, input per output
    double price_impact_bps = 0;
    double lp_fee_bps = 0;
    Real quoted_amount_in;
    Real quoted_amount_out;
};

struct Depth {
    Real amount;             // curve input (fee excluded) needed to reach the target price
    bool saturated = false;  // no active liquidity at the target price
};

PoolState new_pool(int fee_bps, int tick_spacing, const Real& sqrt_price,
                   std::span<const Position> positions);

SwapResult swap_exact_in(const PoolState& pool, Direction direction, const Real& amount_in);
SwapResult swap_exact_out(const PoolState& pool, Direction direction, const Real& amount_out);
SwapResult execute_trade(const PoolState& pool, const Trade& trade);

// Moves the price to `target_sqrt_price` (or as far as liquidity allows) consuming
// whatever input that takes.
SwapResult swap_to_sqrt_price(const PoolState& pool, Direction direction, const Real& target_sqrt_price);

PoolState apply_liquidity_event(const PoolState& pool, LiquidityAction action, int lower_tick,
                                int upper_tick, const Real& liquidity);

// Spot price in the trade's input-per-output orientation.
Real mid_price(const PoolState& pool, Direction direction);

Quote quote(const PoolState& pool, const Trade& trade, std::int64_t quote_block = 0);

// Curve input that moves the price `range_bps` against a trader going in `direction`.
Depth liquidity_depth(const PoolState& pool, Direction direction, double range_bps = 500);

Real recompute_active_liquidity(const PoolState& pool);
// Throws InvalidArgument describing the first violated pool invariant.
void check_invariants(const PoolState& pool);

struct SwapEvent {
    std::int64_t block = 0;
    int log_index = 0;
    Direction direction = Direction::zero_for_one;
    Real amount_in;
};

struct LiquidityChange {
    std::int64_t block = 0;
    int log_index = 0;
    LiquidityAction action = LiquidityAction::mint;
    int lower_tick = 0;
    int upper_tick = 0;
    Real liquidity;
};

using PoolEvent = std::variant<SwapEvent, LiquidityChange>;

PoolState apply_event(const PoolState& pool, const PoolEvent& event);

// Left fold of every event strictly before `block_height`. Events must be
// ordered by (block, log_index); SchemaError otherwise.
PoolState reconstruct_state(const PoolState& initial, std::span<const PoolEvent> events,
                            std::int64_t block_height);

}  // namespace dexcost
