#pragma once

// Slippage against a quote, reordering slippage, and the
// adversarial / collision / liquidity decomposition of a swap's slippage.

#include "dexcost/chain.hpp"
#include "dexcost/reorder_kernels.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace dexcost {

// -(realized/quoted - 1) * 1e4; positive is a price improvement. Prices are input per output.
double slippage_bps(const Real& quoted_price, const Real& realized_price);

// Price of trades[index] after executing trades[0..index) unconditionally from
// `initial`. Each trade replays as exact-in with its recorded input.
PricePoint hypothetical_price(const PoolState& initial, std::span<const TradeRecord> trades, std::size_t index);

enum class ReorderMode { automatic, exact, sampled };

struct ReorderingOptions {
    ReorderMode mode = ReorderMode::automatic;
    std::size_t exact_threshold = 7;  // automatic mode enumerates up to this many items
    std::size_t n_samples = 16;
    std::uint64_t seed = 0;
    bool include_liquidity_events = false;
};

struct ReorderingEstimate {
    double bps = 0;
    Real realized_price;   // target's price in the block's own ordering of the permuted items
    Real expected_price;   // mean hypothetical price over orderings
    bool sampled = false;
    std::size_t orderings = 0;
    std::size_t n_items = 0;
    double std_error_bps = 0;  // 0 for exact enumeration
    bool saturated = false;
};

// Reordering slippage of trades_of(block)[trade_index]. The permuted items are
// the block's trades, plus its liquidity events when requested. Exact mode
// above the threshold raises ModeError.
ReorderingEstimate reordering_estimate(const BlockRecord& block, std::size_t trade_index,
                                       const ReorderingOptions& options);
double reordering_slippage(const BlockRecord& block, std::size_t trade_index, const ReorderingOptions& options);

struct AdversarialFlag {
    std::size_t trade_index = 0;  // into trades_of(block)
    TxId trade;
    bool adversarial = false;
};

// Trades inside the (at most two) distinct transactions directly before the
// swap at `position`; a trade is adversarial iff its transaction is private.
std::vector<AdversarialFlag> classify_adversarial(const BlockRecord& block, std::size_t position);

struct SlippageDecomposition {
    TxId swap;
    double total_bps = 0;
    double adversarial_bps = 0;
    double collision_bps = 0;
    double liquidity_bps = 0;
    double top_of_block_bps = 0;
    double residual_bps = 0;  // total - (adversarial + collision + liquidity)
    std::optional<ReorderingEstimate> reordering;
    std::vector<AdversarialFlag> labels;
    Real quoted_price;
    Real collision_price;
    Real realized_without_liquidity_price;
    Real realized_price;
    Real top_of_block_price;
    bool simulated = false;  // realized price comes from a failed-swap simulation
    bool saturated = false;  // some replay ran out of liquidity
};

struct DecomposeOptions {
    bool simulate_failed = true;
    std::optional<ReorderingOptions> reordering;  // only succeeded swaps carry a reordering value
};

SlippageDecomposition decompose(const BlockRecord& block, std::size_t position, const DecomposeOptions& options = {});

// Price the failed_tolerance swap at `position` would have got by executing
// unconditionally at its place in the settled block.
PricePoint simulate_failed_swap(const BlockRecord& block, std::size_t position);

}  // namespace dexcost
