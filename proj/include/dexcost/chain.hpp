#pragma once

// Swaps, trades, liquidity events and blocks as they appear onchain.

#include "dexcost/amm.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace dexcost {

enum class SwapStatus { succeeded, failed_tolerance, failed_other };

struct TxId {
    std::string tx_hash;
    int log_index = 0;
    auto operator<=>(const TxId&) const = default;
};

// A signed swap: the trade intent, its limit, and what happened to it.
struct SwapTx {
    std::string tx_hash;
    int log_index = 0;
    Trade trade;
    Real limit;  // min amount out (exact_in) or max amount in (exact_out)
    double slippage_tolerance_bps = 0;
    double deadline = 0;
    std::optional<Quote> quote;
    std::optional<double> sign_time;
    std::optional<double> mempool_first_seen;
    bool is_public = true;
    std::int64_t gas_used = 0;
    double gas_price_wei = 0;
    SwapStatus status = SwapStatus::succeeded;
    // Realized exchange; zero unless the swap succeeded.
    Real amount_in;
    Real amount_out;

    TxId id() const { return {tx_hash, log_index}; }
};

struct LiquidityEvent {
    std::string tx_hash;
    int log_index = 0;
    LiquidityAction kind = LiquidityAction::mint;
    int lower_tick = 0;
    int upper_tick = 0;
    Real liquidity;
    std::int64_t block = 0;
    int intra_block_index = 0;
    bool is_public = false;

    TxId id() const { return {tx_hash, log_index}; }
};

// The realized interaction of a succeeded swap with the pool.
struct TradeRecord {
    TxId parent;
    Direction direction = Direction::zero_for_one;
    Real amount_in;
    Real amount_out;
    std::int64_t block = 0;
    int intra_block_index = 0;  // position of the parent in BlockRecord::txs

    bool has_price() const { return amount_out > 0; }
    Real realized_price() const;
};

using BlockTx = std::variant<SwapTx, LiquidityEvent>;

struct BlockRecord {
    std::int64_t height = 0;
    double timestamp = 0;
    std::string builder;
    std::vector<BlockTx> txs;  // execution order
    PoolState initial_pool;    // pool state at the top of the block
};

inline const std::string& tx_hash_of(const BlockTx& tx) {
    return std::visit([](const auto& v) -> const std::string& { return v.tx_hash; }, tx);
}

inline bool is_public_tx(const BlockTx& tx) {
    return std::visit([](const auto& v) { return v.is_public; }, tx);
}

std::vector<TradeRecord> trades_of(const BlockRecord& block);

// Index into trades_of(block) for the swap at `position`, if it produced a trade.
std::optional<std::size_t> trade_index_at(const BlockRecord& block, std::size_t position);

struct Latency {
    double seconds = 0;
    double log_seconds = 0;  // ln(seconds + 1)
};

Latency latency_of(const SwapTx& swap, const BlockRecord& block);

// Limit implied by a quote and tolerance: quoted amount over the limit, minus one, is the tolerance.
Real limit_from_quote(const Quote& quote, TradeKind kind, double tolerance_bps);
// Inverse of limit_from_quote.
double tolerance_from_limit(const Quote& quote, TradeKind kind, const Real& limit);

struct SettleOptions {
    bool check_deadline = false;
};

// Executes `block.txs` from `block.initial_pool`, enforcing each swap's limit,
// and records realized amounts and statuses. Swaps already marked failed_other
// are left untouched. Returns the pool state at the end of the block.
PoolState settle_block(BlockRecord& block, const SettleOptions& options = {});

}  // namespace dexcost
