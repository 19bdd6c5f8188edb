#include "dexcost/chain.hpp"

#include "dexcost/errors.hpp"

#include <cmath>

namespace dexcost {

Real TradeRecord::realized_price() const {
    if (!has_price()) {
        throw DomainError("trade " + parent.tx_hash + " has no output; realized price undefined");
    }
    return amount_in / amount_out;
}

std::vector<TradeRecord> trades_of(const BlockRecord& block) {
    std::vector<TradeRecord> trades;
    for (std::size_t i = 0; i < block.txs.size(); ++i) {
        const auto* swap = std::get_if<SwapTx>(&block.txs[i]);
        if (swap == nullptr || swap->status != SwapStatus::succeeded) continue;
        trades.push_back(TradeRecord{swap->id(), swap->trade.direction, swap->amount_in, swap->amount_out,
                                     block.height, static_cast<int>(i)});
    }
    return trades;
}

std::optional<std::size_t> trade_index_at(const BlockRecord& block, std::size_t position) {
    std::size_t index = 0;
    for (std::size_t i = 0; i < block.txs.size() && i <= position; ++i) {
        const auto* swap = std::get_if<SwapTx>(&block.txs[i]);
        if (swap == nullptr || swap->status != SwapStatus::succeeded) continue;
        if (i == position) return index;
        ++index;
    }
    return std::nullopt;
}

Latency latency_of(const SwapTx& swap, const BlockRecord& block) {
    if (!swap.sign_time) {
        throw MissingField("swap " + swap.tx_hash + " has no sign time");
    }
    const double seconds = block.timestamp - *swap.sign_time;
    if (seconds < 0) {
        throw DomainError("swap " + swap.tx_hash + " signed after its block timestamp");
    }
    return {seconds, std::log(seconds + 1)};
}

Real limit_from_quote(const Quote& quote, TradeKind kind, double tolerance_bps) {
    const Real factor = 1 + bps_to_fraction(tolerance_bps);
    return kind == TradeKind::exact_in ? quote.quoted_amount_out / factor : quote.quoted_amount_in * factor;
}

double tolerance_from_limit(const Quote& quote, TradeKind kind, const Real& limit) {
    const Real ratio = kind == TradeKind::exact_in ? quote.quoted_amount_out / limit : limit / quote.quoted_amount_in;
    return to_double((ratio - 1) * 10000);
}

PoolState settle_block(BlockRecord& block, const SettleOptions& options) {
    PoolState pool = block.initial_pool;
    for (BlockTx& tx : block.txs) {
        if (auto* event = std::get_if<LiquidityEvent>(&tx)) {
            pool = apply_liquidity_event(pool, event->kind, event->lower_tick, event->upper_tick, event->liquidity);
            continue;
        }
        auto& swap = std::get<SwapTx>(tx);
        swap.amount_in = 0;
        swap.amount_out = 0;
        if (swap.status == SwapStatus::failed_other) continue;
        if (options.check_deadline && block.timestamp > swap.deadline) {
            swap.status = SwapStatus::failed_other;
            continue;
        }
        SwapResult result;
        try {
            result = execute_trade(pool, swap.trade);
        } catch (const InsufficientLiquidity&) {
            swap.status = SwapStatus::failed_other;
            continue;
        }
        if (result.fill.saturated) {
            swap.status = SwapStatus::failed_other;
            continue;
        }
        const bool within_limit = swap.trade.kind == TradeKind::exact_in ? result.fill.amount_out >= swap.limit
                                                                         : result.fill.amount_in <= swap.limit;
        if (!within_limit) {
            swap.status = SwapStatus::failed_tolerance;
            continue;
        }
        swap.status = SwapStatus::succeeded;
        swap.amount_in = result.fill.amount_in;
        swap.amount_out = result.fill.amount_out;
        pool = std::move(result.pool);
    }
    return pool;
}

}  // namespace dexcost
