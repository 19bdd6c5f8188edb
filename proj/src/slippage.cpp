#include "dexcost/slippage.hpp"

#include "dexcost/errors.hpp"

#include <algorithm>
#include <set>

namespace dexcost {

namespace {

ReplayTrade replay_of(const TradeRecord& t) { return {t.direction, t.amount_in}; }

ReplayItem replay_of(const LiquidityEvent& e) { return ReplayLiquidity{e.kind, e.lower_tick, e.upper_tick, e.liquidity}; }

const SwapTx& swap_at(const BlockRecord& block, std::size_t position) {
    if (position >= block.txs.size()) {
        throw InvalidArgument("position outside the block");
    }
    const auto* swap = std::get_if<SwapTx>(&block.txs[position]);
    if (swap == nullptr) {
        throw InvalidArgument("block entry at position is not a swap");
    }
    return *swap;
}

// Trades in block order before `position`, excluding those flagged adversarial.
std::vector<ReplayItem> preceding_trades(const BlockRecord& block, std::size_t position,
                                         const std::set<std::size_t>& excluded_positions) {
    std::vector<ReplayItem> items;
    for (std::size_t i = 0; i < position; ++i) {
        const auto* swap = std::get_if<SwapTx>(&block.txs[i]);
        if (swap == nullptr || swap->status != SwapStatus::succeeded) continue;
        if (excluded_positions.contains(i)) continue;
        items.push_back(ReplayTrade{swap->trade.direction, swap->amount_in});
    }
    return items;
}

}  // namespace

double slippage_bps(const Real& quoted_price, const Real& realized_price) {
    if (!(quoted_price > 0) || !(realized_price > 0)) {
        throw DomainError("slippage needs positive prices");
    }
    return to_double((realized_price / quoted_price - 1) * -10000);
}

PricePoint hypothetical_price(const PoolState& initial, std::span<const TradeRecord> trades, std::size_t index) {
    if (index >= trades.size()) {
        throw InvalidArgument("trade index outside the sequence");
    }
    PoolState state = initial;
    for (std::size_t i = 0; i < index; ++i) apply_item(state, replay_of(trades[i]));
    return price_of(state, replay_of(trades[index]));
}

ReorderingEstimate reordering_estimate(const BlockRecord& block, std::size_t trade_index,
                                       const ReorderingOptions& options) {
    std::vector<ReplayItem> items;
    std::optional<std::size_t> target;
    std::size_t trade_counter = 0;
    for (const BlockTx& tx : block.txs) {
        if (const auto* swap = std::get_if<SwapTx>(&tx)) {
            if (swap->status != SwapStatus::succeeded) continue;
            if (trade_counter++ == trade_index) target = items.size();
            items.push_back(ReplayTrade{swap->trade.direction, swap->amount_in});
        } else if (options.include_liquidity_events) {
            items.push_back(replay_of(std::get<LiquidityEvent>(tx)));
        }
    }
    if (!target) {
        throw InvalidArgument("trade index outside the block's trades");
    }

    bool sampled = false;
    switch (options.mode) {
        case ReorderMode::exact:
            if (items.size() > options.exact_threshold) {
                throw ModeError("exact reordering requested for " + std::to_string(items.size()) +
                                " items, above the threshold of " + std::to_string(options.exact_threshold));
            }
            break;
        case ReorderMode::sampled: sampled = true; break;
        case ReorderMode::automatic: sampled = items.size() > options.exact_threshold; break;
    }

    const PricePoint realized = price_in_sequence(block.initial_pool, items, *target);
    const ExpectedPrice expected =
        sampled ? expected_price_sampled(block.initial_pool, items, *target, options.n_samples,
                                         stream_seed(options.seed, block.height, trade_index))
                : expected_price_exact(block.initial_pool, items, *target);

    ReorderingEstimate out;
    out.realized_price = realized.price;
    out.expected_price = expected.mean;
    out.sampled = sampled;
    out.orderings = expected.orderings;
    out.n_items = items.size();
    out.saturated = realized.saturated || expected.saturated;
    out.bps = slippage_bps(expected.mean, realized.price);
    // Delta method: d bps / d E = 1e4 * realized / E^2.
    out.std_error_bps = to_double(10000 * realized.price / (expected.mean * expected.mean)) * expected.std_error;
    return out;
}

double reordering_slippage(const BlockRecord& block, std::size_t trade_index, const ReorderingOptions& options) {
    return reordering_estimate(block, trade_index, options).bps;
}

std::vector<AdversarialFlag> classify_adversarial(const BlockRecord& block, std::size_t position) {
    const std::string& own = tx_hash_of(block.txs.at(position));
    std::vector<std::string> preceding;
    for (std::size_t i = position; i-- > 0 && preceding.size() < 2;) {
        const std::string& hash = tx_hash_of(block.txs[i]);
        if (hash == own) continue;
        if (preceding.empty() || preceding.back() != hash) preceding.push_back(hash);
    }

    std::vector<AdversarialFlag> flags;
    std::size_t trade_index = 0;
    for (std::size_t i = 0; i < position; ++i) {
        const auto* swap = std::get_if<SwapTx>(&block.txs[i]);
        if (swap == nullptr || swap->status != SwapStatus::succeeded) continue;
        if (std::find(preceding.begin(), preceding.end(), swap->tx_hash) != preceding.end()) {
            flags.push_back({trade_index, swap->id(), !swap->is_public});
        }
        ++trade_index;
    }
    return flags;
}

PricePoint simulate_failed_swap(const BlockRecord& block, std::size_t position) {
    const SwapTx& swap = swap_at(block, position);
    if (swap.status != SwapStatus::failed_tolerance) {
        throw InvalidArgument("simulate_failed_swap needs a swap that failed its tolerance");
    }
    PoolState state = block.initial_pool;
    for (std::size_t i = 0; i < position; ++i) {
        if (const auto* prior = std::get_if<SwapTx>(&block.txs[i])) {
            if (prior->status == SwapStatus::succeeded) apply_item(state, ReplayTrade{prior->trade.direction, prior->amount_in});
        } else {
            apply_item(state, replay_of(std::get<LiquidityEvent>(block.txs[i])));
        }
    }
    const SwapFill fill = execute_trade(state, swap.trade).fill;
    return {fill.avg_price, fill.saturated};
}

SlippageDecomposition decompose(const BlockRecord& block, std::size_t position, const DecomposeOptions& options) {
    const SwapTx& swap = swap_at(block, position);
    const bool failed = swap.status == SwapStatus::failed_tolerance;
    if (swap.status != SwapStatus::succeeded && !(failed && options.simulate_failed)) {
        throw InvalidArgument("swap " + swap.tx_hash + " did not execute; nothing to decompose");
    }
    if (!swap.quote) {
        throw MissingField("swap " + swap.tx_hash + " has no quote");
    }

    SlippageDecomposition d;
    d.swap = swap.id();
    d.simulated = failed;
    d.quoted_price = swap.quote->quoted_price;

    ReplayTrade own{swap.trade.direction, swap.amount_in};
    if (failed) {
        const PricePoint simulated = simulate_failed_swap(block, position);
        d.realized_price = simulated.price;
        d.saturated = simulated.saturated;
        // Replays use the input the simulated execution would have spent.
        own.amount_in = swap.trade.kind == TradeKind::exact_in ? swap.trade.amount : swap.trade.amount * simulated.price;
    } else {
        d.realized_price = swap.amount_in / swap.amount_out;
    }

    d.labels = classify_adversarial(block, position);
    std::set<std::size_t> adversarial_positions;
    for (const AdversarialFlag& flag : d.labels) {
        if (!flag.adversarial) continue;
        for (std::size_t i = 0; i < position; ++i) {
            const auto* s = std::get_if<SwapTx>(&block.txs[i]);
            if (s != nullptr && s->id() == flag.trade) adversarial_positions.insert(i);
        }
    }

    auto price_after = [&](std::vector<ReplayItem> items) {
        items.push_back(own);
        const PricePoint p = price_in_sequence(block.initial_pool, items, items.size() - 1);
        d.saturated = d.saturated || p.saturated;
        return p.price;
    };
    d.collision_price = price_after(preceding_trades(block, position, adversarial_positions));
    d.realized_without_liquidity_price = price_after(preceding_trades(block, position, {}));
    d.top_of_block_price = price_after({});

    d.total_bps = slippage_bps(d.quoted_price, d.realized_price);
    d.collision_bps = slippage_bps(d.quoted_price, d.collision_price);
    d.adversarial_bps = slippage_bps(d.collision_price, d.realized_without_liquidity_price);
    d.liquidity_bps = slippage_bps(d.realized_without_liquidity_price, d.realized_price);
    d.top_of_block_bps = slippage_bps(d.quoted_price, d.top_of_block_price);
    d.residual_bps = d.total_bps - (d.adversarial_bps + d.collision_bps + d.liquidity_bps);

    if (options.reordering && !failed) {
        d.reordering = reordering_estimate(block, *trade_index_at(block, position), *options.reordering);
    }
    return d;
}

}  // namespace dexcost
