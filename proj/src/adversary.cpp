#include "dexcost/adversary.hpp"

#include "dexcost/errors.hpp"

#include <cstdio>
#include <random>

namespace dexcost {

namespace {

std::string synthetic_hash(const char* tag, std::int64_t height, std::size_t index) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char* c = tag; *c != '\0'; ++c) h = (h ^ static_cast<unsigned char>(*c)) * 1099511628211ULL;
    h = (h ^ static_cast<std::uint64_t>(height)) * 1099511628211ULL;
    h = (h ^ index) * 1099511628211ULL;
    char buf[40];
    std::snprintf(buf, sizeof buf, "0x%016llx%04zx", static_cast<unsigned long long>(h), index & 0xffff);
    return buf;
}

BlockRecord empty_block(const PoolState& pool, const BlockMeta& meta) {
    BlockRecord block;
    block.height = meta.height;
    block.timestamp = meta.timestamp;
    block.builder = meta.builder;
    block.initial_pool = pool;
    return block;
}

bool within_limit(const SwapTx& swap, const SwapFill& fill) {
    return swap.trade.kind == TradeKind::exact_in ? fill.amount_out >= swap.limit : fill.amount_in <= swap.limit;
}

// Victim fill after the pool has moved; nullopt if it fails.
std::optional<SwapResult> victim_fill(const PoolState& pool, const SwapTx& victim) {
    try {
        SwapResult r = execute_trade(pool, victim.trade);
        if (r.fill.saturated || !within_limit(victim, r.fill)) return std::nullopt;
        return r;
    } catch (const InsufficientLiquidity&) {
        return std::nullopt;
    }
}

// Attacker leg that executes exactly at its own quote.
SwapTx attacker_swap(const PoolState& pool, std::string hash, Direction direction, const Real& amount) {
    SwapTx s = make_swap(pool, std::move(hash), {direction, TradeKind::exact_in, amount}, 0, false);
    return s;
}

LiquidityEvent liquidity_event(std::string hash, LiquidityAction action, int lower, int upper, const Real& liquidity,
                               std::int64_t height) {
    LiquidityEvent e;
    e.tx_hash = std::move(hash);
    e.kind = action;
    e.lower_tick = lower;
    e.upper_tick = upper;
    e.liquidity = liquidity;
    e.block = height;
    e.is_public = false;
    return e;
}

void settle_and_index(Scenario& s) {
    settle_block(s.block);
    for (std::size_t i = 0; i < s.block.txs.size(); ++i) {
        if (auto* e = std::get_if<LiquidityEvent>(&s.block.txs[i])) e->intra_block_index = static_cast<int>(i);
    }
}

int floor_div(int a, int b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

}  // namespace

const char* to_string(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::sandwich: return "sandwich";
        case ScenarioKind::backrun: return "backrun";
        case ScenarioKind::jit: return "jit";
        case ScenarioKind::collision: return "collision";
    }
    return "unknown";
}

SwapTx make_swap(const PoolState& pool, std::string tx_hash, const Trade& trade, double tolerance_bps, bool is_public,
                 std::int64_t quote_block) {
    if (tolerance_bps < 0) {
        throw InvalidArgument("slippage tolerance must be nonnegative");
    }
    SwapTx s;
    s.tx_hash = std::move(tx_hash);
    s.trade = trade;
    s.quote = quote(pool, trade, quote_block);
    s.slippage_tolerance_bps = tolerance_bps;
    s.limit = limit_from_quote(*s.quote, trade.kind, tolerance_bps);
    s.is_public = is_public;
    s.deadline = 4'000'000'000.0;
    return s;
}

std::optional<Real> sandwich_profit(const PoolState& pool, const SwapTx& victim, const Real& frontrun,
                                    const SandwichOptions& options) {
    if (frontrun < 0) {
        throw InvalidArgument("frontrun size must be nonnegative");
    }
    if (frontrun == 0) {
        if (!victim_fill(pool, victim)) return std::nullopt;
        return Real(0);
    }
    const Direction dir = victim.trade.direction;
    const SwapResult front = swap_exact_in(pool, dir, frontrun);
    if (front.fill.saturated) return std::nullopt;
    const auto middle = victim_fill(front.pool, victim);
    if (!middle) return std::nullopt;
    const SwapResult back = swap_exact_in(middle->pool, opposite(dir), front.fill.amount_out);
    Real pnl = back.fill.amount_out - frontrun;
    if (options.include_gas) pnl -= options.gas_cost;
    return pnl;
}

Real max_feasible_frontrun(const PoolState& pool, const SwapTx& victim) {
    if (!sandwich_profit(pool, victim, 0)) return 0;
    Real lo = 0;
    Real hi = victim.trade.kind == TradeKind::exact_in ? victim.trade.amount : victim.limit;
    if (!(hi > 0)) hi = 1;
    for (int i = 0; i < 400 && sandwich_profit(pool, victim, hi); ++i) {
        lo = hi;
        hi *= 2;
    }
    for (int i = 0; i < 400 && hi - lo > hi * Real("1e-36"); ++i) {
        const Real mid = (lo + hi) / 2;
        if (sandwich_profit(pool, victim, mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Attacks below the wire resolution cannot be expressed as a trade.
    return lo > Real("1e-18") ? lo : Real(0);
}

SandwichResult optimal_sandwich(const PoolState& pool, const SwapTx& victim, const SandwichOptions& options,
                                const BlockMeta& meta) {
    const Real x_max = max_feasible_frontrun(pool, victim);
    auto profit = [&](const Real& x) { return *sandwich_profit(pool, victim, x, options); };

    Real best_x = 0;
    Real best_pnl = 0;
    if (x_max > 0) {
        const Real inv_phi = (mp::sqrt(Real(5)) - 1) / 2;
        Real a = 0, b = x_max;
        Real c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
        Real fc = profit(c), fd = profit(d);
        for (int i = 0; i < 200 && b - a > x_max * Real("1e-24"); ++i) {
            if (fc >= fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - inv_phi * (b - a);
                fc = profit(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + inv_phi * (b - a);
                fd = profit(d);
            }
        }
        const Real interior = (a + b) / 2;
        for (const Real& x : {interior, x_max}) {
            const Real p = profit(x);
            if (p > best_pnl) {
                best_pnl = p;
                best_x = x;
            }
        }
    }

    SandwichResult result;
    result.frontrun_size = best_x;
    result.attacker_pnl = best_pnl;
    Scenario& s = result.scenario;
    s.kind = ScenarioKind::sandwich;
    s.block = empty_block(pool, meta);
    if (best_x > 0) {
        const Direction dir = victim.trade.direction;
        const SwapResult front = swap_exact_in(pool, dir, best_x);
        const SwapResult middle = execute_trade(front.pool, victim.trade);
        s.block.txs.push_back(attacker_swap(pool, synthetic_hash("front", meta.height, 0), dir, best_x));
        s.block.txs.push_back(victim);
        s.block.txs.push_back(
            attacker_swap(middle.pool, synthetic_hash("back", meta.height, 2), opposite(dir), front.fill.amount_out));
        s.victim_position = 1;
        s.ground_truth = {-1, -1, 0, 0, std::nullopt};
    } else {
        s.block.txs.push_back(victim);
        s.victim_position = 0;
        s.ground_truth = {0, 0, 0, 0, 0};
    }
    s.attacker_pnl_usd = to_double(best_pnl) * meta.input_token_usd;
    settle_and_index(s);
    return result;
}

Arbitrage arbitrage_to(const PoolState& pool, const Real& external_mid) {
    if (!(external_mid > 0)) {
        throw InvalidArgument("external mid price must be positive");
    }
    const Real gamma = Real(kMaxFeeBps - pool.fee_bps) / kMaxFeeBps;
    const Real spot = pool.spot_price();
    Arbitrage arb;
    arb.amount_in = 0;
    Real target;
    if (spot < external_mid * gamma) {
        arb.direction = Direction::one_for_zero;
        target = external_mid * gamma;
    } else if (spot > external_mid / gamma) {
        arb.direction = Direction::zero_for_one;
        target = external_mid / gamma;
    } else {
        return arb;
    }
    arb.amount_in = swap_to_sqrt_price(pool, arb.direction, mp::sqrt(target)).fill.amount_in;
    return arb;
}

Scenario gen_backrun(const PoolState& pool, const SwapTx& victim, const Real& external_mid, const BlockMeta& meta) {
    Scenario s;
    s.kind = ScenarioKind::backrun;
    s.block = empty_block(pool, meta);
    s.block.txs.push_back(victim);
    s.victim_position = 0;
    const SwapResult after = execute_trade(pool, victim.trade);
    const Arbitrage arb = arbitrage_to(after.pool, external_mid);
    s.ground_truth.total = 0;
    s.ground_truth.adversarial = 0;
    s.ground_truth.collision = 0;
    s.ground_truth.liquidity = 0;
    if (arb.amount_in > 0) {
        s.block.txs.push_back(attacker_swap(after.pool, synthetic_hash("arb", meta.height, 1), arb.direction, arb.amount_in));
        s.ground_truth.reordering = arb.direction == victim.trade.direction ? 1 : -1;
        const SwapResult done = swap_exact_in(after.pool, arb.direction, arb.amount_in);
        // Arbitrage profit valued at the external price, in token1.
        const Real value_out = arb.direction == Direction::zero_for_one ? done.fill.amount_out
                                                                          : done.fill.amount_out * external_mid;
        const Real value_in = arb.direction == Direction::zero_for_one ? arb.amount_in * external_mid : arb.amount_in;
        s.attacker_pnl_usd = to_double(value_out - value_in) * meta.input_token_usd;
    } else {
        s.ground_truth.reordering = 0;
    }
    settle_and_index(s);
    return s;
}

Scenario gen_jit(const PoolState& pool, const SwapTx& victim, const Real& liquidity_multiple, const BlockMeta& meta) {
    if (liquidity_multiple < 0) {
        throw InvalidArgument("JIT liquidity multiple must be nonnegative");
    }
    Scenario s;
    s.kind = ScenarioKind::jit;
    s.block = empty_block(pool, meta);
    s.ground_truth = {std::nullopt, 0, 0, 0, std::nullopt};
    const Real liquidity = pool.active_liquidity * liquidity_multiple;
    if (liquidity > 0) {
        // At least one full spacing on either side of the current price.
        const int aligned = floor_div(pool.current_tick, pool.tick_spacing) * pool.tick_spacing;
        const int lower = aligned - pool.tick_spacing;
        const int upper = aligned + 2 * pool.tick_spacing;
        s.block.txs.push_back(
            liquidity_event(synthetic_hash("jit-mint", meta.height, 0), LiquidityAction::mint, lower, upper, liquidity, meta.height));
        s.block.txs.push_back(victim);
        s.block.txs.push_back(
            liquidity_event(synthetic_hash("jit-burn", meta.height, 2), LiquidityAction::burn, lower, upper, liquidity, meta.height));
        s.victim_position = 1;
        s.ground_truth.liquidity = 1;
        s.ground_truth.total = 1;
    } else {
        s.block.txs.push_back(victim);
        s.victim_position = 0;
    }
    settle_and_index(s);
    return s;
}

Scenario gen_collision_block(const PoolState& pool, std::size_t n_trades, double direction_bias, const SizeRange& sizes,
                             std::uint64_t seed, double tolerance_bps, const BlockMeta& meta) {
    if (n_trades == 0) {
        throw InvalidArgument("collision block needs at least one trade");
    }
    if (!(sizes.low > 0) || sizes.high < sizes.low) {
        throw InvalidArgument("size range must satisfy 0 < low <= high");
    }
    std::mt19937_64 rng(seed);
    auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

    Scenario s;
    s.kind = ScenarioKind::collision;
    s.block = empty_block(pool, meta);
    Real pair_size = 0;
    for (std::size_t i = 0; i < n_trades; ++i) {
        Direction dir;
        if (uniform() < direction_bias) {
            dir = Direction::zero_for_one;
        } else {
            dir = i % 2 == 0 ? Direction::zero_for_one : Direction::one_for_zero;
        }
        if (i % 2 == 0) {
            pair_size = parse_decimal(to_decimal(sizes.low + (sizes.high - sizes.low) * Real(uniform())));
        }
        s.block.txs.push_back(make_swap(pool, synthetic_hash("collision", meta.height, i),
                                        {dir, TradeKind::exact_in, pair_size}, tolerance_bps, true, meta.height));
    }
    s.victim_position = n_trades - 1;
    if (n_trades == 1) {
        s.ground_truth = {0, 0, 0, 0, 0};
    } else {
        s.ground_truth.adversarial = 0;
        s.ground_truth.liquidity = 0;
        if (direction_bias >= 1) s.ground_truth.collision = -1;
    }
    settle_and_index(s);
    return s;
}

}  // namespace dexcost
