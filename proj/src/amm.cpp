#include "dexcost/amm.hpp"

#include "dexcost/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace dexcost {

namespace {

const Real& half_log_tick_base() {
    static const Real value = mp::log(Real("1.0001")) / 2;
    return value;
}

const Real& min_sqrt_price() {
    static const Real value = sqrt_price_at_tick(kMinTick);
    return value;
}

const Real& max_sqrt_price() {
    static const Real value = sqrt_price_at_tick(kMaxTick);
    return value;
}

Real fee_multiplier(int fee_bps) { return Real(kMaxFeeBps - fee_bps) / kMaxFeeBps; }

enum class SwapMode { exact_in, exact_out, to_price };

// One pass over the tick ranges in `direction`. `amount` is the input budget
// (exact_in), the output request (exact_out), or ignored (to_price).
SwapResult run_swap(const PoolState& pool, Direction direction, SwapMode mode, const Real& amount,
                    const Real& target) {
    if (mode != SwapMode::to_price && amount < 0) {
        throw InvalidArgument("swap amount must be non-negative");
    }
    SwapResult result{{}, pool};
    PoolState& s = result.pool;
    SwapFill& fill = result.fill;

    const bool down = direction == Direction::zero_for_one;
    const Real gamma = fee_multiplier(s.fee_bps);
    Real remaining = amount;
    Real gross_in = 0;
    Real net_in = 0;
    Real out = 0;

    while (mode == SwapMode::to_price || remaining > 0) {
        if (mode == SwapMode::to_price &&
            (down ? s.sqrt_price <= target : s.sqrt_price >= target)) {
            break;
        }

        Real boundary;
        bool boundary_is_tick = false;
        int boundary_tick = 0;
        if (down) {
            auto it = s.tick_table.upper_bound(s.current_tick);
            if (it != s.tick_table.begin()) {
                --it;
                if (it->second.sqrt_price == s.sqrt_price) {
                    // Resting exactly on an initialized tick: cross it before moving further down.
                    s.active_liquidity -= it->second.liquidity_net;
                    s.current_tick = it->first - 1;
                    fill.ticks_crossed.push_back(it->first);
                    continue;
                }
                boundary = it->second.sqrt_price;
                boundary_is_tick = true;
                boundary_tick = it->first;
            } else {
                boundary = min_sqrt_price();
            }
        } else {
            auto it = s.tick_table.upper_bound(s.current_tick);
            if (it != s.tick_table.end()) {
                boundary = it->second.sqrt_price;
                boundary_is_tick = true;
                boundary_tick = it->first;
            } else {
                boundary = max_sqrt_price();
            }
        }
        if (mode == SwapMode::to_price && (down ? target >= boundary : target <= boundary)) {
            boundary_is_tick = boundary_is_tick && target == boundary;
            boundary = target;
        }
        if (s.sqrt_price == boundary || (s.active_liquidity == 0 && !boundary_is_tick)) {
            fill.saturated = true;
            break;
        }

        const Real& liquidity = s.active_liquidity;
        const Real& sp = s.sqrt_price;
        Real next_sp = boundary;
        Real step_net = 0;
        Real step_gross = 0;
        Real step_out = 0;

        if (liquidity > 0) {
            // Net input needed and output produced by moving all the way to the boundary.
            const Real full_net = down ? liquidity / boundary - liquidity / sp : liquidity * (boundary - sp);
            const Real full_out = down ? liquidity * (sp - boundary) : liquidity / sp - liquidity / boundary;

            switch (mode) {
                case SwapMode::to_price:
                    step_net = full_net;
                    step_out = full_out;
                    step_gross = full_net / gamma;
                    break;
                case SwapMode::exact_in: {
                    const Real available = remaining * gamma;
                    if (available >= full_net) {
                        step_net = full_net;
                        step_out = full_out;
                        step_gross = full_net / gamma;
                    } else {
                        step_net = available;
                        step_gross = remaining;
                        next_sp = down ? liquidity * sp / (liquidity + available * sp) : sp + available / liquidity;
                        if (down ? next_sp <= boundary : next_sp >= boundary) {
                            next_sp = boundary;
                        }
                        step_out = down ? liquidity * (sp - next_sp) : liquidity / sp - liquidity / next_sp;
                    }
                    break;
                }
                case SwapMode::exact_out: {
                    if (remaining >= full_out) {
                        step_out = full_out;
                        step_net = full_net;
                    } else {
                        step_out = remaining;
                        next_sp = down ? sp - remaining / liquidity : 1 / (1 / sp - remaining / liquidity);
                        if (down ? next_sp <= boundary : next_sp >= boundary) {
                            next_sp = boundary;
                        }
                        step_net = down ? liquidity / next_sp - liquidity / sp : liquidity * (next_sp - sp);
                    }
                    step_gross = step_net / gamma;
                    break;
                }
            }
        }

        gross_in += step_gross;
        net_in += step_net;
        out += step_out;
        if (mode == SwapMode::exact_in) {
            remaining = step_gross >= remaining ? Real(0) : remaining - step_gross;
        } else if (mode == SwapMode::exact_out) {
            remaining = step_out >= remaining ? Real(0) : remaining - step_out;
        }

        s.sqrt_price = next_sp;
        if (!down && boundary_is_tick && next_sp == boundary) {
            const auto& info = s.tick_table.at(boundary_tick);
            s.active_liquidity += info.liquidity_net;
            s.current_tick = boundary_tick;
            fill.ticks_crossed.push_back(boundary_tick);
        } else if (down && boundary_is_tick && next_sp == boundary) {
            s.current_tick = boundary_tick;
        } else {
            s.current_tick = tick_at_sqrt_price(next_sp);
        }
    }

    if (mode == SwapMode::exact_out && remaining > 0) {
        throw InsufficientLiquidity("requested output exceeds reachable liquidity");
    }
    if (mode == SwapMode::exact_in && remaining > 0) {
        fill.saturated = true;
    }

    fill.amount_in = gross_in;
    fill.amount_out = out;
    fill.fee_paid = gross_in - net_in;
    fill.end_sqrt_price = s.sqrt_price;
    if (out > 0) {
        fill.avg_price = gross_in / out;
    } else {
        fill.avg_price = mid_price(pool, direction) / gamma;
    }
    return result;
}

void check_range(const PoolState& pool, int lower_tick, int upper_tick) {
    if (lower_tick >= upper_tick) {
        throw InvalidArgument("position lower tick must be below upper tick");
    }
    if (lower_tick < kMinTick || upper_tick > kMaxTick) {
        throw InvalidArgument("position outside the tick domain");
    }
    if (lower_tick % pool.tick_spacing != 0 || upper_tick % pool.tick_spacing != 0) {
        throw InvalidArgument("ticks " + std::to_string(lower_tick) + "," + std::to_string(upper_tick) +
                              " not aligned to spacing " + std::to_string(pool.tick_spacing));
    }
}

void add_tick_delta(PoolState& pool, int tick, const Real& delta) {
    auto it = pool.tick_table.find(tick);
    if (it == pool.tick_table.end()) {
        pool.tick_table.emplace(tick, TickInfo{delta, sqrt_price_at_tick(tick)});
        return;
    }
    it->second.liquidity_net += delta;
    if (it->second.liquidity_net == 0) {
        pool.tick_table.erase(it);
    }
}

}  // namespace

Real sqrt_price_at_tick(int tick) {
    if (tick < kMinTick || tick > kMaxTick) {
        throw InvalidArgument("tick outside domain: " + std::to_string(tick));
    }
    return mp::exp(half_log_tick_base() * tick);
}

int tick_at_sqrt_price(const Real& sqrt_price) {
    if (sqrt_price <= 0) {
        throw InvalidArgument("sqrt price must be positive");
    }
    if (sqrt_price <= min_sqrt_price()) return kMinTick;
    if (sqrt_price >= max_sqrt_price()) return kMaxTick;

    const double estimate = 2.0 * std::log(to_double(sqrt_price)) / std::log(1.0001);
    int tick = static_cast<int>(std::floor(estimate));
    const double frac = estimate - std::floor(estimate);
    if (frac > 1e-6 && frac < 1 - 1e-6) {
        return std::clamp(tick, kMinTick, kMaxTick);
    }
    // Near a tick boundary the double estimate is not trustworthy; settle it exactly.
    tick = std::clamp(tick, kMinTick, kMaxTick - 1);
    while (tick > kMinTick && sqrt_price_at_tick(tick) > sqrt_price) --tick;
    while (tick < kMaxTick && sqrt_price_at_tick(tick + 1) <= sqrt_price) ++tick;
    return tick;
}

PoolState new_pool(int fee_bps, int tick_spacing, const Real& sqrt_price,
                   std::span<const Position> positions) {
    if (fee_bps < 0 || fee_bps >= kMaxFeeBps) {
        throw InvalidArgument("fee_bps must lie in [0, 10000)");
    }
    if (tick_spacing <= 0) {
        throw InvalidArgument("tick spacing must be positive");
    }
    if (sqrt_price <= 0) {
        throw InvalidArgument("sqrt price must be positive");
    }
    PoolState pool;
    pool.fee_bps = fee_bps;
    pool.tick_spacing = tick_spacing;
    pool.sqrt_price = sqrt_price;
    pool.current_tick = tick_at_sqrt_price(sqrt_price);
    for (const Position& p : positions) {
        check_range(pool, p.lower_tick, p.upper_tick);
        if (p.liquidity < 0) {
            throw InvalidArgument("position liquidity must be non-negative");
        }
        if (p.liquidity == 0) continue;
        pool = apply_liquidity_event(pool, LiquidityAction::mint, p.lower_tick, p.upper_tick, p.liquidity);
    }
    return pool;
}

SwapResult swap_exact_in(const PoolState& pool, Direction direction, const Real& amount_in) {
    return run_swap(pool, direction, SwapMode::exact_in, amount_in, Real(0));
}

SwapResult swap_exact_out(const PoolState& pool, Direction direction, const Real& amount_out) {
    return run_swap(pool, direction, SwapMode::exact_out, amount_out, Real(0));
}

SwapResult execute_trade(const PoolState& pool, const Trade& trade) {
    return trade.kind == TradeKind::exact_in ? swap_exact_in(pool, trade.direction, trade.amount)
                                             : swap_exact_out(pool, trade.direction, trade.amount);
}

SwapResult swap_to_sqrt_price(const PoolState& pool, Direction direction, const Real& target_sqrt_price) {
    if (target_sqrt_price <= 0) {
        throw InvalidArgument("target sqrt price must be positive");
    }
    return run_swap(pool, direction, SwapMode::to_price, Real(0), target_sqrt_price);
}

PoolState apply_liquidity_event(const PoolState& pool, LiquidityAction action, int lower_tick,
                                int upper_tick, const Real& liquidity) {
    check_range(pool, lower_tick, upper_tick);
    if (liquidity <= 0) {
        throw InvalidArgument("liquidity event amount must be positive");
    }
    PoolState next = pool;
    const auto key = std::make_pair(lower_tick, upper_tick);
    Real delta = liquidity;
    if (action == LiquidityAction::burn) {
        auto it = next.positions.find(key);
        if (it == next.positions.end() || it->second < liquidity) {
            throw InvalidArgument("burn exceeds liquidity held in range [" + std::to_string(lower_tick) + ", " +
                                  std::to_string(upper_tick) + ")");
        }
        it->second -= liquidity;
        if (it->second == 0) next.positions.erase(it);
        delta = -liquidity;
    } else {
        next.positions[key] += liquidity;
    }
    add_tick_delta(next, lower_tick, delta);
    add_tick_delta(next, upper_tick, -delta);
    if (lower_tick <= next.current_tick && next.current_tick < upper_tick) {
        next.active_liquidity += delta;
    }
    return next;
}

Real mid_price(const PoolState& pool, Direction direction) {
    const Real spot = pool.spot_price();
    return direction == Direction::zero_for_one ? 1 / spot : spot;
}

Quote quote(const PoolState& pool, const Trade& trade, std::int64_t quote_block) {
    const SwapResult result = execute_trade(pool, trade);
    if (result.fill.saturated) {
        throw InsufficientLiquidity("pool cannot fill the quoted trade");
    }
    Quote q;
    q.quoted_price = result.fill.avg_price;
    q.quote_block = quote_block;
    q.mid_price = mid_price(pool, trade.direction);
    q.quoted_amount_in = result.fill.amount_in;
    q.quoted_amount_out = result.fill.amount_out;
    const Real markup_bps = (q.quoted_price / q.mid_price - 1) * 10000;
    q.lp_fee_bps = pool.fee_bps;
    q.price_impact_bps = to_double(markup_bps - pool.fee_bps);
    return q;
}

Depth liquidity_depth(const PoolState& pool, Direction direction, double range_bps) {
    if (!(range_bps > 0)) {
        throw InvalidArgument("range_bps must be positive");
    }
    const Real growth = mp::sqrt(1 + bps_to_fraction(range_bps));
    const Real target = direction == Direction::one_for_zero ? pool.sqrt_price * growth : pool.sqrt_price / growth;
    PoolState fee_free = pool;
    fee_free.fee_bps = 0;
    const SwapResult result = swap_to_sqrt_price(fee_free, direction, target);
    Depth depth;
    depth.amount = result.fill.amount_in;
    depth.saturated = result.pool.sqrt_price != target || result.pool.active_liquidity == 0;
    return depth;
}

Real recompute_active_liquidity(const PoolState& pool) {
    Real total = 0;
    for (const auto& [tick, info] : pool.tick_table) {
        if (tick > pool.current_tick) break;
        total += info.liquidity_net;
    }
    return total;
}

void check_invariants(const PoolState& pool) {
    if (pool.sqrt_price <= 0) throw InvalidArgument("sqrt price not positive");
    if (pool.fee_bps < 0 || pool.fee_bps >= kMaxFeeBps) throw InvalidArgument("fee out of range");
    if (recompute_active_liquidity(pool) != pool.active_liquidity) {
        throw InvalidArgument("cached active liquidity disagrees with tick table");
    }
    Real running = 0;
    for (const auto& [tick, info] : pool.tick_table) {
        if (tick % pool.tick_spacing != 0) throw InvalidArgument("tick not aligned to spacing");
        if (info.sqrt_price != sqrt_price_at_tick(tick)) throw InvalidArgument("stale cached tick price");
        running += info.liquidity_net;
        if (running < 0) throw InvalidArgument("negative liquidity above tick " + std::to_string(tick));
    }
    if (pool.sqrt_price < sqrt_price_at_tick(pool.current_tick) ||
        (pool.current_tick < kMaxTick && pool.sqrt_price > sqrt_price_at_tick(pool.current_tick + 1))) {
        throw InvalidArgument("current tick does not contain the sqrt price");
    }
}

PoolState apply_event(const PoolState& pool, const PoolEvent& event) {
    if (const auto* swap = std::get_if<SwapEvent>(&event)) {
        return swap_exact_in(pool, swap->direction, swap->amount_in).pool;
    }
    const auto& change = std::get<LiquidityChange>(event);
    return apply_liquidity_event(pool, change.action, change.lower_tick, change.upper_tick, change.liquidity);
}

PoolState reconstruct_state(const PoolState& initial, std::span<const PoolEvent> events,
                            std::int64_t block_height) {
    auto key_of = [](const PoolEvent& e) {
        return std::visit([](const auto& v) { return std::make_pair(v.block, v.log_index); }, e);
    };
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (!(key_of(events[i - 1]) < key_of(events[i]))) {
            throw SchemaError("event log out of order at position " + std::to_string(i));
        }
    }
    PoolState state = initial;
    for (const PoolEvent& event : events) {
        if (key_of(event).first >= block_height) break;
        state = apply_event(state, event);
    }
    return state;
}

}  // namespace dexcost
