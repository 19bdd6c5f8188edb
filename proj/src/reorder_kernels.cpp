#include "dexcost/reorder_kernels.hpp"

#include "dexcost/errors.hpp"

#include <omp.h>

#include <random>

namespace dexcost {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw = rng();
    while (draw >= limit) draw = rng();
    return draw % bound;
}

const ReplayTrade& target_trade(std::span<const ReplayItem> items, std::size_t target) {
    if (target >= items.size()) {
        throw InvalidArgument("target index outside the item sequence");
    }
    const auto* trade = std::get_if<ReplayTrade>(&items[target]);
    if (trade == nullptr) {
        throw InvalidArgument("hypothetical price target must be a trade");
    }
    return *trade;
}

// Sums of the target's price over every ordered prefix that starts with `first`,
// bucketed by prefix length.
struct PrefixSums {
    std::vector<Real> by_length;
    bool saturated = false;
};

void walk_prefixes(const PoolState& state, std::span<const ReplayItem> items, const std::vector<std::size_t>& others,
                   std::vector<bool>& used, std::size_t depth, const ReplayTrade& target, PrefixSums& sums) {
    const PricePoint p = price_of(state, target);
    sums.by_length[depth] += p.price;
    sums.saturated = sums.saturated || p.saturated;
    for (std::size_t j = 0; j < others.size(); ++j) {
        if (used[j]) continue;
        used[j] = true;
        PoolState child = state;
        apply_item(child, items[others[j]]);
        walk_prefixes(child, items, others, used, depth + 1, target, sums);
        used[j] = false;
    }
}

PrefixSums branch_sums(const PoolState& initial, std::span<const ReplayItem> items,
                       const std::vector<std::size_t>& others, std::size_t first, const ReplayTrade& target) {
    PrefixSums sums{std::vector<Real>(others.size() + 1, Real(0)), false};
    std::vector<bool> used(others.size(), false);
    used[first] = true;
    PoolState state = initial;
    apply_item(state, items[others[first]]);
    walk_prefixes(state, items, others, used, 1, target, sums);
    return sums;
}

}  // namespace

void apply_item(PoolState& pool, const ReplayItem& item) {
    if (const auto* trade = std::get_if<ReplayTrade>(&item)) {
        pool = swap_exact_in(pool, trade->direction, trade->amount_in).pool;
        return;
    }
    const auto& liq = std::get<ReplayLiquidity>(item);
    if (liq.action == LiquidityAction::burn) {
        const auto it = pool.positions.find({liq.lower_tick, liq.upper_tick});
        if (it == pool.positions.end() || it->second < liq.liquidity) return;
    }
    pool = apply_liquidity_event(pool, liq.action, liq.lower_tick, liq.upper_tick, liq.liquidity);
}

PricePoint price_of(const PoolState& pool, const ReplayTrade& trade) {
    const SwapResult r = swap_exact_in(pool, trade.direction, trade.amount_in);
    if (r.fill.amount_out == 0 && trade.amount_in > 0) {
        return {std::numeric_limits<Real>::infinity(), true};
    }
    return {r.fill.avg_price, r.fill.saturated};
}

PricePoint price_in_sequence(const PoolState& initial, std::span<const ReplayItem> items, std::size_t target) {
    const ReplayTrade& trade = target_trade(items, target);
    PoolState state = initial;
    for (std::size_t i = 0; i < target; ++i) apply_item(state, items[i]);
    return price_of(state, trade);
}

ExpectedPrice expected_price_exact(const PoolState& initial, std::span<const ReplayItem> items, std::size_t target,
                                   Execution execution) {
    const ReplayTrade& trade = target_trade(items, target);
    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i != target) others.push_back(i);
    }
    const std::size_t m = others.size();

    std::vector<PrefixSums> branches(m);
    const int branch_count = static_cast<int>(m);
    if (execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (int b = 0; b < branch_count; ++b) {
            branches[b] = branch_sums(initial, items, others, static_cast<std::size_t>(b), trade);
        }
    } else {
        for (int b = 0; b < branch_count; ++b) {
            branches[b] = branch_sums(initial, items, others, static_cast<std::size_t>(b), trade);
        }
    }

    const PricePoint top = price_of(initial, trade);
    std::vector<Real> by_length(m + 1, Real(0));
    by_length[0] = top.price;
    bool saturated = top.saturated;
    for (const PrefixSums& branch : branches) {
        for (std::size_t k = 1; k <= m; ++k) by_length[k] += branch.by_length[k];
        saturated = saturated || branch.saturated;
    }

    // Target sits at position k with probability 1/n; the prefix before it is a
    // uniformly random ordered k-subset of the others, of which there are m!/(m-k)!.
    Real mean = 0;
    Real prefixes = 1;
    std::size_t orderings = 1;
    for (std::size_t k = 0; k <= m; ++k) {
        if (k > 0) prefixes *= static_cast<unsigned>(m - k + 1);
        mean += by_length[k] / prefixes;
        orderings *= (k + 1);
    }
    mean /= static_cast<unsigned>(m + 1);
    return {mean, 0.0, 0.0, orderings, saturated};
}

ExpectedPrice expected_price_sampled(const PoolState& initial, std::span<const ReplayItem> items, std::size_t target,
                                     std::size_t n_samples, std::uint64_t seed, Execution execution) {
    const ReplayTrade& trade = target_trade(items, target);
    if (n_samples == 0) {
        throw InvalidArgument("sampled mode needs at least one permutation");
    }
    const auto permutations = draw_permutations(items.size(), n_samples, seed);

    std::vector<PricePoint> prices(n_samples);
    auto evaluate = [&](std::size_t s) {
        PoolState state = initial;
        for (std::uint32_t idx : permutations[s]) {
            if (idx == target) break;
            apply_item(state, items[idx]);
        }
        prices[s] = price_of(state, trade);
    };
    const int count = static_cast<int>(n_samples);
    if (execution == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 8)
        for (int s = 0; s < count; ++s) evaluate(static_cast<std::size_t>(s));
    } else {
        for (int s = 0; s < count; ++s) evaluate(static_cast<std::size_t>(s));
    }

    // Deviations from the first draw, so identical prices average to that price exactly.
    const Real anchor = prices.front().price;
    Real deviation = 0;
    bool saturated = false;
    for (const PricePoint& p : prices) {
        deviation += p.price - anchor;
        saturated = saturated || p.saturated;
    }
    const Real mean = anchor + deviation / static_cast<unsigned>(n_samples);
    double stddev = 0;
    if (n_samples > 1) {
        Real ss = 0;
        for (const PricePoint& p : prices) ss += (p.price - mean) * (p.price - mean);
        stddev = to_double(mp::sqrt(ss / static_cast<unsigned>(n_samples - 1)));
    }
    const double se = stddev / std::sqrt(static_cast<double>(n_samples));
    return {mean, se, stddev, n_samples, saturated};
}

std::uint64_t stream_seed(std::uint64_t seed, std::int64_t block_height, std::size_t trade_index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(block_height));
    return splitmix64(h ^ static_cast<std::uint64_t>(trade_index));
}

std::vector<std::vector<std::uint32_t>> draw_permutations(std::size_t n_items, std::size_t n_samples,
                                                          std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::uint32_t>> out(n_samples, std::vector<std::uint32_t>(n_items));
    for (auto& perm : out) {
        for (std::size_t i = 0; i < n_items; ++i) perm[i] = static_cast<std::uint32_t>(i);
        for (std::size_t i = n_items; i > 1; --i) {
            const std::size_t j = bounded(rng, i);
            std::swap(perm[i - 1], perm[j]);
        }
    }
    return out;
}

}  // namespace dexcost
