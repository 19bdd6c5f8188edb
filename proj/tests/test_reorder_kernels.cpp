#include "dexcost/reorder_kernels.hpp"
#include "dexcost/errors.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace dexcost;
using dexcost::testing::full_range_pool;
using dexcost::testing::rel_err;

namespace {

// Reference expectation: replay every one of the n! orderings.
Real brute_force_expected_price(const PoolState& initial, const std::vector<ReplayItem>& items, std::size_t target) {
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    Real sum = 0;
    std::size_t count = 0;
    do {
        std::vector<ReplayItem> seq;
        std::size_t pos = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            seq.push_back(items[order[i]]);
            if (order[i] == target) pos = i;
        }
        sum += price_in_sequence(initial, seq, pos).price;
        ++count;
    } while (std::next_permutation(order.begin(), order.end()));
    return sum / static_cast<unsigned>(count);
}

std::vector<ReplayItem> random_items(std::mt19937_64& rng, std::size_t n, bool with_liquidity) {
    std::uniform_real_distribution<double> size(0.5, 30.0);
    std::bernoulli_distribution coin(0.5);
    std::vector<ReplayItem> items;
    for (std::size_t i = 0; i < n; ++i) {
        if (with_liquidity && i % 3 == 2) {
            const auto action = coin(rng) ? LiquidityAction::mint : LiquidityAction::burn;
            items.push_back(ReplayLiquidity{action, -600, 600, Real(200)});
        } else {
            const auto dir = coin(rng) ? Direction::zero_for_one : Direction::one_for_zero;
            items.push_back(ReplayTrade{dir, Real(size(rng))});
        }
    }
    return items;
}

}  // namespace

TEST_CASE("two identical sells: second-position price and expectation") {
    const PoolState pool = full_range_pool(1000);
    const std::vector<ReplayItem> items{ReplayTrade{Direction::zero_for_one, 10}, ReplayTrade{Direction::zero_for_one, 10}};
    const Real first = price_in_sequence(pool, items, 0).price;
    const Real second = price_in_sequence(pool, items, 1).price;
    CHECK(rel_err(first, Real("1.01")) < Real("1e-30"));
    // (1010+10)(990.099 - dy) = 1e6
    const Real dy = Real(1000000) / 1010 - Real(1000000) / 1020;
    CHECK(rel_err(second, 10 / dy) < Real("1e-30"));
    CHECK(mp::abs(second - Real("1.03020")) < Real("1e-5"));

    const ExpectedPrice e = expected_price_exact(pool, items, 0);
    CHECK(e.orderings == 2);
    CHECK(rel_err(e.mean, (first + second) / 2) < Real("1e-30"));
}

TEST_CASE("exact kernel matches brute-force enumeration") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 12; ++trial) {
        const std::size_t n = 1 + trial % 5;
        const bool with_liquidity = trial % 2 == 1;
        PoolState pool = new_pool(trial % 3 == 0 ? 0 : 30, 60, 1,
                                  std::vector<Position>{{full_range_ticks(60).first, full_range_ticks(60).second, 1000},
                                                        {-1200, 1200, 500}});
        auto items = random_items(rng, n, with_liquidity);
        for (std::size_t t = 0; t < n; ++t) {
            if (!std::holds_alternative<ReplayTrade>(items[t])) continue;
            const Real expected = brute_force_expected_price(pool, items, t);
            const ExpectedPrice got = expected_price_exact(pool, items, t, Execution::serial);
            CHECK(rel_err(got.mean, expected) < Real("1e-30"));
        }
    }
}

TEST_CASE("serial and parallel kernels are bit-identical") {
    std::mt19937_64 rng(11);
    const PoolState pool = full_range_pool(1000, 5);
    const auto items = random_items(rng, 6, true);
    const ExpectedPrice a = expected_price_exact(pool, items, 0, Execution::serial);
    const ExpectedPrice b = expected_price_exact(pool, items, 0, Execution::parallel);
    CHECK(a.mean == b.mean);

    const ExpectedPrice c = expected_price_sampled(pool, items, 0, 200, 99, Execution::serial);
    const ExpectedPrice d = expected_price_sampled(pool, items, 0, 200, 99, Execution::parallel);
    CHECK(c.mean == d.mean);
    CHECK(c.std_error == d.std_error);
}

TEST_CASE("exact expectation is symmetric under relabeling") {
    const PoolState pool = full_range_pool(1000, 30);
    std::vector<ReplayItem> items{ReplayTrade{Direction::zero_for_one, 7}, ReplayTrade{Direction::one_for_zero, 4},
                                  ReplayTrade{Direction::zero_for_one, 2}, ReplayTrade{Direction::one_for_zero, 9}};
    const Real base = expected_price_exact(pool, items, 1).mean;
    std::vector<ReplayItem> shuffled{items[3], items[0], items[1], items[2]};
    CHECK(rel_err(expected_price_exact(pool, shuffled, 2).mean, base) < Real("1e-30"));
}

TEST_CASE("burns without a matching position are skipped") {
    PoolState pool = full_range_pool(1000);
    const PoolState before = pool;
    apply_item(pool, ReplayLiquidity{LiquidityAction::burn, -600, 600, 50});
    CHECK(pool == before);
    apply_item(pool, ReplayLiquidity{LiquidityAction::mint, -600, 600, 50});
    apply_item(pool, ReplayLiquidity{LiquidityAction::burn, -600, 600, 50});
    CHECK(pool.active_liquidity == before.active_liquidity);
}

TEST_CASE("sampled kernel tracks the exact value") {
    const PoolState pool = full_range_pool(1000);
    const std::vector<ReplayItem> items{ReplayTrade{Direction::zero_for_one, 10}, ReplayTrade{Direction::one_for_zero, 6},
                                        ReplayTrade{Direction::zero_for_one, 3}};
    const Real exact = to_double(expected_price_exact(pool, items, 0).mean);
    const ExpectedPrice s = expected_price_sampled(pool, items, 0, 16, stream_seed(1, 100, 0));
    CHECK(s.orderings == 16);
    CHECK(to_double(mp::abs(s.mean - exact)) <= 3 * s.std_error + 1e-15);
}

TEST_CASE("permutation draws are uniform and seed-stable") {
    CHECK(draw_permutations(5, 3, 42) == draw_permutations(5, 3, 42));
    CHECK(draw_permutations(5, 3, 42) != draw_permutations(5, 3, 43));
    CHECK(stream_seed(1, 2, 3) != stream_seed(1, 2, 4));
    CHECK(stream_seed(1, 2, 3) != stream_seed(1, 3, 3));

    // Each of the 3! orderings appears about 1/6 of the time.
    const auto perms = draw_permutations(3, 60000, 5);
    std::map<std::vector<std::uint32_t>, int> counts;
    for (const auto& p : perms) ++counts[p];
    CHECK(counts.size() == 6);
    for (const auto& [p, c] : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("target must be a trade inside the sequence") {
    const PoolState pool = full_range_pool(1000);
    const std::vector<ReplayItem> items{ReplayLiquidity{LiquidityAction::mint, -60, 60, 1}};
    CHECK_THROWS_AS(expected_price_exact(pool, items, 0), InvalidArgument);
    CHECK_THROWS_AS(expected_price_exact(pool, items, 3), InvalidArgument);
}
