#include "dexcost/chain.hpp"
#include "dexcost/errors.hpp"

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace dexcost;
using dexcost::testing::full_range_pool;

namespace {

SwapTx sell(const std::string& hash, const Real& amount, SwapStatus status = SwapStatus::succeeded) {
    SwapTx s;
    s.tx_hash = hash;
    s.trade = {Direction::zero_for_one, TradeKind::exact_in, amount};
    s.limit = 0;
    s.status = status;
    return s;
}

}  // namespace

TEST_CASE("trades_of keeps succeeded swaps in order") {
    BlockRecord block;
    block.initial_pool = full_range_pool(1000);
    CHECK(trades_of(block).empty());

    block.txs = {sell("0xa", 10), sell("0xb", 10, SwapStatus::failed_tolerance)};
    CHECK(trades_of(block).size() == 1);

    block.txs = {sell("0xa", 10), sell("0xb", 5), sell("0xc", 1)};
    settle_block(block);
    const auto trades = trades_of(block);
    REQUIRE(trades.size() == 3);
    CHECK(trades[0].parent.tx_hash == "0xa");
    CHECK(trades[1].parent.tx_hash == "0xb");
    CHECK(trades[2].parent.tx_hash == "0xc");
    for (int i = 0; i < 3; ++i) CHECK(trades[i].intra_block_index == i);
    CHECK(trade_index_at(block, 2) == std::optional<std::size_t>(2));
}

TEST_CASE("settle_block enforces limits against the running pool state") {
    BlockRecord block;
    block.initial_pool = full_range_pool(1000);
    SwapTx first = sell("0xa", 10);
    SwapTx second = sell("0xb", 10);
    // Fresh top-of-block output for 10 in is 9.90099; the second sell only gets 9.7069.
    second.limit = Real("9.8");
    block.txs = {first, second};
    settle_block(block);
    CHECK(std::get<SwapTx>(block.txs[0]).status == SwapStatus::succeeded);
    CHECK(std::get<SwapTx>(block.txs[1]).status == SwapStatus::failed_tolerance);
    CHECK(std::get<SwapTx>(block.txs[1]).amount_out == 0);

    // Every trade's parent exists and succeeded, and its fill respects its limit.
    for (const auto& t : trades_of(block)) {
        const auto& parent = std::get<SwapTx>(block.txs[t.intra_block_index]);
        CHECK(parent.id() == t.parent);
        CHECK(parent.status == SwapStatus::succeeded);
        CHECK(t.amount_out >= parent.limit);
    }
}

TEST_CASE("deadline is only enforced on request") {
    BlockRecord block;
    block.timestamp = 100;
    block.initial_pool = full_range_pool(1000);
    SwapTx s = sell("0xa", 1);
    s.deadline = 50;
    block.txs = {s};
    settle_block(block);
    CHECK(std::get<SwapTx>(block.txs[0]).status == SwapStatus::succeeded);
    settle_block(block, {.check_deadline = true});
    CHECK(std::get<SwapTx>(block.txs[0]).status == SwapStatus::failed_other);
}

TEST_CASE("latency_of") {
    BlockRecord block;
    block.timestamp = 1000;
    SwapTx s = sell("0xa", 1);
    CHECK_THROWS_AS(latency_of(s, block), MissingField);

    s.sign_time = 1000;
    auto lat = latency_of(s, block);
    CHECK(lat.seconds == 0);
    CHECK(lat.log_seconds == 0);

    s.sign_time = 988;
    lat = latency_of(s, block);
    CHECK(lat.seconds == 12);
    CHECK(lat.log_seconds == doctest::Approx(std::log(13.0)));

    s.sign_time = 1001;
    CHECK_THROWS_AS(latency_of(s, block), DomainError);
}

TEST_CASE("tolerance and limit are inverse") {
    const PoolState pool = full_range_pool(1000, 5);
    for (TradeKind kind : {TradeKind::exact_in, TradeKind::exact_out}) {
        const Quote q = quote(pool, {Direction::zero_for_one, kind, 3});
        for (double tol : {0.0, 5.0, 50.0, 123.5}) {
            const Real limit = limit_from_quote(q, kind, tol);
            CHECK(std::abs(tolerance_from_limit(q, kind, limit) - tol) < 1e-9);
        }
    }
}
