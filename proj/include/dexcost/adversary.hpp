#pragma once

// Synthetic blocks with known ground truth: sandwiches, backruns, JIT
// liquidity and benign collisions, plus the profit-maximising sandwich solver.

#include "dexcost/chain.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace dexcost {

enum class ScenarioKind { sandwich, backrun, jit, collision };

const char* to_string(ScenarioKind kind);

// Expected sign (-1, 0, +1) of each victim decomposition component; unset means unconstrained.
struct GroundTruth {
    std::optional<int> total;
    std::optional<int> adversarial;
    std::optional<int> collision;
    std::optional<int> liquidity;
    std::optional<int> reordering;
};

struct Scenario {
    ScenarioKind kind = ScenarioKind::sandwich;
    BlockRecord block;  // settled
    std::size_t victim_position = 0;
    GroundTruth ground_truth;
    double attacker_pnl_usd = 0;
};

struct BlockMeta {
    std::int64_t height = 1;
    double timestamp = 1'700'000'000;
    std::string builder = "synthetic";
    double input_token_usd = 1;  // converts attacker pnl (in the victim's input token) to USD
};

// Public swap with a quote taken at `pool` and the limit its tolerance implies.
SwapTx make_swap(const PoolState& pool, std::string tx_hash, const Trade& trade, double tolerance_bps,
                 bool is_public = true, std::int64_t quote_block = 0);

struct SandwichOptions {
    bool include_gas = false;
    Real gas_cost;  // attacker gas for both legs, in the victim's input token
};

struct SandwichResult {
    Real frontrun_size;  // victim's input token, sold before the victim
    Real attacker_pnl;   // backrun proceeds minus frontrun input, same token
    Scenario scenario;
};

// Attacker profit from frontrunning `victim` with `frontrun` units and selling
// everything acquired right after it; nullopt if the victim's limit would break.
std::optional<Real> sandwich_profit(const PoolState& pool, const SwapTx& victim, const Real& frontrun,
                                    const SandwichOptions& options = {});

// Largest frontrun the victim's limit tolerates.
Real max_feasible_frontrun(const PoolState& pool, const SwapTx& victim);

// Golden-section search on the feasible range, endpoints included. Returns a
// zero-size attack when no frontrun is profitable.
SandwichResult optimal_sandwich(const PoolState& pool, const SwapTx& victim, const SandwichOptions& options = {},
                                const BlockMeta& meta = {});

// Victim first, then an arbitrage that moves the spot price (token1 per token0)
// to `external_mid`; with a fee the trade stops at the edge of the no-trade band.
Scenario gen_backrun(const PoolState& pool, const SwapTx& victim, const Real& external_mid, const BlockMeta& meta = {});

// Size of that arbitrage, in its input token; zero inside the no-trade band.
struct Arbitrage {
    Direction direction = Direction::zero_for_one;
    Real amount_in;
};
Arbitrage arbitrage_to(const PoolState& pool, const Real& external_mid);

// Mint `liquidity_multiple` times the active liquidity around the current tick
// before the victim and burn it right after.
Scenario gen_jit(const PoolState& pool, const SwapTx& victim, const Real& liquidity_multiple, const BlockMeta& meta = {});

struct SizeRange {
    Real low = 1;
    Real high = 10;
};

// `n_trades` public exact-in swaps quoted at top of block. Each trade sells token0
// with probability `direction_bias`; otherwise directions alternate, and
// alternating pairs share one size.
Scenario gen_collision_block(const PoolState& pool, std::size_t n_trades, double direction_bias, const SizeRange& sizes,
                             std::uint64_t seed, double tolerance_bps = 500, const BlockMeta& meta = {});

}  // namespace dexcost
