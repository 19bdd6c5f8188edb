#pragma once

// On-disk dataset: one directory of CSV tables plus manifest.json.
//
//   swaps.csv             block,tx_index,tx_hash,log_index,direction,kind,amount,limit,deadline,
//                         gas_used,gas_price_wei,status,amount_in,amount_out
//   quotes.csv            tx_hash,log_index,quote_block,quoted_price,mid_price,price_impact_bps,
//                         lp_fee_bps,quoted_amount_in,quoted_amount_out
//   mempool.csv           tx_hash,log_index,sign_time,first_seen
//   liquidity_events.csv  block,tx_index,tx_hash,log_index,action,lower_tick,upper_tick,liquidity
//   builders.csv          block,timestamp,builder
//   pool_prices.csv       timestamp,price
//   eth_usd.csv           block,eth_usd
//
// Amounts, limits, liquidity and prices are decimal strings with 18 fractional
// digits. tx_index orders swaps and liquidity events within a block. A
// transaction is public iff its mempool row has first_seen at or before the
// block timestamp. Liquidity events below first_block build the starting pool.

#include "dexcost/chain.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace dexcost {

inline constexpr int kSchemaVersion = 1;

struct SwapRow {
    std::int64_t block = 0;
    int tx_index = 0;
    std::string tx_hash;
    int log_index = 0;
    Direction direction = Direction::zero_for_one;
    TradeKind kind = TradeKind::exact_in;
    Real amount;
    Real limit;
    double deadline = 0;
    std::int64_t gas_used = 0;
    double gas_price_wei = 0;
    SwapStatus status = SwapStatus::succeeded;
    Real amount_in;
    Real amount_out;

    TxId id() const { return {tx_hash, log_index}; }
};

struct QuoteRow {
    std::string tx_hash;
    int log_index = 0;
    Quote quote;
};

struct MempoolRow {
    std::string tx_hash;
    int log_index = 0;
    std::optional<double> sign_time;
    std::optional<double> first_seen;
};

struct LiquidityRow {
    std::int64_t block = 0;
    int tx_index = 0;
    std::string tx_hash;
    int log_index = 0;
    LiquidityAction action = LiquidityAction::mint;
    int lower_tick = 0;
    int upper_tick = 0;
    Real liquidity;
};

struct BlockRow {
    std::int64_t block = 0;
    double timestamp = 0;
    std::string builder;
};

struct PoolPriceRow {
    double timestamp = 0;
    Real price;  // token1 per token0
};

struct EthUsdRow {
    std::int64_t block = 0;
    Real eth_usd;
};

struct Manifest {
    int schema_version = kSchemaVersion;
    std::int64_t first_block = 0;
    std::int64_t last_block = -1;
    Real genesis_sqrt_price = 1;
    std::map<std::string, std::size_t> row_counts;  // file name -> data rows
};

struct Dataset {
    Manifest manifest;
    std::vector<SwapRow> swaps;
    std::vector<QuoteRow> quotes;
    std::vector<MempoolRow> mempool;
    std::vector<LiquidityRow> liquidity;
    std::vector<BlockRow> blocks;
    std::vector<PoolPriceRow> pool_prices;
    std::vector<EthUsdRow> eth_usd;
    std::vector<std::string> warnings;
};

const char* to_string(Direction d);
const char* to_string(TradeKind k);
const char* to_string(SwapStatus s);
const char* to_string(LiquidityAction a);

// Reads and validates a dataset directory. Row-level problems raise SchemaError
// and broken references JoinError, both naming file and line.
Dataset load_dataset(const std::filesystem::path& dir);

// Structural checks on an in-memory dataset: the block range
// covered gap-free by builders.csv, unique ids and positions, and the
// one-quote / one-mempool-row join. Returns warnings.
std::vector<std::string> validate_dataset(const Dataset& dataset);

// Writes every table and a manifest with fresh row counts.
void write_dataset(const Dataset& dataset, const std::filesystem::path& dir);

struct PoolConfig {
    int fee_bps = 5;
    int tick_spacing = 10;
};

// A block rebuilt from the tables, with where each position came from.
struct ReplayedBlock {
    BlockRecord record;                              // settled
    std::vector<int> tx_indices;                     // per position
    std::vector<std::optional<std::size_t>> swap_rows;  // per position, index into Dataset::swaps
    std::optional<double> eth_usd;
    PoolState end_pool;
};

struct ReplayOptions {
    bool check_recorded = true;  // recorded status and amounts must match the replay
    bool check_deadline = false;
};

// Folds the pre-range liquidity events into the genesis pool, then settles each
// block in the declared range in order, carrying the pool forward. Mismatches
// with recorded outcomes raise ReplayMismatch.
std::vector<ReplayedBlock> replay_dataset(const Dataset& dataset, const PoolConfig& pool,
                                          const ReplayOptions& options = {});

// Copies replayed statuses and amounts into the swap rows.
void record_outcomes(Dataset& dataset, const std::vector<ReplayedBlock>& blocks);

// Largest 18-digit decimal not above |value|, with value's sign.
Real quantize_toward_zero(const Real& value);

}  // namespace dexcost
