#include "dexcost/dataset.hpp"

#include "dexcost/csv.hpp"
#include "dexcost/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <tuple>

namespace dexcost {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<std::string> kSwapColumns{"block",   "tx_index", "tx_hash",       "log_index", "direction",
                                            "kind",    "amount",   "limit",         "deadline",  "gas_used",
                                            "gas_price_wei", "status", "amount_in", "amount_out"};
const std::vector<std::string> kQuoteColumns{"tx_hash",          "log_index",   "quote_block",     "quoted_price",
                                             "mid_price",        "price_impact_bps", "lp_fee_bps", "quoted_amount_in",
                                             "quoted_amount_out"};
const std::vector<std::string> kMempoolColumns{"tx_hash", "log_index", "sign_time", "first_seen"};
const std::vector<std::string> kLiquidityColumns{"block",  "tx_index",   "tx_hash",    "log_index",
                                                 "action", "lower_tick", "upper_tick", "liquidity"};
const std::vector<std::string> kBlockColumns{"block", "timestamp", "builder"};
const std::vector<std::string> kPoolPriceColumns{"timestamp", "price"};
const std::vector<std::string> kEthUsdColumns{"block", "eth_usd"};

constexpr const char* kSwapsFile = "swaps.csv";
constexpr const char* kQuotesFile = "quotes.csv";
constexpr const char* kMempoolFile = "mempool.csv";
constexpr const char* kLiquidityFile = "liquidity_events.csv";
constexpr const char* kBlocksFile = "builders.csv";
constexpr const char* kPoolPricesFile = "pool_prices.csv";
constexpr const char* kEthUsdFile = "eth_usd.csv";
constexpr const char* kManifestFile = "manifest.json";

// Data rows start on line 2; blank lines are rejected, so row i sits on line i + 2.
std::string at_row(const char* file, std::size_t index) { return std::string(file) + ":" + std::to_string(index + 2); }

Direction parse_direction(std::string_view s) {
    if (s == "zero_for_one") return Direction::zero_for_one;
    if (s == "one_for_zero") return Direction::one_for_zero;
    throw SchemaError("direction: unknown value '" + std::string(s) + "'");
}

TradeKind parse_kind(std::string_view s) {
    if (s == "exact_in") return TradeKind::exact_in;
    if (s == "exact_out") return TradeKind::exact_out;
    throw SchemaError("kind: unknown value '" + std::string(s) + "'");
}

SwapStatus parse_status(std::string_view s) {
    if (s == "succeeded") return SwapStatus::succeeded;
    if (s == "failed_tolerance") return SwapStatus::failed_tolerance;
    if (s == "failed_other") return SwapStatus::failed_other;
    throw SchemaError("status: unknown value '" + std::string(s) + "'");
}

LiquidityAction parse_action(std::string_view s) {
    if (s == "mint") return LiquidityAction::mint;
    if (s == "burn") return LiquidityAction::burn;
    throw SchemaError("action: unknown value '" + std::string(s) + "'");
}

Real parse_amount(std::string_view s, std::string_view what) {
    try {
        return parse_decimal(s);
    } catch (const SchemaError&) {
        throw SchemaError(std::string(what) + ": not a decimal: '" + std::string(s) + "'");
    }
}

Real parse_nonnegative(std::string_view s, std::string_view what) {
    Real v = parse_amount(s, what);
    if (v < 0) throw SchemaError(std::string(what) + ": negative");
    return v;
}

int parse_int32(std::string_view s, std::string_view what) {
    const std::int64_t v = parse_int_field(s, what);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw SchemaError(std::string(what) + ": out of range");
    }
    return static_cast<int>(v);
}

std::string dec(const Real& v) { return to_decimal(v); }

// Runs `parse` on every row of `file`, prefixing errors with file:line.
template <class Row, class Parse>
std::vector<Row> load_table(const fs::path& dir, const char* file, const std::vector<std::string>& columns,
                            std::vector<std::string>& warnings, Parse parse) {
    const fs::path path = dir / file;
    if (!fs::exists(path)) {
        throw SchemaError(std::string(file) + ": missing");
    }
    const CsvTable table = read_csv(path, columns);
    if (table.empty_file) warnings.push_back(std::string(file) + ": empty file");
    std::vector<Row> rows;
    rows.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        try {
            rows.push_back(parse(table.rows[i]));
        } catch (const SchemaError& e) {
            throw SchemaError(std::string(file) + ":" + std::to_string(table.lines[i]) + ": " + e.what());
        }
    }
    return rows;
}

SwapRow parse_swap(const std::vector<std::string>& f) {
    SwapRow r;
    r.block = parse_int_field(f[0], "block");
    r.tx_index = parse_int32(f[1], "tx_index");
    r.tx_hash = f[2];
    if (r.tx_hash.empty()) throw SchemaError("tx_hash: empty");
    r.log_index = parse_int32(f[3], "log_index");
    r.direction = parse_direction(f[4]);
    r.kind = parse_kind(f[5]);
    r.amount = parse_nonnegative(f[6], "amount");
    if (r.amount == 0) throw SchemaError("amount: must be positive");
    r.limit = parse_nonnegative(f[7], "limit");
    r.deadline = parse_double_field(f[8], "deadline");
    r.gas_used = parse_int_field(f[9], "gas_used");
    r.gas_price_wei = parse_double_field(f[10], "gas_price_wei");
    if (r.gas_used < 0 || r.gas_price_wei < 0) throw SchemaError("gas: negative");
    r.status = parse_status(f[11]);
    r.amount_in = parse_nonnegative(f[12], "amount_in");
    r.amount_out = parse_nonnegative(f[13], "amount_out");
    return r;
}

QuoteRow parse_quote(const std::vector<std::string>& f) {
    QuoteRow r;
    r.tx_hash = f[0];
    r.log_index = parse_int32(f[1], "log_index");
    r.quote.quote_block = parse_int_field(f[2], "quote_block");
    r.quote.quoted_price = parse_nonnegative(f[3], "quoted_price");
    r.quote.mid_price = parse_nonnegative(f[4], "mid_price");
    r.quote.price_impact_bps = parse_double_field(f[5], "price_impact_bps");
    r.quote.lp_fee_bps = parse_double_field(f[6], "lp_fee_bps");
    r.quote.quoted_amount_in = parse_nonnegative(f[7], "quoted_amount_in");
    r.quote.quoted_amount_out = parse_nonnegative(f[8], "quoted_amount_out");
    if (r.quote.quoted_price == 0) throw SchemaError("quoted_price: must be positive");
    return r;
}

MempoolRow parse_mempool(const std::vector<std::string>& f) {
    MempoolRow r;
    r.tx_hash = f[0];
    r.log_index = parse_int32(f[1], "log_index");
    r.sign_time = parse_optional_double(f[2], "sign_time");
    r.first_seen = parse_optional_double(f[3], "first_seen");
    return r;
}

LiquidityRow parse_liquidity(const std::vector<std::string>& f) {
    LiquidityRow r;
    r.block = parse_int_field(f[0], "block");
    r.tx_index = parse_int32(f[1], "tx_index");
    r.tx_hash = f[2];
    if (r.tx_hash.empty()) throw SchemaError("tx_hash: empty");
    r.log_index = parse_int32(f[3], "log_index");
    r.action = parse_action(f[4]);
    r.lower_tick = parse_int32(f[5], "lower_tick");
    r.upper_tick = parse_int32(f[6], "upper_tick");
    if (r.lower_tick >= r.upper_tick) throw SchemaError("lower_tick must be below upper_tick");
    r.liquidity = parse_nonnegative(f[7], "liquidity");
    if (r.liquidity == 0) throw SchemaError("liquidity: must be positive");
    return r;
}

BlockRow parse_block(const std::vector<std::string>& f) {
    return {parse_int_field(f[0], "block"), parse_double_field(f[1], "timestamp"), f[2]};
}

PoolPriceRow parse_pool_price(const std::vector<std::string>& f) {
    PoolPriceRow r{parse_double_field(f[0], "timestamp"), parse_nonnegative(f[1], "price")};
    if (r.price == 0) throw SchemaError("price: must be positive");
    return r;
}

EthUsdRow parse_eth_usd(const std::vector<std::string>& f) {
    EthUsdRow r{parse_int_field(f[0], "block"), parse_nonnegative(f[1], "eth_usd")};
    if (r.eth_usd == 0) throw SchemaError("eth_usd: must be positive");
    return r;
}

Manifest load_manifest(const fs::path& dir, std::vector<std::string>& warnings) {
    const fs::path path = dir / kManifestFile;
    if (!fs::exists(path)) {
        throw SchemaError(std::string(kManifestFile) + ": missing");
    }
    Manifest m;
    if (fs::file_size(path) == 0) {
        warnings.push_back(std::string(kManifestFile) + ": empty file");
        m.last_block = m.first_block - 1;
        return m;
    }
    std::ifstream in(path);
    try {
        const json j = json::parse(in);
        m.schema_version = j.at("schema_version").get<int>();
        m.first_block = j.at("first_block").get<std::int64_t>();
        m.last_block = j.at("last_block").get<std::int64_t>();
        m.genesis_sqrt_price = parse_decimal(j.at("genesis_sqrt_price").get<std::string>());
        for (const auto& [file, entry] : j.at("files").items()) {
            if (entry.at("schema_version").get<int>() != kSchemaVersion) {
                throw SchemaError(file + ": unsupported schema_version");
            }
            m.row_counts[file] = entry.at("rows").get<std::size_t>();
        }
    } catch (const json::exception& e) {
        throw SchemaError(std::string(kManifestFile) + ": " + e.what());
    } catch (const SchemaError& e) {
        throw SchemaError(std::string(kManifestFile) + ": " + e.what());
    }
    if (m.schema_version != kSchemaVersion) {
        throw SchemaError(std::string(kManifestFile) + ": unsupported schema_version " + std::to_string(m.schema_version));
    }
    if (m.genesis_sqrt_price <= 0) {
        throw SchemaError(std::string(kManifestFile) + ": genesis_sqrt_price must be positive");
    }
    return m;
}

template <class Row>
void write_table(const fs::path& dir, const char* file, const std::vector<std::string>& columns,
                 const std::vector<Row>& rows, std::vector<std::string> (*fields)(const Row&)) {
    std::ofstream out(dir / file, std::ios::binary);
    if (!out) throw Error(std::string("cannot write ") + (dir / file).string());
    write_csv_row(out, columns);
    for (const Row& r : rows) write_csv_row(out, fields(r));
}

std::vector<std::string> swap_fields(const SwapRow& r) {
    return {std::to_string(r.block),  std::to_string(r.tx_index),  r.tx_hash,
            std::to_string(r.log_index), to_string(r.direction), to_string(r.kind),
            dec(r.amount),            dec(r.limit),                format_double(r.deadline),
            std::to_string(r.gas_used), format_double(r.gas_price_wei), to_string(r.status),
            dec(r.amount_in),         dec(r.amount_out)};
}

std::vector<std::string> quote_fields(const QuoteRow& r) {
    const Quote& q = r.quote;
    return {r.tx_hash,          std::to_string(r.log_index),     std::to_string(q.quote_block),
            dec(q.quoted_price), dec(q.mid_price),               format_double(q.price_impact_bps),
            format_double(q.lp_fee_bps), dec(q.quoted_amount_in), dec(q.quoted_amount_out)};
}

std::vector<std::string> mempool_fields(const MempoolRow& r) {
    return {r.tx_hash, std::to_string(r.log_index), r.sign_time ? format_double(*r.sign_time) : "",
            r.first_seen ? format_double(*r.first_seen) : ""};
}

std::vector<std::string> liquidity_fields(const LiquidityRow& r) {
    return {std::to_string(r.block),      std::to_string(r.tx_index),   r.tx_hash,
            std::to_string(r.log_index),  to_string(r.action),          std::to_string(r.lower_tick),
            std::to_string(r.upper_tick), dec(r.liquidity)};
}

std::vector<std::string> block_fields(const BlockRow& r) {
    return {std::to_string(r.block), format_double(r.timestamp), r.builder};
}

std::vector<std::string> pool_price_fields(const PoolPriceRow& r) { return {format_double(r.timestamp), dec(r.price)}; }

std::vector<std::string> eth_usd_fields(const EthUsdRow& r) { return {std::to_string(r.block), dec(r.eth_usd)}; }

}  // namespace

const char* to_string(Direction d) { return d == Direction::zero_for_one ? "zero_for_one" : "one_for_zero"; }

const char* to_string(TradeKind k) { return k == TradeKind::exact_in ? "exact_in" : "exact_out"; }

const char* to_string(SwapStatus s) {
    switch (s) {
        case SwapStatus::succeeded: return "succeeded";
        case SwapStatus::failed_tolerance: return "failed_tolerance";
        case SwapStatus::failed_other: return "failed_other";
    }
    return "?";
}

const char* to_string(LiquidityAction a) { return a == LiquidityAction::mint ? "mint" : "burn"; }

Dataset load_dataset(const fs::path& dir) {
    if (!fs::is_directory(dir)) {
        throw SchemaError(dir.string() + ": not a directory");
    }
    Dataset d;
    d.manifest = load_manifest(dir, d.warnings);
    d.swaps = load_table<SwapRow>(dir, kSwapsFile, kSwapColumns, d.warnings, parse_swap);
    d.quotes = load_table<QuoteRow>(dir, kQuotesFile, kQuoteColumns, d.warnings, parse_quote);
    d.mempool = load_table<MempoolRow>(dir, kMempoolFile, kMempoolColumns, d.warnings, parse_mempool);
    d.liquidity = load_table<LiquidityRow>(dir, kLiquidityFile, kLiquidityColumns, d.warnings, parse_liquidity);
    d.blocks = load_table<BlockRow>(dir, kBlocksFile, kBlockColumns, d.warnings, parse_block);
    d.pool_prices = load_table<PoolPriceRow>(dir, kPoolPricesFile, kPoolPriceColumns, d.warnings, parse_pool_price);
    d.eth_usd = load_table<EthUsdRow>(dir, kEthUsdFile, kEthUsdColumns, d.warnings, parse_eth_usd);

    const std::map<std::string, std::size_t> actual{
        {kSwapsFile, d.swaps.size()},        {kQuotesFile, d.quotes.size()},   {kMempoolFile, d.mempool.size()},
        {kLiquidityFile, d.liquidity.size()}, {kBlocksFile, d.blocks.size()},   {kPoolPricesFile, d.pool_prices.size()},
        {kEthUsdFile, d.eth_usd.size()}};
    for (const auto& [file, declared] : d.manifest.row_counts) {
        const auto it = actual.find(file);
        if (it == actual.end()) {
            throw SchemaError(std::string(kManifestFile) + ": unknown file '" + file + "'");
        }
        if (it->second != declared) {
            throw SchemaError(std::string(kManifestFile) + ": " + file + " declares " + std::to_string(declared) +
                              " rows, found " + std::to_string(it->second));
        }
    }

    auto more = validate_dataset(d);
    d.warnings.insert(d.warnings.end(), more.begin(), more.end());
    return d;
}

std::vector<std::string> validate_dataset(const Dataset& d) {
    std::vector<std::string> warnings;
    const Manifest& m = d.manifest;
    if (m.last_block < m.first_block - 1) {
        throw SchemaError(std::string(kManifestFile) + ": last_block below first_block");
    }
    auto in_range = [&](std::int64_t h) { return h >= m.first_block && h <= m.last_block; };

    std::set<std::int64_t> heights;
    for (std::size_t i = 0; i < d.blocks.size(); ++i) {
        const std::int64_t h = d.blocks[i].block;
        if (!in_range(h)) throw SchemaError(at_row(kBlocksFile, i) + ": block " + std::to_string(h) + " outside the declared range");
        if (!heights.insert(h).second) throw SchemaError(at_row(kBlocksFile, i) + ": duplicate block " + std::to_string(h));
    }
    for (std::int64_t h = m.first_block; h <= m.last_block; ++h) {
        if (!heights.count(h)) throw SchemaError(std::string(kBlocksFile) + ": missing block " + std::to_string(h));
    }

    std::set<TxId> ids;
    std::set<std::pair<std::int64_t, int>> positions;
    for (std::size_t i = 0; i < d.swaps.size(); ++i) {
        const SwapRow& s = d.swaps[i];
        if (!in_range(s.block)) {
            throw JoinError(at_row(kSwapsFile, i) + ": block " + std::to_string(s.block) + " outside the declared range");
        }
        if (!ids.insert(s.id()).second) {
            throw JoinError(at_row(kSwapsFile, i) + ": duplicate (tx_hash, log_index) (" + s.tx_hash + ", " +
                            std::to_string(s.log_index) + ")");
        }
        if (!positions.insert({s.block, s.tx_index}).second) {
            throw SchemaError(at_row(kSwapsFile, i) + ": duplicate tx_index " + std::to_string(s.tx_index) + " in block " +
                              std::to_string(s.block));
        }
    }
    const std::set<TxId> swap_ids = ids;
    for (std::size_t i = 0; i < d.liquidity.size(); ++i) {
        const LiquidityRow& l = d.liquidity[i];
        if (l.block > m.last_block) {
            throw JoinError(at_row(kLiquidityFile, i) + ": block " + std::to_string(l.block) + " after the declared range");
        }
        if (!ids.insert({l.tx_hash, l.log_index}).second) {
            throw JoinError(at_row(kLiquidityFile, i) + ": duplicate (tx_hash, log_index) (" + l.tx_hash + ", " +
                            std::to_string(l.log_index) + ")");
        }
        if (!positions.insert({l.block, l.tx_index}).second) {
            throw SchemaError(at_row(kLiquidityFile, i) + ": duplicate tx_index " + std::to_string(l.tx_index) +
                              " in block " + std::to_string(l.block));
        }
    }

    std::set<TxId> quoted;
    for (std::size_t i = 0; i < d.quotes.size(); ++i) {
        const TxId id{d.quotes[i].tx_hash, d.quotes[i].log_index};
        if (!quoted.insert(id).second) throw JoinError(at_row(kQuotesFile, i) + ": second quote for " + id.tx_hash);
        if (!swap_ids.count(id)) warnings.push_back(at_row(kQuotesFile, i) + ": quote for unknown swap " + id.tx_hash);
    }
    std::set<TxId> seen;
    for (std::size_t i = 0; i < d.mempool.size(); ++i) {
        const TxId id{d.mempool[i].tx_hash, d.mempool[i].log_index};
        if (!seen.insert(id).second) throw JoinError(at_row(kMempoolFile, i) + ": second mempool row for " + id.tx_hash);
        if (!ids.count(id)) warnings.push_back(at_row(kMempoolFile, i) + ": mempool row for unknown transaction " + id.tx_hash);
    }

    std::set<std::int64_t> priced;
    for (std::size_t i = 0; i < d.eth_usd.size(); ++i) {
        if (!priced.insert(d.eth_usd[i].block).second) {
            throw SchemaError(at_row(kEthUsdFile, i) + ": duplicate block " + std::to_string(d.eth_usd[i].block));
        }
    }
    for (std::size_t i = 1; i < d.pool_prices.size(); ++i) {
        if (!(d.pool_prices[i].timestamp > d.pool_prices[i - 1].timestamp)) {
            throw SchemaError(at_row(kPoolPricesFile, i) + ": timestamps must increase");
        }
    }
    return warnings;
}

void write_dataset(const Dataset& d, const fs::path& dir) {
    fs::create_directories(dir);
    write_table(dir, kSwapsFile, kSwapColumns, d.swaps, swap_fields);
    write_table(dir, kQuotesFile, kQuoteColumns, d.quotes, quote_fields);
    write_table(dir, kMempoolFile, kMempoolColumns, d.mempool, mempool_fields);
    write_table(dir, kLiquidityFile, kLiquidityColumns, d.liquidity, liquidity_fields);
    write_table(dir, kBlocksFile, kBlockColumns, d.blocks, block_fields);
    write_table(dir, kPoolPricesFile, kPoolPriceColumns, d.pool_prices, pool_price_fields);
    write_table(dir, kEthUsdFile, kEthUsdColumns, d.eth_usd, eth_usd_fields);

    json files;
    auto entry = [](std::size_t rows) { return json{{"schema_version", kSchemaVersion}, {"rows", rows}}; };
    files[kSwapsFile] = entry(d.swaps.size());
    files[kQuotesFile] = entry(d.quotes.size());
    files[kMempoolFile] = entry(d.mempool.size());
    files[kLiquidityFile] = entry(d.liquidity.size());
    files[kBlocksFile] = entry(d.blocks.size());
    files[kPoolPricesFile] = entry(d.pool_prices.size());
    files[kEthUsdFile] = entry(d.eth_usd.size());
    const json manifest{{"schema_version", kSchemaVersion},
                        {"first_block", d.manifest.first_block},
                        {"last_block", d.manifest.last_block},
                        {"genesis_sqrt_price", dec(d.manifest.genesis_sqrt_price)},
                        {"files", files}};
    std::ofstream out(dir / kManifestFile, std::ios::binary);
    if (!out) throw Error("cannot write " + (dir / kManifestFile).string());
    out << manifest.dump(2) << '\n';
}

std::vector<ReplayedBlock> replay_dataset(const Dataset& d, const PoolConfig& config, const ReplayOptions& options) {
    std::map<TxId, const Quote*> quotes;
    for (const QuoteRow& q : d.quotes) quotes[{q.tx_hash, q.log_index}] = &q.quote;
    std::map<TxId, const MempoolRow*> mempool;
    for (const MempoolRow& r : d.mempool) mempool[{r.tx_hash, r.log_index}] = &r;
    std::map<std::int64_t, const BlockRow*> meta;
    for (const BlockRow& b : d.blocks) meta[b.block] = &b;
    std::map<std::int64_t, double> eth_usd;
    for (const EthUsdRow& e : d.eth_usd) eth_usd[e.block] = to_double(e.eth_usd);

    // Per block: (tx_index, swap row or liquidity row).
    using Entry = std::tuple<int, bool, std::size_t>;  // tx_index, is_swap, row
    std::map<std::int64_t, std::vector<Entry>> by_block;
    for (std::size_t i = 0; i < d.swaps.size(); ++i) by_block[d.swaps[i].block].emplace_back(d.swaps[i].tx_index, true, i);
    for (std::size_t i = 0; i < d.liquidity.size(); ++i) {
        by_block[d.liquidity[i].block].emplace_back(d.liquidity[i].tx_index, false, i);
    }
    for (auto& [h, entries] : by_block) std::sort(entries.begin(), entries.end());

    PoolState pool = new_pool(config.fee_bps, config.tick_spacing, d.manifest.genesis_sqrt_price, {});
    for (const auto& [h, entries] : by_block) {
        if (h >= d.manifest.first_block) break;
        for (const auto& [tx_index, is_swap, row] : entries) {
            if (is_swap) continue;
            const LiquidityRow& l = d.liquidity[row];
            pool = apply_liquidity_event(pool, l.action, l.lower_tick, l.upper_tick, l.liquidity);
        }
    }

    std::vector<ReplayedBlock> out;
    for (std::int64_t h = d.manifest.first_block; h <= d.manifest.last_block; ++h) {
        ReplayedBlock rb;
        BlockRecord& b = rb.record;
        b.height = h;
        const BlockRow* m = meta.at(h);
        b.timestamp = m->timestamp;
        b.builder = m->builder;
        b.initial_pool = pool;
        if (auto e = eth_usd.find(h); e != eth_usd.end()) rb.eth_usd = e->second;
        auto public_at = [&](const TxId& id) {
            const auto it = mempool.find(id);
            return it != mempool.end() && it->second->first_seen && *it->second->first_seen <= b.timestamp;
        };
        for (const auto& [tx_index, is_swap, row] : by_block[h]) {
            rb.tx_indices.push_back(tx_index);
            if (!is_swap) {
                const LiquidityRow& l = d.liquidity[row];
                LiquidityEvent ev;
                ev.tx_hash = l.tx_hash;
                ev.log_index = l.log_index;
                ev.kind = l.action;
                ev.lower_tick = l.lower_tick;
                ev.upper_tick = l.upper_tick;
                ev.liquidity = l.liquidity;
                ev.block = h;
                ev.intra_block_index = static_cast<int>(b.txs.size());
                ev.is_public = public_at(ev.id());
                b.txs.emplace_back(std::move(ev));
                rb.swap_rows.emplace_back(std::nullopt);
                continue;
            }
            const SwapRow& s = d.swaps[row];
            SwapTx tx;
            tx.tx_hash = s.tx_hash;
            tx.log_index = s.log_index;
            tx.trade = {s.direction, s.kind, s.amount};
            tx.limit = s.limit;
            tx.deadline = s.deadline;
            if (auto q = quotes.find(s.id()); q != quotes.end()) {
                tx.quote = *q->second;
                tx.slippage_tolerance_bps = tolerance_from_limit(*tx.quote, s.kind, s.limit);
            }
            if (auto mrow = mempool.find(s.id()); mrow != mempool.end()) {
                if (mrow->second->sign_time && *mrow->second->sign_time > b.timestamp) {
                    throw SchemaError(at_row(kMempoolFile, static_cast<std::size_t>(mrow->second - d.mempool.data())) +
                                      ": sign_time after the block timestamp");
                }
                tx.sign_time = mrow->second->sign_time;
                tx.mempool_first_seen = mrow->second->first_seen;
            }
            tx.is_public = public_at(s.id());
            tx.gas_used = s.gas_used;
            tx.gas_price_wei = s.gas_price_wei;
            tx.status = s.status == SwapStatus::failed_other ? SwapStatus::failed_other : SwapStatus::succeeded;
            b.txs.emplace_back(std::move(tx));
            rb.swap_rows.emplace_back(row);
        }
        pool = settle_block(b, {.check_deadline = options.check_deadline});
        rb.end_pool = pool;

        if (options.check_recorded) {
            for (std::size_t p = 0; p < b.txs.size(); ++p) {
                if (!rb.swap_rows[p]) continue;
                const SwapRow& s = d.swaps[*rb.swap_rows[p]];
                const SwapTx& tx = std::get<SwapTx>(b.txs[p]);
                const std::string where = at_row(kSwapsFile, *rb.swap_rows[p]);
                if (tx.status != s.status) {
                    throw ReplayMismatch(where + ": recorded status " + to_string(s.status) + ", replay gives " +
                                         to_string(tx.status));
                }
                if (dec(tx.amount_in) != dec(s.amount_in) || dec(tx.amount_out) != dec(s.amount_out)) {
                    throw ReplayMismatch(where + ": recorded amounts (" + dec(s.amount_in) + ", " + dec(s.amount_out) +
                                         ") differ from replay (" + dec(tx.amount_in) + ", " + dec(tx.amount_out) + ")");
                }
            }
        }
        out.push_back(std::move(rb));
    }
    return out;
}

void record_outcomes(Dataset& d, const std::vector<ReplayedBlock>& blocks) {
    for (const ReplayedBlock& rb : blocks) {
        for (std::size_t p = 0; p < rb.record.txs.size(); ++p) {
            if (!rb.swap_rows[p]) continue;
            const SwapTx& tx = std::get<SwapTx>(rb.record.txs[p]);
            SwapRow& s = d.swaps[*rb.swap_rows[p]];
            s.status = tx.status;
            s.amount_in = parse_decimal(dec(tx.amount_in));
            s.amount_out = parse_decimal(dec(tx.amount_out));
        }
    }
}

Real quantize_toward_zero(const Real& value) {
    static const Real ulp = parse_decimal("0.000000000000000001");
    const Real magnitude = mp::abs(value);
    Real q = parse_decimal(dec(magnitude));
    if (q > magnitude) q -= ulp;
    if (q < 0) q = 0;
    q = parse_decimal(dec(q));
    return value < 0 ? Real(-q) : q;
}

}  // namespace dexcost
