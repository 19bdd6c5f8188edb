#include "dexcost/corpus.hpp"

#include "dexcost/csv.hpp"
#include "dexcost/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

namespace dexcost {

namespace {

std::string hash_for(const char* tag, std::int64_t height, std::size_t index) {
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) h = (h ^ ((v >> (8 * i)) & 0xff)) * 1099511628211ULL;
    };
    for (const char* c = tag; *c != '\0'; ++c) mix(static_cast<unsigned char>(*c));
    mix(static_cast<std::uint64_t>(height));
    mix(index);
    char buf[40];
    std::snprintf(buf, sizeof buf, "0x%016llx%016llx", static_cast<unsigned long long>(h),
                  static_cast<unsigned long long>(h * 0x9E3779B97F4A7C15ULL));
    return buf;
}

Real quantize_away_from_zero(const Real& value) {
    static const Real ulp = parse_decimal("0.000000000000000001");
    Real q = quantize_toward_zero(value);
    if (mp::abs(q) < mp::abs(value)) q = parse_decimal(to_decimal(value < 0 ? Real(q - ulp) : Real(q + ulp)));
    return q;
}

Real wire(const Real& v) { return parse_decimal(to_decimal(v)); }

Quote wire(const Quote& q) {
    Quote w = q;
    w.quoted_price = wire(q.quoted_price);
    w.mid_price = wire(q.mid_price);
    w.quoted_amount_in = wire(q.quoted_amount_in);
    w.quoted_amount_out = wire(q.quoted_amount_out);
    return w;
}

bool within_limit(const SwapTx& swap, const SwapFill& fill) {
    return swap.trade.kind == TradeKind::exact_in ? fill.amount_out >= swap.limit : fill.amount_in <= swap.limit;
}

class Builder {
public:
    Builder(const CorpusOptions& options) : options_(options), rng_(options.seed) {}

    std::mt19937_64& rng() { return rng_; }

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

    // Rewrites `block` (generated on `top`) in wire precision, appends its rows
    // and returns the settled pool after it. Public swaps are requoted at the top
    // of the block and private ones at their own execution state, as the generators do.
    PoolState add_block(const BlockRecord& block, const PoolState& top, Dataset& out) {
        BlockRecord q;
        q.height = block.height;
        q.timestamp = block.timestamp;
        q.builder = block.builder;
        q.initial_pool = top;
        PoolState state = top;
        for (std::size_t p = 0; p < block.txs.size(); ++p) {
            if (const auto* e = std::get_if<LiquidityEvent>(&block.txs[p])) {
                LiquidityEvent w = *e;
                w.log_index = static_cast<int>(p);
                w.liquidity = quantize_toward_zero(e->liquidity);
                w.intra_block_index = static_cast<int>(p);
                state = apply_liquidity_event(state, w.kind, w.lower_tick, w.upper_tick, w.liquidity);
                out.liquidity.push_back({block.height, static_cast<int>(p), w.tx_hash, w.log_index, w.kind, w.lower_tick,
                                         w.upper_tick, w.liquidity});
                q.txs.emplace_back(std::move(w));
                continue;
            }
            const SwapTx& s = std::get<SwapTx>(block.txs[p]);
            SwapTx w = s;
            w.log_index = static_cast<int>(p);
            w.trade.amount = quantize_toward_zero(s.trade.amount);
            const Quote exact = quote(s.is_public ? top : state, w.trade, block.height - 1);
            const Real limit = limit_from_quote(exact, w.trade.kind, s.slippage_tolerance_bps);
            w.quote = wire(exact);
            w.limit = w.trade.kind == TradeKind::exact_in ? quantize_toward_zero(limit) : quantize_away_from_zero(limit);
            w.slippage_tolerance_bps = tolerance_from_limit(*w.quote, w.trade.kind, w.limit);
            try {
                const SwapResult r = execute_trade(state, w.trade);
                if (!r.fill.saturated && within_limit(w, r.fill)) state = r.pool;
            } catch (const InsufficientLiquidity&) {
            }

            const double latency = std::round(uniform(1, 40) * 10) / 10;
            const double sign_time = block.timestamp - latency;
            out.mempool.push_back({w.tx_hash, w.log_index, sign_time,
                                   s.is_public ? std::optional<double>(sign_time + 0.5) : std::nullopt});
            out.quotes.push_back({w.tx_hash, w.log_index, *w.quote});

            SwapRow row;
            row.block = block.height;
            row.tx_index = static_cast<int>(p);
            row.tx_hash = w.tx_hash;
            row.log_index = w.log_index;
            row.direction = w.trade.direction;
            row.kind = w.trade.kind;
            row.amount = w.trade.amount;
            row.limit = w.limit;
            row.deadline = block.timestamp + 600;
            row.gas_used = std::uniform_int_distribution<std::int64_t>(100'000, 200'000)(rng_);
            row.gas_price_wei = static_cast<double>(std::uniform_int_distribution<std::int64_t>(15, 45)(rng_)) * 1e9;
            out.swaps.push_back(row);
            q.txs.emplace_back(std::move(w));
        }
        return settle_block(q);
    }

private:
    CorpusOptions options_;
    std::mt19937_64 rng_;
};

}  // namespace

Corpus synthetic_corpus(const CorpusOptions& options) {
    Corpus corpus;
    Dataset& d = corpus.dataset;
    Builder builder(options);
    const std::int64_t first = options.first_block;
    const std::int64_t n_blocks = 7;
    d.manifest.first_block = first;
    d.manifest.last_block = first + n_blocks - 1;
    d.manifest.genesis_sqrt_price = 1;

    PoolState pool = new_pool(options.pool.fee_bps, options.pool.tick_spacing, 1, {});
    const auto [lo, hi] = full_range_ticks(options.pool.tick_spacing);
    const int band = 60 * options.pool.tick_spacing;
    const std::vector<LiquidityRow> genesis{
        {first - 1, 0, hash_for("genesis", first - 1, 0), 0, LiquidityAction::mint, lo, hi, Real(10'000'000)},
        {first - 1, 1, hash_for("genesis", first - 1, 1), 0, LiquidityAction::mint, -band, band, Real(20'000'000)}};
    for (const LiquidityRow& g : genesis) {
        pool = apply_liquidity_event(pool, g.action, g.lower_tick, g.upper_tick, g.liquidity);
        d.liquidity.push_back(g);
    }

    const std::vector<std::string> builders{"builder-a", "builder-b", "builder-c"};
    for (std::int64_t k = 0; k < n_blocks; ++k) {
        const std::int64_t h = first + k;
        BlockMeta meta;
        meta.height = h;
        meta.timestamp = options.start_timestamp + static_cast<double>(k) * options.block_interval_seconds;
        meta.builder = builders[static_cast<std::size_t>(builder.rng()() % builders.size())];
        d.blocks.push_back({h, meta.timestamp, meta.builder});
        d.eth_usd.push_back({h, parse_decimal(format_fixed(2000 + builder.uniform(-40, 40), 2))});

        Scenario s;
        std::string kind;
        switch (k) {
            case 0: {
                const SwapTx victim = make_swap(pool, hash_for("victim", h, 0), {Direction::one_for_zero, TradeKind::exact_in, 50'000}, 50);
                s = optimal_sandwich(pool, victim, {}, meta).scenario;
                break;
            }
            case 1: {
                const SwapTx victim = make_swap(pool, hash_for("victim", h, 0), {Direction::zero_for_one, TradeKind::exact_in, 30'000}, 100);
                s = gen_backrun(pool, victim, pool.spot_price(), meta);
                break;
            }
            case 2: {
                const SwapTx victim = make_swap(pool, hash_for("victim", h, 0), {Direction::one_for_zero, TradeKind::exact_in, 20'000}, 50);
                s = gen_jit(pool, victim, 5, meta);
                break;
            }
            case 3:
                s = gen_collision_block(pool, 5, 0.5, {500, 200'000}, builder.rng()(), 500, meta);
                break;
            case 4: {
                s.block.height = h;
                s.block.timestamp = meta.timestamp;
                s.block.builder = meta.builder;
                s.block.initial_pool = pool;
                s.block.txs.push_back(make_swap(pool, hash_for("single", h, 0), {Direction::one_for_zero, TradeKind::exact_out, 800}, 30));
                s.victim_position = 0;
                s.ground_truth = {0, 0, 0, 0, 0};
                kind = "single";
                break;
            }
            case 5: {
                s.block.height = h;
                s.block.timestamp = meta.timestamp;
                s.block.builder = meta.builder;
                s.block.initial_pool = pool;
                s.block.txs.push_back(make_swap(pool, hash_for("private", h, 0), {Direction::zero_for_one, TradeKind::exact_in, 150'000}, 100, false));
                s.block.txs.push_back(make_swap(pool, hash_for("tight", h, 1), {Direction::zero_for_one, TradeKind::exact_in, 2'000}, 5));
                s.victim_position = 1;
                s.ground_truth = {-1, -1, 0, 0, std::nullopt};
                kind = "failed_tolerance";
                break;
            }
            default:
                s = gen_collision_block(pool, 6, 0.3, {500, 200'000}, builder.rng()(), 500, meta);
                break;
        }
        if (kind.empty()) kind = to_string(s.kind);
        pool = builder.add_block(s.block, pool, d);
        const SwapTx& victim = std::get<SwapTx>(s.block.txs[s.victim_position]);
        corpus.truth.push_back({h, kind, {victim.tx_hash, static_cast<int>(s.victim_position)}, s.ground_truth,
                                s.attacker_pnl_usd});
    }

    // Minute pool prices from seven hours before the first block, a small random walk around 1.
    const double t0 = std::floor((options.start_timestamp - 7 * 3600) / 60) * 60;
    const double t1 = options.start_timestamp + static_cast<double>(n_blocks) * options.block_interval_seconds;
    std::normal_distribution<double> step(0, 2e-4);
    double log_price = 0;
    for (double t = t0; t <= t1; t += 60) {
        d.pool_prices.push_back({t, parse_decimal(format_fixed(std::exp(log_price), 12))});
        log_price += step(builder.rng());
    }

    record_outcomes(d, replay_dataset(d, options.pool, {.check_recorded = false}));
    return corpus;
}

void write_ground_truth(const std::vector<CorpusTruth>& truth, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    auto sign = [](const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); };
    write_csv_row(out, {"block", "kind", "victim_tx_hash", "victim_log_index", "total_sign", "adversarial_sign",
                        "collision_sign", "liquidity_sign", "reordering_sign", "attacker_pnl_usd"});
    for (const CorpusTruth& t : truth) {
        write_csv_row(out, {std::to_string(t.block), t.kind, t.victim.tx_hash, std::to_string(t.victim.log_index),
                            sign(t.expected.total), sign(t.expected.adversarial), sign(t.expected.collision),
                            sign(t.expected.liquidity), sign(t.expected.reordering), format_fixed(t.attacker_pnl_usd, 6)});
    }
}

}  // namespace dexcost
