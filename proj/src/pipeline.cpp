#include "dexcost/pipeline.hpp"

#include "dexcost/csv.hpp"
#include "dexcost/errors.hpp"

#include <json.hpp>
#include <omp.h>

#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <set>

namespace dexcost {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kBpsDigits = 9;
constexpr int kUsdDigits = 6;
constexpr int kLatencyDigits = 3;  // milliseconds

// Reads known keys off a JSON object and rejects the rest.
class ConfigReader {
public:
    ConfigReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
        if (!object_.is_object()) throw SchemaError(where() + ": expected an object");
    }

    template <class T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        const auto it = object_.find(key);
        if (it == object_.end()) return;
        try {
            out = it->template get<T>();
        } catch (const json::exception&) {
            throw SchemaError(where() + "." + key + ": wrong type");
        }
    }

    ConfigReader child(const char* key) {
        seen_.insert(key);
        const auto it = object_.find(key);
        static const json empty = json::object();
        return ConfigReader(it == object_.end() ? empty : *it, path_ + "." + key);
    }

    void finish() const {
        for (const auto& [key, value] : object_.items()) {
            if (!seen_.count(key)) throw SchemaError(where() + ": unknown key '" + key + "'");
        }
    }

private:
    std::string where() const { return "config" + path_; }

    const json& object_;
    std::string path_;
    std::set<std::string> seen_;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<bool> numeric;  // per column; numeric cells become JSON numbers, empty cells null
    std::vector<std::vector<std::string>> rows;
};

fs::path write_table(const fs::path& dir, const std::string& stem, const Table& t, OutputFormat format) {
    fs::create_directories(dir);
    const fs::path path = dir / (stem + (format == OutputFormat::csv ? ".csv" : ".json"));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    if (format == OutputFormat::csv) {
        write_csv_row(out, t.columns);
        for (const auto& row : t.rows) write_csv_row(out, row);
        return path;
    }
    json rows = json::array();
    for (const auto& row : t.rows) {
        json obj = json::object();
        for (std::size_t c = 0; c < t.columns.size(); ++c) {
            if (!t.numeric[c]) {
                obj[t.columns[c]] = row[c];
            } else if (row[c].empty()) {
                obj[t.columns[c]] = nullptr;
            } else {
                obj[t.columns[c]] = json::parse(row[c]);
            }
        }
        rows.push_back(std::move(obj));
    }
    out << rows.dump(2) << '\n';
    return path;
}

std::string price_text(const Real& p) { return mp::isfinite(p) ? to_decimal(p) : "inf"; }
std::string bps(double v) { return format_fixed(v, kBpsDigits); }
std::string usd(double v) { return format_fixed(v, kUsdDigits); }
std::string flag(bool b) { return b ? "true" : "false"; }

std::string p_text(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return buf;
}

std::string coef_text(double v) { return std::isnan(v) ? "" : format_fixed(v, 9); }

Table coefficient_table(const std::vector<std::string>& names, const Eigen::VectorXd& b, const Eigen::VectorXd& se,
                        const Eigen::VectorXd& p) {
    Table t{{"term", "coefficient", "std_error", "p_value", "stars"}, {false, true, true, true, false}, {}};
    for (Eigen::Index i = 0; i < b.size(); ++i) {
        t.rows.push_back({names[static_cast<std::size_t>(i)], coef_text(b(i)), coef_text(se(i)), p_text(p(i)),
                          std::isnan(p(i)) ? "" : significance_stars(p(i))});
    }
    return t;
}

std::optional<double> log_latency(const SwapTx& swap, const BlockRecord& block) {
    if (!swap.sign_time) return std::nullopt;
    return latency_of(swap, block).log_seconds;
}

double input_token_usd(const PairInfo& pair, const SwapTx& swap, const ReplayedBlock& rb) {
    const int token = swap.trade.direction == Direction::zero_for_one ? 0 : 1;
    return token_usd(pair, token, rb.eth_usd, rb.record.initial_pool.spot_price());
}

struct BlockOutput {
    std::vector<SwapReport> swaps;
    std::vector<std::string> warnings;
    std::vector<SwapObservation> observations;
};

BlockOutput analyse_block(const ReplayedBlock& rb, const PipelineConfig& config) {
    BlockOutput out;
    const BlockRecord& block = rb.record;
    const bool is_pepe = config.pair.name.find("PEPE") != std::string::npos;
    ReorderingOptions reordering;
    reordering.exact_threshold = config.exact_threshold;
    reordering.n_samples = config.n_samples;
    reordering.seed = config.seed;
    reordering.include_liquidity_events = config.include_liquidity_events;
    const DecomposeOptions options{.simulate_failed = true, .reordering = reordering};

    for (std::size_t p = 0; p < block.txs.size(); ++p) {
        const auto* swap = std::get_if<SwapTx>(&block.txs[p]);
        if (swap == nullptr) continue;
        const std::string where =
            "block " + std::to_string(block.height) + " swap " + swap->tx_hash + ":" + std::to_string(swap->log_index);
        if (swap->status == SwapStatus::failed_other) {
            out.warnings.push_back(where + ": failed for reasons other than tolerance; not decomposed");
            continue;
        }
        if (!swap->quote) {
            out.warnings.push_back(where + ": no quote; not decomposed");
            continue;
        }
        SwapReport r;
        r.block = block.height;
        r.tx_index = rb.tx_indices[p];
        r.status = swap->status;
        r.decomposition = decompose(block, p, options);
        if (swap->status == SwapStatus::succeeded) {
            if (rb.eth_usd) {
                const double token_usd_value = input_token_usd(config.pair, *swap, rb);
                r.cost = breakdown(*swap, r.decomposition, rb.eth_usd, token_usd_value, config.pair.name);

                SwapObservation o;
                o.swap = swap->id();
                o.timestamp = block.timestamp;
                o.direction = swap->trade.direction;
                o.order_size_usd = r.cost->order_size_usd;
                o.gas_price_wei = swap->gas_price_wei;
                o.eth_usd = *rb.eth_usd;
                o.log_latency = log_latency(*swap, block);
                o.slippage_tolerance_bps = swap->slippage_tolerance_bps;
                o.liquidity_usd =
                    to_double(liquidity_depth(block.initial_pool, swap->trade.direction).amount) * token_usd_value;
                o.is_pepe = is_pepe;
                o.is_public = swap->is_public;
                o.builder = block.builder;
                const SlippageDecomposition& d = r.decomposition;
                o.total_bps = d.total_bps;
                o.adversarial_bps = d.adversarial_bps;
                o.collision_bps = d.collision_bps;
                if (d.reordering) o.reordering_bps = d.reordering->bps;
                o.top_of_block_bps = d.top_of_block_bps;
                o.liquidity_bps = d.liquidity_bps;
                out.observations.push_back(std::move(o));
            } else {
                out.warnings.push_back(where + ": no ETH/USD price for the block; no cost breakdown");
            }
        }
        out.swaps.push_back(std::move(r));
    }
    return out;
}

void run_regressions(PipelineReports& reports, const std::vector<SwapObservation>& observations,
                     const Dataset& dataset, const PipelineConfig& config) {
    if (dataset.pool_prices.empty()) {
        reports.warnings.push_back("regression skipped: pool_prices.csv has no rows");
        return;
    }
    std::vector<double> ts, px;
    for (const PoolPriceRow& r : dataset.pool_prices) {
        ts.push_back(r.timestamp);
        px.push_back(to_double(r.price));
    }
    const PriceSeries series(std::move(ts), std::move(px));
    DesignSpec spec;
    spec.outcome = config.regression.outcome;
    spec.usd_notional = config.regression.usd_notional;
    spec.include_public = config.regression.include_public;
    spec.include_builders = config.regression.include_builders;
    spec.fe_period_seconds = config.regression.fe_period_days * 86400;

    const Design design = build_design(observations, series, spec);
    if (design.dropped_missing > 0) {
        reports.warnings.push_back("regression: dropped " + std::to_string(design.dropped_missing) +
                                   " rows with missing fields");
    }
    try {
        reports.ols = ols_fe(design.x, design.y, design.groups, design.names);
    } catch (const Error& e) {
        reports.warnings.push_back(std::string("OLS not estimated: ") + e.what());
    }

    std::map<TxId, const SwapObservation*> by_id;
    for (const SwapObservation& o : observations) by_id[o.swap] = &o;
    Eigen::VectorXd label(static_cast<Eigen::Index>(design.ids.size()));
    for (std::size_t i = 0; i < design.ids.size(); ++i) {
        const SwapObservation& o = *by_id.at(design.ids[i]);
        label(static_cast<Eigen::Index>(i)) = label_adversarial_dummy(o.adversarial_bps, o.order_size_usd, config.threshold_usd);
    }
    try {
        reports.logit = logit_fit(design.x, label, design.groups, design.names);
    } catch (const Error& e) {
        reports.warnings.push_back(std::string("logit not estimated: ") + e.what());
    }
}

}  // namespace

PipelineConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError(std::string("config: ") + e.what());
    }
    PipelineConfig c;
    ConfigReader root(j, "");
    {
        ConfigReader pool = root.child("pool");
        pool.read("fee_bps", c.pool.fee_bps);
        c.pool.tick_spacing = default_tick_spacing(c.pool.fee_bps);
        pool.read("tick_spacing", c.pool.tick_spacing);
        pool.finish();
    }
    {
        ConfigReader pair = root.child("pair");
        pair.read("name", c.pair.name);
        pair.read("eth_token", c.pair.eth_token);
        pair.read("stable_token", c.pair.stable_token);
        pair.finish();
    }
    root.read("exact_threshold", c.exact_threshold);
    root.read("n_samples", c.n_samples);
    root.read("seed", c.seed);
    root.read("include_liquidity_events", c.include_liquidity_events);
    root.read("check_deadline", c.check_deadline);
    {
        ConfigReader b = root.child("buckets");
        b.read("small_below", c.buckets.small_below);
        b.read("large_above", c.buckets.large_above);
        b.finish();
    }
    root.read("threshold_usd", c.threshold_usd);
    root.read("workers", c.workers);
    {
        ConfigReader r = root.child("regression");
        r.read("enabled", c.regression.enabled);
        std::string outcome = to_string(c.regression.outcome);
        r.read("outcome", outcome);
        try {
            c.regression.outcome = outcome_from_string(outcome);
        } catch (const Error& e) {
            throw SchemaError(std::string("config.regression.outcome: ") + e.what());
        }
        r.read("usd_notional", c.regression.usd_notional);
        r.read("include_public", c.regression.include_public);
        r.read("include_builders", c.regression.include_builders);
        r.read("fe_period_days", c.regression.fe_period_days);
        r.finish();
    }
    root.finish();

    if (c.pool.fee_bps < 0 || c.pool.fee_bps >= kMaxFeeBps) throw SchemaError("config.pool.fee_bps: out of range");
    if (c.pool.tick_spacing <= 0) throw SchemaError("config.pool.tick_spacing: must be positive");
    if (c.n_samples == 0) throw SchemaError("config.n_samples: must be positive");
    if (c.workers < 0) throw SchemaError("config.workers: must be nonnegative");
    if (!(c.buckets.small_below <= c.buckets.large_above)) throw SchemaError("config.buckets: small_below above large_above");
    if (!(c.regression.fe_period_days > 0)) throw SchemaError("config.regression.fe_period_days: must be positive");
    return c;
}

PipelineConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string() + ": cannot open");
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json(text);
}

PipelineReports run_pipeline(const Dataset& dataset, const PipelineConfig& config) {
    const std::vector<ReplayedBlock> blocks =
        replay_dataset(dataset, config.pool, {.check_recorded = true, .check_deadline = config.check_deadline});

    std::vector<BlockOutput> outputs(blocks.size());
    std::vector<std::exception_ptr> errors(blocks.size());
    const int threads = config.workers > 0 ? config.workers : omp_get_max_threads();
    const auto n_blocks = static_cast<std::ptrdiff_t>(blocks.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n_blocks; ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            outputs[k] = analyse_block(blocks[k], config);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    PipelineReports reports;
    reports.thresholds = config.buckets;
    reports.warnings = dataset.warnings;
    std::vector<SwapObservation> observations;
    for (BlockOutput& o : outputs) {
        for (SwapReport& r : o.swaps) reports.swaps.push_back(std::move(r));
        reports.warnings.insert(reports.warnings.end(), o.warnings.begin(), o.warnings.end());
        observations.insert(observations.end(), o.observations.begin(), o.observations.end());
    }

    std::vector<CostBreakdown> costs;
    for (const SwapReport& r : reports.swaps) {
        if (r.cost) costs.push_back(*r.cost);
    }
    if (!costs.empty()) reports.buckets = bucket_aggregate(costs, config.buckets);

    std::vector<LatencyObservation> latencies;
    for (const ReplayedBlock& rb : blocks) {
        for (const BlockTx& tx : rb.record.txs) {
            const auto* swap = std::get_if<SwapTx>(&tx);
            if (swap == nullptr || !swap->sign_time) continue;
            latencies.push_back({latency_of(*swap, rb.record).seconds, swap->status != SwapStatus::succeeded});
        }
    }
    if (!latencies.empty()) reports.latency = latency_fill_stats(latencies);

    if (config.regression.enabled) run_regressions(reports, observations, dataset, config);
    return reports;
}

fs::path write_decompositions(const PipelineReports& reports, const fs::path& dir, OutputFormat format) {
    Table dec{{"block", "tx_index", "tx_hash", "log_index", "status", "simulated", "saturated", "total_bps",
               "adversarial_bps", "collision_bps", "liquidity_bps", "top_of_block_bps", "residual_bps", "reordering_bps",
               "reordering_mode", "reordering_orderings", "reordering_std_error_bps", "preceding_trades",
               "adversarial_trades", "quoted_price", "collision_price", "realized_without_liquidity_price",
               "realized_price", "top_of_block_price"},
              {true, true, false, true, false, false, false, true, true, true, true, true, true, true,
               false, true, true, true, true, false, false, false, false, false},
              {}};
    for (const SwapReport& r : reports.swaps) {
        const SlippageDecomposition& d = r.decomposition;
        std::size_t adversarial = 0;
        for (const AdversarialFlag& f : d.labels) adversarial += f.adversarial ? 1 : 0;
        const auto& ro = d.reordering;
        dec.rows.push_back({std::to_string(r.block), std::to_string(r.tx_index), d.swap.tx_hash,
                            std::to_string(d.swap.log_index), to_string(r.status), flag(d.simulated), flag(d.saturated),
                            bps(d.total_bps), bps(d.adversarial_bps), bps(d.collision_bps), bps(d.liquidity_bps),
                            bps(d.top_of_block_bps), bps(d.residual_bps), ro ? bps(ro->bps) : "",
                            ro ? (ro->sampled ? "sampled" : "exact") : "", ro ? std::to_string(ro->orderings) : "",
                            ro ? bps(ro->std_error_bps) : "", std::to_string(d.labels.size()), std::to_string(adversarial),
                            price_text(d.quoted_price), price_text(d.collision_price),
                            price_text(d.realized_without_liquidity_price), price_text(d.realized_price),
                            price_text(d.top_of_block_price)});
    }
    return write_table(dir, "decompositions", dec, format);
}

std::vector<fs::path> write_reports(const PipelineReports& reports, const fs::path& dir, OutputFormat format) {
    std::vector<fs::path> written{write_decompositions(reports, dir, format)};

    Table cost{{"block", "tx_index", "tx_hash", "log_index", "pair", "bucket", "order_size_usd", "gas_usd", "lp_fee_usd",
                "price_impact_usd", "slippage_usd", "total_usd", "gas_bps", "lp_fee_bps", "price_impact_bps",
                "slippage_bps", "total_bps"},
               {true, true, false, true, false, false, true, true, true, true, true, true, true, true, true, true, true},
               {}};
    for (const SwapReport& r : reports.swaps) {
        if (!r.cost) continue;
        const CostBreakdown& c = *r.cost;
        cost.rows.push_back({std::to_string(r.block), std::to_string(r.tx_index), c.swap.tx_hash,
                             std::to_string(c.swap.log_index), c.pair, to_string(size_bucket(c.order_size_usd, reports.thresholds)),
                             usd(c.order_size_usd), usd(c.gas_usd), usd(c.lp_fee_usd), usd(c.price_impact_usd),
                             usd(c.slippage_usd), usd(c.total_usd), bps(c.bps(c.gas_usd)), bps(c.bps(c.lp_fee_usd)),
                             bps(c.bps(c.price_impact_usd)), bps(c.bps(c.slippage_usd)), bps(c.bps(c.total_usd))});
    }
    written.push_back(write_table(dir, "costs", cost, format));

    // Wide table: one cell per cost item, formatted like "$40.7 (22bps)".
    Table wide{{"pair", "bucket", "count", "volume_usd", "gas", "slippage", "lp_fee", "price_impact", "total"},
               {false, false, true, true, false, false, false, false, false},
               {}};
    Table long_form{{"pair", "bucket", "item", "count", "volume_usd", "mean_usd", "bps"},
                    {false, false, false, true, true, true, true},
                    {}};
    for (const BucketRow& b : reports.buckets) {
        std::vector<std::string> row{b.pair, to_string(b.bucket), std::to_string(b.count), usd(b.volume_usd)};
        for (std::size_t i = 0; i < kCostItems.size(); ++i) {
            row.push_back(b.count ? format_cell(b.mean_usd[i], b.bps[i]) : "");
            long_form.rows.push_back({b.pair, to_string(b.bucket), to_string(kCostItems[i]), std::to_string(b.count),
                                      usd(b.volume_usd), b.count ? usd(b.mean_usd[i]) : "",
                                      b.count ? bps(b.bps[i]) : ""});
        }
        wide.rows.push_back(std::move(row));
    }
    written.push_back(write_table(dir, "buckets", wide, format));
    written.push_back(write_table(dir, "buckets_long", long_form, format));

    Table latency{{"statistic", "value"}, {false, true}, {}};
    if (reports.latency) {
        const LatencyStats& s = *reports.latency;
        for (std::size_t i = 0; i < kLatencyPercentiles.size(); ++i) {
            latency.rows.push_back({"p" + format_double(kLatencyPercentiles[i]), format_fixed(s.percentiles[i], kLatencyDigits)});
        }
        latency.rows.push_back({"count", std::to_string(s.count)});
        latency.rows.push_back({"failed", std::to_string(s.failed)});
        latency.rows.push_back({"fail_rate", format_fixed(s.fail_rate, kUsdDigits)});
    }
    written.push_back(write_table(dir, "latency", latency, format));

    if (reports.ols || reports.logit) {
        auto more = write_regressions(reports, dir, format);
        written.insert(written.end(), more.begin(), more.end());
    }
    return written;
}

std::vector<fs::path> write_regressions(const PipelineReports& reports, const fs::path& dir, OutputFormat format) {
    std::vector<fs::path> written;
    Table summary{{"model", "statistic", "value"}, {false, false, true}, {}};
    if (reports.ols) {
        const RegressionResult& r = *reports.ols;
        written.push_back(
            write_table(dir, "regression_ols", coefficient_table(r.names, r.coefficients, r.std_errors, r.p_values), format));
        summary.rows.push_back({"ols", "n_obs", std::to_string(r.n_obs)});
        summary.rows.push_back({"ols", "n_groups", std::to_string(r.n_groups)});
        summary.rows.push_back({"ols", "r_squared", coef_text(r.r_squared)});
        summary.rows.push_back({"ols", "adj_r_squared", coef_text(r.adj_r_squared)});
        summary.rows.push_back({"ols", "f_stat", coef_text(r.f_stat)});
        summary.rows.push_back({"ols", "f_p_value", p_text(r.f_p_value)});
    }
    if (reports.logit) {
        const LogitResult& r = *reports.logit;
        written.push_back(write_table(dir, "regression_logit",
                                      coefficient_table(r.names, r.coefficients, r.std_errors, r.p_values), format));
        summary.rows.push_back({"logit", "n_obs", std::to_string(r.n_obs)});
        summary.rows.push_back({"logit", "iterations", std::to_string(r.iterations)});
        summary.rows.push_back({"logit", "log_likelihood", coef_text(r.log_likelihood)});
    }
    written.push_back(write_table(dir, "regression_summary", summary, format));
    return written;
}

std::vector<fs::path> write_replay(const std::vector<ReplayedBlock>& blocks, const fs::path& dir, OutputFormat format) {
    Table pools{{"block", "timestamp", "builder", "swaps", "liquidity_events", "start_sqrt_price", "end_sqrt_price",
                 "end_tick", "end_active_liquidity"},
                {true, true, false, true, true, false, false, true, false},
                {}};
    Table swaps{{"block", "tx_index", "tx_hash", "log_index", "status", "is_public", "amount_in", "amount_out",
                 "slippage_tolerance_bps", "latency_seconds"},
                {true, true, false, true, false, false, false, false, true, true},
                {}};
    for (const ReplayedBlock& rb : blocks) {
        const BlockRecord& b = rb.record;
        std::size_t n_swaps = 0;
        for (std::size_t p = 0; p < b.txs.size(); ++p) {
            const auto* s = std::get_if<SwapTx>(&b.txs[p]);
            if (s == nullptr) continue;
            ++n_swaps;
            std::string latency;
            if (s->sign_time && *s->sign_time <= b.timestamp) latency = format_fixed(latency_of(*s, b).seconds, kLatencyDigits);
            swaps.rows.push_back({std::to_string(b.height), std::to_string(rb.tx_indices[p]), s->tx_hash,
                                  std::to_string(s->log_index), to_string(s->status), flag(s->is_public),
                                  to_decimal(s->amount_in), to_decimal(s->amount_out),
                                  s->quote ? bps(s->slippage_tolerance_bps) : "", latency});
        }
        pools.rows.push_back({std::to_string(b.height), format_double(b.timestamp), b.builder, std::to_string(n_swaps),
                              std::to_string(b.txs.size() - n_swaps), to_decimal(b.initial_pool.sqrt_price),
                              to_decimal(rb.end_pool.sqrt_price), std::to_string(rb.end_pool.current_tick),
                              to_decimal(rb.end_pool.active_liquidity)});
    }
    return {write_table(dir, "replay_blocks", pools, format), write_table(dir, "replay_swaps", swaps, format)};
}

}  // namespace dexcost
