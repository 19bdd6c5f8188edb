#pragma once

// End-to-end run over a dataset: replay, per-swap decomposition and costs,
// bucket table, latency statistics and the optional regressions; plus the
// CSV / JSON writers for all of it.

#include "dexcost/costs.hpp"
#include "dexcost/dataset.hpp"
#include "dexcost/econometrics.hpp"
#include "dexcost/slippage.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dexcost {

struct RegressionConfig {
    bool enabled = false;
    Outcome outcome = Outcome::adversarial;
    bool usd_notional = false;
    bool include_public = true;
    bool include_builders = false;
    double fe_period_days = 7;
};

struct PipelineConfig {
    PoolConfig pool;
    PairInfo pair;
    std::size_t exact_threshold = 7;
    std::size_t n_samples = 256;
    std::uint64_t seed = 0;
    bool include_liquidity_events = false;
    bool check_deadline = false;
    BucketThresholds buckets;
    double threshold_usd = 5;  // logit label: adversarial loss above this many dollars
    int workers = 0;           // OpenMP threads over blocks; 0 keeps the runtime default
    RegressionConfig regression;
};

// Unknown keys and wrong types raise SchemaError.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig config_from_json(const std::string& text);

struct SwapReport {
    std::int64_t block = 0;
    int tx_index = 0;
    SwapStatus status = SwapStatus::succeeded;
    SlippageDecomposition decomposition;
    std::optional<CostBreakdown> cost;  // succeeded swaps with a USD conversion
};

struct PipelineReports {
    std::vector<SwapReport> swaps;  // block order, then position
    std::vector<BucketRow> buckets;
    BucketThresholds thresholds;
    std::optional<LatencyStats> latency;
    std::optional<RegressionResult> ols;
    std::optional<LogitResult> logit;
    std::vector<std::string> warnings;
};

// Deterministic for a given dataset and config, whatever config.workers is.
PipelineReports run_pipeline(const Dataset& dataset, const PipelineConfig& config);

enum class OutputFormat { csv, json };

// decompositions, costs, buckets, buckets_long and latency; regression_ols,
// regression_logit and regression_summary when present. Returns the paths written.
std::vector<std::filesystem::path> write_reports(const PipelineReports& reports, const std::filesystem::path& dir,
                                                 OutputFormat format);
std::filesystem::path write_decompositions(const PipelineReports& reports, const std::filesystem::path& dir,
                                           OutputFormat format);
std::vector<std::filesystem::path> write_regressions(const PipelineReports& reports, const std::filesystem::path& dir,
                                                     OutputFormat format);

// Per-block pool states and per-swap replay outcomes.
std::vector<std::filesystem::path> write_replay(const std::vector<ReplayedBlock>& blocks,
                                                const std::filesystem::path& dir, OutputFormat format);

}  // namespace dexcost
