#include "dexcost/csv.hpp"
#include "dexcost/errors.hpp"
#include "dexcost/pipeline.hpp"

#include "test_util.hpp"

#include <doctest.h>
#include <json.hpp>

#include <filesystem>
#include <set>

using namespace dexcost;
using dexcost::testing::slurp;
using dexcost::testing::TempDir;
namespace fs = std::filesystem;

namespace {

const fs::path kCorpus = fs::path(DEXCOST_FIXTURE_DIR) / "corpus";
const fs::path kGolden = DEXCOST_GOLDEN_DIR;

const Dataset& fixture() {
    static const Dataset d = load_dataset(kCorpus);
    return d;
}

PipelineConfig fixture_config() { return load_config(kCorpus / "config.json"); }

std::string decompositions_text(const PipelineReports& r) {
    TempDir dir;
    return slurp(write_decompositions(r, dir.path(), OutputFormat::csv));
}

int sign_of(double v) { return std::abs(v) < 1e-9 ? 0 : (v > 0 ? 1 : -1); }

const SwapReport& report_for(const PipelineReports& r, const std::string& tx_hash, int log_index) {
    for (const SwapReport& s : r.swaps)
        if (s.decomposition.swap.tx_hash == tx_hash && s.decomposition.swap.log_index == log_index) return s;
    FAIL("no report for " << tx_hash);
    throw std::logic_error("unreachable");
}

}  // namespace

TEST_CASE("reports match the committed golden files") {
    const PipelineReports r = run_pipeline(fixture(), fixture_config());
    CHECK(r.swaps.size() == 20);
    CHECK(r.ols.has_value());
    TempDir dir;
    const auto written = write_reports(r, dir.path(), OutputFormat::csv);
    std::set<std::string> produced;
    for (const auto& p : written) produced.insert(p.filename().string());
    std::set<std::string> golden;
    for (const auto& e : fs::directory_iterator(kGolden)) golden.insert(e.path().filename().string());
    CHECK(produced == golden);
    for (const std::string& f : golden) {
        INFO(f);
        CHECK(slurp(dir.path() / f) == slurp(kGolden / f));
    }
}

TEST_CASE("runs are deterministic across repeats and worker counts") {
    PipelineConfig c = fixture_config();
    c.workers = 1;
    const std::string one = decompositions_text(run_pipeline(fixture(), c));
    CHECK(one == decompositions_text(run_pipeline(fixture(), c)));
    c.workers = 4;
    CHECK(one == decompositions_text(run_pipeline(fixture(), c)));
}

TEST_CASE("seed only moves sampled reordering values") {
    PipelineConfig c = fixture_config();
    const PipelineReports a = run_pipeline(fixture(), c);
    c.seed += 1;
    const PipelineReports b = run_pipeline(fixture(), c);
    REQUIRE(a.swaps.size() == b.swaps.size());
    bool any_moved = false;
    for (std::size_t i = 0; i < a.swaps.size(); ++i) {
        const SlippageDecomposition& x = a.swaps[i].decomposition;
        const SlippageDecomposition& y = b.swaps[i].decomposition;
        CHECK(x.total_bps == y.total_bps);
        CHECK(x.adversarial_bps == y.adversarial_bps);
        CHECK(x.collision_bps == y.collision_bps);
        CHECK(x.liquidity_bps == y.liquidity_bps);
        REQUIRE(x.reordering.has_value() == y.reordering.has_value());
        if (!x.reordering) continue;
        if (!x.reordering->sampled) {
            CHECK(x.reordering->bps == y.reordering->bps);
        } else if (x.reordering->bps != y.reordering->bps) {
            any_moved = true;
        }
    }
    CHECK(any_moved);
}

TEST_CASE("threshold zero samples every reordering") {
    PipelineConfig c = fixture_config();
    c.exact_threshold = 0;
    const PipelineReports r = run_pipeline(fixture(), c);
    std::size_t with_reordering = 0;
    for (const SwapReport& s : r.swaps) {
        if (!s.decomposition.reordering) continue;
        ++with_reordering;
        CHECK(s.decomposition.reordering->sampled);
        CHECK(s.decomposition.reordering->orderings == c.n_samples);
    }
    CHECK(with_reordering > 0);
}

TEST_CASE("each report traces back to exactly one input swap") {
    const PipelineReports r = run_pipeline(fixture(), fixture_config());
    std::set<TxId> seen;
    for (const SwapReport& s : r.swaps) {
        CHECK(seen.insert(s.decomposition.swap).second);
        std::size_t matches = 0;
        for (const SwapRow& row : fixture().swaps)
            if (row.id() == s.decomposition.swap && row.block == s.block && row.tx_index == s.tx_index) ++matches;
        CHECK(matches == 1);
    }
    // Costs only for succeeded swaps.
    for (const SwapReport& s : r.swaps) CHECK(s.cost.has_value() == (s.status == SwapStatus::succeeded));
}

TEST_CASE("victim signs agree with the planted ground truth") {
    const PipelineReports r = run_pipeline(fixture(), fixture_config());
    const CsvTable truth =
        read_csv(kCorpus / "ground_truth.csv",
                 {"block", "kind", "victim_tx_hash", "victim_log_index", "total_sign", "adversarial_sign",
                  "collision_sign", "liquidity_sign", "reordering_sign", "attacker_pnl_usd"});
    REQUIRE(truth.rows.size() == 7);
    for (const auto& row : truth.rows) {
        INFO(row[1] << " in block " << row[0]);
        const SlippageDecomposition& d =
            report_for(r, row[2], static_cast<int>(parse_int_field(row[3], "log_index"))).decomposition;
        auto check_sign = [](const std::string& cell, double value) {
            if (!cell.empty()) CHECK(sign_of(value) == parse_int_field(cell, "sign"));
        };
        check_sign(row[4], d.total_bps);
        check_sign(row[5], d.adversarial_bps);
        check_sign(row[6], d.collision_bps);
        check_sign(row[7], d.liquidity_bps);
        if (!row[8].empty()) {
            REQUIRE(d.reordering.has_value());
            check_sign(row[8], d.reordering->bps);
        }
    }
}

TEST_CASE("multiplicative identity holds on every fixture swap") {
    const PipelineReports r = run_pipeline(fixture(), fixture_config());
    for (const SwapReport& s : r.swaps) {
        const SlippageDecomposition& d = s.decomposition;
        const double q = to_double(d.quoted_price);
        const double realized = q * (1 - d.adversarial_bps / 1e4) * (1 - d.collision_bps / 1e4) *
                                (1 - d.liquidity_bps / 1e4);
        CHECK(dexcost::testing::rel_err(realized, to_double(d.realized_price)) < 1e-9);
        // Additive residual is the cross terms of the product.
        CHECK(d.residual_bps == doctest::Approx(d.total_bps - d.adversarial_bps - d.collision_bps - d.liquidity_bps));
        CHECK(std::abs(d.residual_bps) < 1);
    }
}

TEST_CASE("bucket table agrees with a direct recount of the cost rows") {
    const PipelineReports r = run_pipeline(fixture(), fixture_config());
    std::vector<CostBreakdown> costs;
    for (const SwapReport& s : r.swaps)
        if (s.cost) costs.push_back(*s.cost);
    for (const BucketRow& b : r.buckets) {
        std::size_t n = 0;
        double volume = 0, total = 0;
        for (const CostBreakdown& c : costs) {
            if (b.bucket != Bucket::all && size_bucket(c.order_size_usd, r.thresholds) != b.bucket) continue;
            ++n;
            volume += c.order_size_usd;
            total += c.total_usd;
        }
        INFO(to_string(b.bucket));
        CHECK(b.count == n);
        CHECK(b.volume_usd == doctest::Approx(volume).epsilon(1e-12));
        CHECK(b.mean_usd[4] == doctest::Approx(total / static_cast<double>(n)).epsilon(1e-12));
        CHECK(b.bps[4] == doctest::Approx(total / volume * 1e4).epsilon(1e-12));
    }
}

TEST_CASE("json output parses and mirrors the csv") {
    const PipelineReports r = run_pipeline(fixture(), fixture_config());
    TempDir dir;
    const fs::path p = write_decompositions(r, dir.path(), OutputFormat::json);
    const auto j = nlohmann::json::parse(slurp(p));
    REQUIRE(j.is_array());
    REQUIRE(j.size() == r.swaps.size());
    CHECK(j[0]["block"] == 100);
    CHECK(j[1]["adversarial_bps"].get<double>() == doctest::Approx(-50));
    CHECK(j[1]["status"] == "succeeded");
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(config_from_json(R"({"exact_treshold": 5})"), SchemaError);
    CHECK_THROWS_AS(config_from_json(R"({"n_samples": "many"})"), SchemaError);
    CHECK_THROWS_AS(config_from_json(R"({"pool": {"fee_bps": 5, "spacing": 10}})"), SchemaError);
    CHECK_THROWS_AS(config_from_json(R"({"n_samples": 0})"), SchemaError);
    CHECK_THROWS_AS(config_from_json("{"), SchemaError);
    const PipelineConfig c = config_from_json(R"({"pool": {"fee_bps": 30}})");
    CHECK(c.pool.tick_spacing == 60);
    CHECK(config_from_json("{}").exact_threshold == 7);
}
