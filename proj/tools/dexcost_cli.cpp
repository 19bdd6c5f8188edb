// dexcost: ingest, replay and analyse swap datasets.
//
// Exit status: 0 success, 1 invalid input (schema, join, replay, config or an
// estimation the data cannot support), 2 anything else.

#include "dexcost/corpus.hpp"
#include "dexcost/errors.hpp"
#include "dexcost/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>

namespace fs = std::filesystem;
using namespace dexcost;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitInternal = 2;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    OutputFormat format = OutputFormat::csv;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config, "JSON config; defaults to <dataset>/config.json when present");
    cmd->add_option("--seed", flags.seed, "overrides the config seed");
    cmd->add_option("--out-dir", flags.out_dir, "output directory")->capture_default_str();
    const std::map<std::string, OutputFormat> formats{{"csv", OutputFormat::csv}, {"json", OutputFormat::json}};
    cmd->add_option("--format", flags.format, "csv or json")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
}

PipelineConfig resolve_config(const CommonFlags& flags, const std::string& dataset) {
    PipelineConfig config;
    if (!flags.config.empty()) {
        config = load_config(flags.config);
    } else if (!dataset.empty() && fs::exists(fs::path(dataset) / "config.json")) {
        config = load_config(fs::path(dataset) / "config.json");
    }
    if (flags.seed) config.seed = *flags.seed;
    return config;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

void print_written(const std::vector<fs::path>& paths) {
    for (const auto& p : paths) std::cout << p.string() << '\n';
}

Dataset load_checked(const std::string& dir, const PipelineConfig& config) {
    Dataset d = load_dataset(dir);
    replay_dataset(d, config.pool, {.check_recorded = true, .check_deadline = config.check_deadline});
    return d;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Swap execution-cost analysis: replay, slippage decomposition, cost tables, regressions"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string dataset;

    auto* ingest = app.add_subcommand("ingest", "validate a dataset directory and write its canonical form to --out-dir");
    auto* replay = app.add_subcommand("replay", "rebuild every block and write pool states and swap outcomes");
    auto* decompose_cmd = app.add_subcommand("decompose", "write the per-swap slippage decomposition");
    auto* report = app.add_subcommand("report", "decompositions, costs, bucket table, latency and optional regressions");
    auto* simulate = app.add_subcommand("simulate-adversary", "write a synthetic dataset with known ground truth");
    auto* regress = app.add_subcommand("regress", "OLS with fixed effects and the adversarial-loss logit");
    auto* validate = app.add_subcommand("validate", "check a dataset; exit 1 on the first problem");
    for (auto* cmd : {ingest, replay, decompose_cmd, report, simulate, regress, validate}) add_common(cmd, flags);
    for (auto* cmd : {ingest, replay, decompose_cmd, report, regress, validate}) {
        cmd->add_option("dataset", dataset, "dataset directory")->required();
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        const PipelineConfig config = resolve_config(flags, dataset);
        const fs::path out = flags.out_dir;

        if (*validate) {
            const Dataset d = load_checked(dataset, config);
            print_warnings(d.warnings);
            std::cout << "ok: " << d.swaps.size() << " swaps, " << d.blocks.size() << " blocks, " << d.warnings.size()
                      << " warnings\n";
        } else if (*ingest) {
            const Dataset d = load_checked(dataset, config);
            print_warnings(d.warnings);
            write_dataset(d, out);
            std::cout << "wrote " << d.swaps.size() << " swaps to " << out.string() << '\n';
        } else if (*replay) {
            const Dataset d = load_dataset(dataset);
            print_warnings(d.warnings);
            print_written(write_replay(replay_dataset(d, config.pool, {.check_recorded = true,
                                                                      .check_deadline = config.check_deadline}),
                                       out, flags.format));
        } else if (*decompose_cmd) {
            PipelineConfig c = config;
            c.regression.enabled = false;
            const PipelineReports r = run_pipeline(load_dataset(dataset), c);
            print_warnings(r.warnings);
            print_written({write_decompositions(r, out, flags.format)});
        } else if (*report) {
            const PipelineReports r = run_pipeline(load_dataset(dataset), config);
            print_warnings(r.warnings);
            print_written(write_reports(r, out, flags.format));
        } else if (*regress) {
            PipelineConfig c = config;
            c.regression.enabled = true;
            const PipelineReports r = run_pipeline(load_dataset(dataset), c);
            print_warnings(r.warnings);
            if (!r.ols && !r.logit) {
                std::cerr << "error: neither model could be estimated on this dataset\n";
                return kExitInvalid;
            }
            print_written(write_regressions(r, out, flags.format));
        } else if (*simulate) {
            CorpusOptions options;
            options.seed = flags.seed.value_or(1);
            options.pool = config.pool;
            const Corpus corpus = synthetic_corpus(options);
            write_dataset(corpus.dataset, out);
            write_ground_truth(corpus.truth, out / "ground_truth.csv");
            std::cout << "wrote " << corpus.dataset.swaps.size() << " swaps in " << corpus.dataset.blocks.size()
                      << " blocks to " << out.string() << '\n';
        }
        return kExitOk;
    } catch (const ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}
