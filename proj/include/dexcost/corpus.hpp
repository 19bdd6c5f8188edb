#pragma once

// A small on-disk corpus built from the adversary generators: one block each
// of sandwich, backrun, JIT and collisions, plus an exact-out swap and a swap
// that fails its tolerance. Amounts are cut to the 18-digit wire format and
// requoted, so the written dataset replays exactly.

#include "dexcost/adversary.hpp"
#include "dexcost/dataset.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace dexcost {

struct CorpusOptions {
    std::uint64_t seed = 1;
    std::int64_t first_block = 100;
    double start_timestamp = 1'700'000'000;
    double block_interval_seconds = 300;
    PoolConfig pool;
};

struct CorpusTruth {
    std::int64_t block = 0;
    std::string kind;
    TxId victim;
    GroundTruth expected;
    double attacker_pnl_usd = 0;
};

struct Corpus {
    Dataset dataset;
    std::vector<CorpusTruth> truth;
};

// Stable-pair pool at price 1: full-range plus a concentrated position.
Corpus synthetic_corpus(const CorpusOptions& options);

void write_ground_truth(const std::vector<CorpusTruth>& truth, const std::filesystem::path& path);

}  // namespace dexcost
