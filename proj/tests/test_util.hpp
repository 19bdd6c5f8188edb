#pragma once

#include "dexcost/amm.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

namespace dexcost::testing {

inline Real rel_err(const Real& actual, const Real& expected) {
    if (expected == 0) return mp::abs(actual);
    return mp::abs(actual - expected) / mp::abs(expected);
}

inline double rel_err(double actual, double expected) {
    if (expected == 0) return std::abs(actual);
    return std::abs(actual - expected) / std::abs(expected);
}

// L spread over the whole tick domain, so the pool is a plain x*y=k curve.
inline PoolState full_range_pool(const Real& liquidity, int fee_bps = 0, const Real& sqrt_price = 1,
                                 int tick_spacing = 10) {
    const auto [lo, hi] = full_range_ticks(tick_spacing);
    const std::vector<Position> positions{{lo, hi, liquidity}};
    return new_pool(fee_bps, tick_spacing, sqrt_price, positions);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("dexcost-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

}  // namespace dexcost::testing
