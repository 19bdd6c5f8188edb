#pragma once

// Regression variables per swap, OLS with group fixed effects, and logit by IRLS.

#include "dexcost/chain.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dexcost {

// Step function over (timestamp, price) observations sorted by time.
class PriceSeries {
public:
    PriceSeries() = default;
    PriceSeries(std::vector<double> timestamps, std::vector<double> prices);

    // Last observation at or before t; nullopt before the first.
    std::optional<double> at(double t) const;
    // Sample standard deviation of consecutive log returns of observations in (t - window, t].
    std::optional<double> log_return_stddev(double t, double window_seconds) const;
    bool empty() const { return timestamps_.empty(); }

private:
    std::vector<double> timestamps_;
    std::vector<double> prices_;
};

// Per-swap inputs for the design matrix. Raw units; build_design rescales.
struct SwapObservation {
    TxId swap;
    double timestamp = 0;
    Direction direction = Direction::zero_for_one;
    double order_size_usd = 0;
    double gas_price_wei = 0;
    double eth_usd = 0;
    std::optional<double> log_latency;
    std::optional<double> slippage_tolerance_bps;
    double liquidity_usd = 0;  // input needed to move the price 500 bps in the swap's direction
    bool is_pepe = false;
    bool is_public = true;
    std::string builder;
    double total_bps = 0;
    double adversarial_bps = 0;
    double collision_bps = 0;
    std::optional<double> reordering_bps;
    double top_of_block_bps = 0;
    double liquidity_bps = 0;
};

enum class Outcome { total, adversarial, collision, reordering, top_of_block, liquidity };
const char* to_string(Outcome outcome);
Outcome outcome_from_string(const std::string& name);

struct DesignSpec {
    Outcome outcome = Outcome::total;
    bool usd_notional = false;         // outcome in USD (bps * size / 1e4) instead of bps
    bool include_public = false;
    bool include_pepe = false;         // isPepe and its interactions with every control
    bool include_builders = false;     // dummies for the top builders, the rest pooled as "Other"
    std::size_t top_builders = 5;
    bool public_by_builder = false;    // Public x builder dummies
    double fe_period_seconds = 7 * 86400.0;  // weekly; 14 days gives the biweekly key
    double return_window_seconds = 3600;
    double volatility_window_seconds = 6 * 3600;
};

struct Design {
    Eigen::MatrixXd x;  // no intercept column
    Eigen::VectorXd y;
    std::vector<std::int64_t> groups;
    std::vector<std::string> names;
    std::vector<TxId> ids;
    std::size_t dropped_missing = 0;
};

// Columns orderSize (USD millions), gasPrice (1e-6 USD), logLatency,
// slippageTolerance, lastHourReturn (bps, positive = worse for the swapper),
// liquidity (USD millions), volatility (bps), then the optional dummies.
// Rows missing latency, tolerance or the outcome are dropped and counted.
Design build_design(std::span<const SwapObservation> rows, const PriceSeries& pool_prices, const DesignSpec& spec);

double last_hour_return_bps(const PriceSeries& prices, double t, Direction direction, double window_seconds = 3600);

enum class FixedEffects { automatic, dummies, demeaning };

struct OlsOptions {
    FixedEffects encoding = FixedEffects::automatic;
    std::size_t dummy_limit = 200;  // automatic: dummies up to this many groups
};

struct RegressionResult {
    std::vector<std::string> names;  // "Intercept" then the slopes
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;      // intercept SE is NaN when fixed effects absorb it
    Eigen::VectorXd p_values;
    Eigen::VectorXd residuals;
    std::size_t n_obs = 0;
    std::size_t n_groups = 0;
    double r_squared = 0;
    double adj_r_squared = 0;
    double f_stat = 0;  // all slopes zero, fixed effects kept
    double f_p_value = 0;
    FixedEffects encoding = FixedEffects::automatic;
};

// With no groups the model has a plain intercept. With groups the intercept is
// reported as mean(y) - mean(x)'b, identical under either encoding.
RegressionResult ols_fe(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const std::int64_t> groups,
                        const std::vector<std::string>& names = {}, const OlsOptions& options = {});

struct LogitResult {
    std::vector<std::string> names;  // "Intercept", slopes, then group dummies
    Eigen::VectorXd coefficients;
    Eigen::VectorXd std_errors;
    Eigen::VectorXd p_values;
    std::size_t n_obs = 0;
    int iterations = 0;
    double log_likelihood = 0;
};

struct LogitOptions {
    double tolerance = 1e-10;  // max absolute coefficient change
    int max_iterations = 100;
};

// Maximum likelihood by iteratively reweighted least squares. Groups enter as
// dummies with the first group as base. Single-class labels and non-convergence
// raise SeparationError.
LogitResult logit_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const std::int64_t> groups = {},
                      const std::vector<std::string>& names = {}, const LogitOptions& options = {});

// 1 iff the adversarial loss in USD exceeds the threshold.
int label_adversarial_dummy(double adversarial_bps, double order_size_usd, double threshold_usd = 5);

// "***", "**", "*", "+" at 0.1%, 1%, 5%, 10%.
std::string significance_stars(double p_value);

}  // namespace dexcost
