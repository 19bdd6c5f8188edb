#include "dexcost/econometrics.hpp"

#include "dexcost/errors.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace dexcost {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double t_p_value(double coef, double se, double df) {
    if (!(se > 0)) return coef == 0 ? 1.0 : 0.0;
    const double t = std::abs(coef / se);
    if (!std::isfinite(t)) return 0.0;
    return 2 * boost::math::cdf(boost::math::complement(boost::math::students_t(df), t));
}

// Dense 0..G-1 labels for arbitrary group keys, in key order.
std::vector<Eigen::Index> dense_groups(std::span<const std::int64_t> groups, std::size_t n, std::size_t& count) {
    std::vector<Eigen::Index> out(n, 0);
    if (groups.empty()) {
        count = 1;
        return out;
    }
    if (groups.size() != n) {
        throw InvalidArgument("group labels must match the number of rows");
    }
    std::map<std::int64_t, Eigen::Index> ids;
    for (std::int64_t g : groups) ids.emplace(g, 0);
    Eigen::Index next = 0;
    for (auto& [key, id] : ids) id = next++;
    for (std::size_t i = 0; i < n; ++i) out[i] = ids.at(groups[i]);
    count = ids.size();
    return out;
}

void require_full_rank(const Eigen::MatrixXd& m, const char* what) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    if (qr.rank() < m.cols()) {
        throw SingularDesign(std::string(what) + " has rank " + std::to_string(qr.rank()) + " < " +
                             std::to_string(m.cols()) + " columns");
    }
}

std::vector<std::string> slope_names(const std::vector<std::string>& names, Eigen::Index k) {
    if (!names.empty() && static_cast<Eigen::Index>(names.size()) != k) {
        throw InvalidArgument("column names must match the number of columns");
    }
    std::vector<std::string> out = names;
    for (Eigen::Index j = static_cast<Eigen::Index>(out.size()); j < k; ++j) out.push_back("x" + std::to_string(j + 1));
    return out;
}

double floor_period(double t, double period) { return std::floor(t / period); }

}  // namespace

PriceSeries::PriceSeries(std::vector<double> timestamps, std::vector<double> prices)
    : timestamps_(std::move(timestamps)), prices_(std::move(prices)) {
    if (timestamps_.size() != prices_.size()) {
        throw InvalidArgument("price series timestamps and prices differ in length");
    }
    if (!std::is_sorted(timestamps_.begin(), timestamps_.end())) {
        throw InvalidArgument("price series must be sorted by time");
    }
    for (double p : prices_) {
        if (!(p > 0)) throw InvalidArgument("price series values must be positive");
    }
}

std::optional<double> PriceSeries::at(double t) const {
    const auto it = std::upper_bound(timestamps_.begin(), timestamps_.end(), t);
    if (it == timestamps_.begin()) return std::nullopt;
    return prices_[static_cast<std::size_t>(it - timestamps_.begin()) - 1];
}

std::optional<double> PriceSeries::log_return_stddev(double t, double window_seconds) const {
    const auto first = std::upper_bound(timestamps_.begin(), timestamps_.end(), t - window_seconds);
    const auto last = std::upper_bound(timestamps_.begin(), timestamps_.end(), t);
    const auto lo = static_cast<std::size_t>(first - timestamps_.begin());
    const auto hi = static_cast<std::size_t>(last - timestamps_.begin());
    if (hi < lo + 3) return std::nullopt;  // two returns at least
    std::vector<double> r;
    for (std::size_t i = lo + 1; i < hi; ++i) r.push_back(std::log(prices_[i] / prices_[i - 1]));
    double mean = 0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(r.size());
    double ss = 0;
    for (double v : r) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(r.size() - 1));
}

const char* to_string(Outcome outcome) {
    switch (outcome) {
        case Outcome::total: return "total";
        case Outcome::adversarial: return "adversarial";
        case Outcome::collision: return "collision";
        case Outcome::reordering: return "reordering";
        case Outcome::top_of_block: return "top_of_block";
        case Outcome::liquidity: return "liquidity";
    }
    return "?";
}

Outcome outcome_from_string(const std::string& name) {
    for (Outcome o : {Outcome::total, Outcome::adversarial, Outcome::collision, Outcome::reordering,
                      Outcome::top_of_block, Outcome::liquidity}) {
        if (name == to_string(o)) return o;
    }
    throw InvalidArgument("unknown outcome '" + name + "'");
}

double last_hour_return_bps(const PriceSeries& prices, double t, Direction direction, double window_seconds) {
    const auto now = prices.at(t);
    const auto then = prices.at(t - window_seconds);
    if (!now || !then) {
        throw DomainError("pool price series does not cover the hour before t=" + std::to_string(t));
    }
    const double change = (*now / *then - 1) * 1e4;
    // Spot is token1 per token0: a falling price hurts a token0 seller.
    return direction == Direction::zero_for_one ? -change : change;
}

Design build_design(std::span<const SwapObservation> rows, const PriceSeries& pool_prices, const DesignSpec& spec) {
    static const std::vector<std::string> base{"orderSize", "gasPrice",  "logLatency", "slippageTolerance",
                                               "lastHourReturn", "liquidity", "volatility"};
    Design d;
    d.names = base;
    if (spec.include_public) d.names.push_back("Public");

    std::vector<std::string> builders;
    if (spec.include_builders || spec.public_by_builder) {
        std::map<std::string, std::size_t> private_counts;
        for (const auto& r : rows) {
            private_counts[r.builder];
            if (!r.is_public) ++private_counts[r.builder];
        }
        std::vector<std::pair<std::string, std::size_t>> ranked(private_counts.begin(), private_counts.end());
        std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        for (std::size_t i = 0; i < ranked.size() && i < spec.top_builders; ++i) builders.push_back(ranked[i].first);
        // With every builder named, the first one becomes the base category.
        if (builders.size() == private_counts.size() && !builders.empty()) builders.erase(builders.begin());
        if (spec.include_builders) {
            for (const auto& b : builders) d.names.push_back("builder:" + b);
        }
        if (spec.public_by_builder) {
            for (const auto& b : builders) d.names.push_back("Public:builder:" + b);
        }
    }
    if (spec.include_pepe) {
        d.names.push_back("isPepe");
        for (const auto& b : base) d.names.push_back("isPepe:" + b);
    }

    std::vector<std::vector<double>> kept;
    std::vector<double> ys;
    for (const auto& r : rows) {
        std::optional<double> outcome;
        switch (spec.outcome) {
            case Outcome::total: outcome = r.total_bps; break;
            case Outcome::adversarial: outcome = r.adversarial_bps; break;
            case Outcome::collision: outcome = r.collision_bps; break;
            case Outcome::reordering: outcome = r.reordering_bps; break;
            case Outcome::top_of_block: outcome = r.top_of_block_bps; break;
            case Outcome::liquidity: outcome = r.liquidity_bps; break;
        }
        if (!r.log_latency || !r.slippage_tolerance_bps || !outcome) {
            ++d.dropped_missing;
            continue;
        }
        std::vector<double> v{
            r.order_size_usd / 1e6,
            r.gas_price_wei * r.eth_usd * 1e-12,
            *r.log_latency,
            *r.slippage_tolerance_bps,
            last_hour_return_bps(pool_prices, r.timestamp, r.direction, spec.return_window_seconds),
            r.liquidity_usd / 1e6,
            pool_prices.log_return_stddev(r.timestamp, spec.volatility_window_seconds).value_or(0.0) * 1e4,
        };
        const std::size_t n_base = v.size();
        if (spec.include_public) v.push_back(r.is_public ? 1 : 0);
        if (spec.include_builders) {
            for (const auto& b : builders) v.push_back(r.builder == b ? 1 : 0);
        }
        if (spec.public_by_builder) {
            for (const auto& b : builders) v.push_back(r.is_public && r.builder == b ? 1 : 0);
        }
        if (spec.include_pepe) {
            const double pepe = r.is_pepe ? 1 : 0;
            v.push_back(pepe);
            for (std::size_t j = 0; j < n_base; ++j) v.push_back(pepe * v[j]);
        }
        kept.push_back(std::move(v));
        ys.push_back(spec.usd_notional ? *outcome * r.order_size_usd / 1e4 : *outcome);
        d.groups.push_back(static_cast<std::int64_t>(floor_period(r.timestamp, spec.fe_period_seconds)));
        d.ids.push_back(r.swap);
    }

    d.x.resize(static_cast<Eigen::Index>(kept.size()), static_cast<Eigen::Index>(d.names.size()));
    d.y.resize(static_cast<Eigen::Index>(kept.size()));
    for (std::size_t i = 0; i < kept.size(); ++i) {
        for (std::size_t j = 0; j < kept[i].size(); ++j) d.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = kept[i][j];
        d.y(static_cast<Eigen::Index>(i)) = ys[i];
    }
    return d;
}

RegressionResult ols_fe(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const std::int64_t> groups,
                        const std::vector<std::string>& names, const OlsOptions& options) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (y.size() != n) {
        throw InvalidArgument("outcome length differs from design rows");
    }
    if (n == 0) {
        throw EmptyInput("no rows to regress");
    }
    std::size_t n_groups = 0;
    const auto g = dense_groups(groups, static_cast<std::size_t>(n), n_groups);
    const auto G = static_cast<Eigen::Index>(n_groups);
    const double df = static_cast<double>(n - k - G);
    if (df <= 0) {
        throw SingularDesign("not enough observations for " + std::to_string(k) + " slopes and " +
                             std::to_string(G) + " fixed effects");
    }

    FixedEffects encoding = options.encoding;
    if (encoding == FixedEffects::automatic) {
        encoding = n_groups <= options.dummy_limit ? FixedEffects::dummies : FixedEffects::demeaning;
    }

    RegressionResult r;
    r.names.push_back("Intercept");
    for (auto& s : slope_names(names, k)) r.names.push_back(std::move(s));
    r.n_obs = static_cast<std::size_t>(n);
    r.n_groups = groups.empty() ? 0 : n_groups;
    r.encoding = encoding;
    r.coefficients.resize(k + 1);
    r.std_errors.resize(k + 1);
    r.p_values.resize(k + 1);

    Eigen::VectorXd group_mean_y = Eigen::VectorXd::Zero(G);
    Eigen::MatrixXd group_mean_x = Eigen::MatrixXd::Zero(G, k);
    Eigen::VectorXd group_size = Eigen::VectorXd::Zero(G);
    for (Eigen::Index i = 0; i < n; ++i) {
        group_mean_y(g[i]) += y(i);
        group_mean_x.row(g[i]) += x.row(i);
        group_size(g[i]) += 1;
    }
    for (Eigen::Index j = 0; j < G; ++j) {
        group_mean_y(j) /= group_size(j);
        group_mean_x.row(j) /= group_size(j);
    }

    Eigen::VectorXd slopes;
    Eigen::MatrixXd slope_cov_unscaled;
    if (encoding == FixedEffects::dummies) {
        Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, G + k);
        for (Eigen::Index i = 0; i < n; ++i) {
            z(i, 0) = 1;
            if (g[i] > 0) z(i, g[i]) = 1;
            z.row(i).tail(k) = x.row(i);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(z);
        if (qr.rank() < z.cols()) {
            throw SingularDesign("design with fixed-effect dummies is rank deficient");
        }
        const Eigen::VectorXd beta = qr.solve(y);
        slopes = beta.tail(k);
        const Eigen::MatrixXd inv = (z.transpose() * z).inverse();
        slope_cov_unscaled = inv.bottomRightCorner(k, k);
        r.residuals = y - z * beta;
        if (groups.empty()) {
            r.coefficients(0) = beta(0);
            r.std_errors(0) = inv(0, 0);  // scaled below
        }
    } else {
        Eigen::MatrixXd xd(n, k);
        Eigen::VectorXd yd(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            xd.row(i) = x.row(i) - group_mean_x.row(g[i]);
            yd(i) = y(i) - group_mean_y(g[i]);
        }
        require_full_rank(xd, "within-demeaned design");
        slopes = xd.colPivHouseholderQr().solve(yd);
        slope_cov_unscaled = (xd.transpose() * xd).inverse();
        r.residuals = yd - xd * slopes;
        if (groups.empty()) {
            // One group: the intercept and its variance follow from the centred fit.
            const Eigen::RowVectorXd xbar = group_mean_x.row(0);
            r.coefficients(0) = group_mean_y(0) - (xbar * slopes)(0);
            r.std_errors(0) = 1.0 / static_cast<double>(n) + (xbar * slope_cov_unscaled * xbar.transpose())(0);
        }
    }

    const double rss = r.residuals.squaredNorm();
    const double sigma2 = rss / df;
    r.coefficients.tail(k) = slopes;
    for (Eigen::Index j = 0; j < k; ++j) r.std_errors(j + 1) = std::sqrt(sigma2 * slope_cov_unscaled(j, j));
    if (groups.empty()) {
        r.std_errors(0) = std::sqrt(sigma2 * r.std_errors(0));
    } else {
        r.coefficients(0) = y.mean() - (x.colwise().mean() * slopes)(0);
        r.std_errors(0) = kNaN;
    }
    for (Eigen::Index j = 0; j <= k; ++j) {
        r.p_values(j) = std::isnan(r.std_errors(j)) ? kNaN : t_p_value(r.coefficients(j), r.std_errors(j), df);
    }

    const double tss = (y.array() - y.mean()).matrix().squaredNorm();
    double rss_restricted = 0;
    for (Eigen::Index i = 0; i < n; ++i) rss_restricted += std::pow(y(i) - group_mean_y(g[i]), 2);
    r.r_squared = tss > 0 ? 1 - rss / tss : 1.0;
    r.adj_r_squared = 1 - (1 - r.r_squared) * static_cast<double>(n - 1) / df;
    if (k == 0) {
        r.f_stat = kNaN;
        r.f_p_value = kNaN;
    } else if (rss > 0) {
        r.f_stat = ((rss_restricted - rss) / static_cast<double>(k)) / sigma2;
        r.f_p_value = boost::math::cdf(boost::math::complement(
            boost::math::fisher_f(static_cast<double>(k), df), std::max(r.f_stat, 0.0)));
    } else {
        r.f_stat = std::numeric_limits<double>::infinity();
        r.f_p_value = 0;
    }
    return r;
}

LogitResult logit_fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, std::span<const std::int64_t> groups,
                      const std::vector<std::string>& names, const LogitOptions& options) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    if (y.size() != n) {
        throw InvalidArgument("label length differs from design rows");
    }
    if (n == 0) {
        throw EmptyInput("no rows to fit");
    }
    double positives = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (y(i) != 0 && y(i) != 1) throw InvalidArgument("logit labels must be 0 or 1");
        positives += y(i);
    }
    if (positives == 0 || positives == static_cast<double>(n)) {
        throw SeparationError("labels contain a single class; the likelihood has no maximum");
    }

    std::size_t n_groups = 0;
    const auto g = dense_groups(groups, static_cast<std::size_t>(n), n_groups);
    const auto extra = static_cast<Eigen::Index>(n_groups) - 1;
    Eigen::MatrixXd z = Eigen::MatrixXd::Zero(n, 1 + k + extra);
    for (Eigen::Index i = 0; i < n; ++i) {
        z(i, 0) = 1;
        z.row(i).segment(1, k) = x.row(i);
        if (g[i] > 0) z(i, k + g[i]) = 1;
    }
    require_full_rank(z, "logit design");

    LogitResult r;
    r.names.push_back("Intercept");
    for (auto& s : slope_names(names, k)) r.names.push_back(std::move(s));
    for (Eigen::Index j = 1; j <= extra; ++j) r.names.push_back("group" + std::to_string(j));
    r.n_obs = static_cast<std::size_t>(n);

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(z.cols());
    Eigen::MatrixXd hessian;
    bool converged = false;
    for (int it = 1; it <= options.max_iterations; ++it) {
        const Eigen::ArrayXd eta = (z * beta).array();
        const Eigen::ArrayXd p = 1 / (1 + (-eta).exp());
        const Eigen::ArrayXd w = p * (1 - p);
        hessian = z.transpose() * (z.array().colwise() * w).matrix();
        const Eigen::VectorXd step = hessian.ldlt().solve(z.transpose() * (y.array() - p).matrix());
        if (!step.allFinite()) break;
        beta += step;
        r.iterations = it;
        if (step.cwiseAbs().maxCoeff() < options.tolerance) {
            converged = true;
            break;
        }
    }
    if (!converged || !beta.allFinite()) {
        throw SeparationError("IRLS did not converge in " + std::to_string(options.max_iterations) +
                              " iterations; coefficients diverge (separated data)");
    }

    const Eigen::ArrayXd eta = (z * beta).array();
    const Eigen::ArrayXd p = 1 / (1 + (-eta).exp());
    const Eigen::ArrayXd w = p * (1 - p);
    hessian = z.transpose() * (z.array().colwise() * w).matrix();
    const Eigen::MatrixXd cov = hessian.inverse();
    r.coefficients = beta;
    r.std_errors = cov.diagonal().cwiseSqrt();
    r.p_values.resize(beta.size());
    for (Eigen::Index j = 0; j < beta.size(); ++j) {
        r.p_values(j) = std::erfc(std::abs(beta(j) / r.std_errors(j)) / std::sqrt(2.0));
    }
    r.log_likelihood = (y.array() * p.log() + (1 - y.array()) * (1 - p).log()).sum();
    return r;
}

int label_adversarial_dummy(double adversarial_bps, double order_size_usd, double threshold_usd) {
    return adversarial_bps * order_size_usd / 1e4 < -threshold_usd ? 1 : 0;
}

std::string significance_stars(double p_value) {
    if (std::isnan(p_value)) return "";
    if (p_value < 0.001) return "***";
    if (p_value < 0.01) return "**";
    if (p_value < 0.05) return "*";
    if (p_value < 0.1) return "+";
    return "";
}

}  // namespace dexcost
