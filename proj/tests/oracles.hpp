#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance binary.

#include "dexcost/adversary.hpp"
#include "dexcost/amm.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

namespace dexcost::testing {

// Piecewise constant-product oracle in long double, working from the raw
// position list instead of the engine's tick table. Sells `amount` (net of fee)
// of the input token starting from `sqrt_price`.
inline long double piecewise_output(const std::vector<Position>& positions, long double sqrt_price,
                                    Direction direction, long double amount) {
    std::vector<int> bounds;
    for (const auto& p : positions) {
        bounds.push_back(p.lower_tick);
        bounds.push_back(p.upper_tick);
    }
    std::sort(bounds.begin(), bounds.end());
    bounds.erase(std::unique(bounds.begin(), bounds.end()), bounds.end());
    auto sqrt_at = [](int t) { return std::pow(1.0001L, static_cast<long double>(t) / 2); };
    auto liquidity_between = [&](int lo, int hi) {
        long double total = 0;
        for (const auto& p : positions) {
            if (p.lower_tick <= lo && p.upper_tick >= hi) total += p.liquidity.convert_to<long double>();
        }
        return total;
    };

    long double s = sqrt_price;
    long double out = 0;
    long double left = amount;
    const bool down = direction == Direction::zero_for_one;
    while (left > 0) {
        // Ticks bracketing s; moving down the lower edge must lie strictly below s.
        int lo = kMinTick, hi = kMaxTick;
        for (int b : bounds) {
            const long double sb = sqrt_at(b);
            if (down ? sb < s : sb <= s) lo = std::max(lo, b);
            if (down ? sb >= s : sb > s) hi = std::min(hi, b);
        }
        const long double L = liquidity_between(lo, hi);
        const long double edge = down ? sqrt_at(lo) : sqrt_at(hi);
        if (L == 0) {
            if (lo == kMinTick && down) break;
            if (hi == kMaxTick && !down) break;
            s = edge;
            continue;
        }
        const long double x = L / s, y = L * s, k = L * L;
        if (down) {
            const long double need = L / edge - x;
            if (left >= need) {
                out += y - L * edge;
                left -= need;
                s = edge;
            } else {
                out += y - k / (x + left);
                left = 0;
            }
        } else {
            const long double need = L * edge - y;
            if (left >= need) {
                out += x - L / edge;
                left -= need;
                s = edge;
            } else {
                out += x - k / (y + left);
                left = 0;
            }
        }
    }
    return out;
}

// Best profit over an evenly spaced grid on [0, bound], where bound is the
// largest frontrun the victim still tolerates, found by bisecting on
// sandwich_profit's feasibility.
inline Real grid_best_profit(const PoolState& pool, const SwapTx& victim, int points = 10000) {
    Real lo = 0, hi = victim.trade.amount;
    while (sandwich_profit(pool, victim, hi)) {
        lo = hi;
        hi *= 2;
    }
    for (int i = 0; i < 200; ++i) {
        const Real mid = (lo + hi) / 2;
        (sandwich_profit(pool, victim, mid) ? lo : hi) = mid;
    }
    Real best = 0;
    for (int i = 0; i <= points; ++i) {
        const auto p = sandwich_profit(pool, victim, lo * i / points);
        if (p && *p > best) best = *p;
    }
    return best;
}

// Direct Newton-Raphson on the logit log-likelihood with its own gradient and Hessian.
inline Eigen::VectorXd newton_logit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    Eigen::MatrixXd z(x.rows(), x.cols() + 1);
    z.col(0).setOnes();
    z.rightCols(x.cols()) = x;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(z.cols());
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(z.cols());
        Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(z.cols(), z.cols());
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            const double p = 1 / (1 + std::exp(-z.row(i).dot(b)));
            grad += (y(i) - p) * z.row(i).transpose();
            hess -= p * (1 - p) * z.row(i).transpose() * z.row(i);
        }
        const Eigen::VectorXd step = hess.fullPivLu().solve(grad);
        b -= step;
        if (step.norm() < 1e-14) break;
    }
    return b;
}

}  // namespace dexcost::testing
