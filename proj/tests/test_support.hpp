#pragma once

#include <Eigen/Dense>
#include <random>
#include <span>
#include <vector>

#include "qcm/cf_core.hpp"

// Shared helpers for the unit suites. Oracles here intentionally avoid the
// library's own solve paths.
namespace testsupport {

// Textbook normal-equation OLS, solved densely. Independent of the QR route
// used by the library.
inline Eigen::VectorXd dense_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::MatrixXd xtx = X.transpose() * X;
    Eigen::VectorXd xty = X.transpose() * y;
    return xtx.fullPivLu().solve(xty);
}

inline Eigen::MatrixXd cf_design(const std::vector<double>& levels) {
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(levels.size()), 4);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        auto r = qcm::cf::design_row(levels[i]);
        for (int j = 0; j < 4; ++j) Z(static_cast<Eigen::Index>(i), j) = r.row[static_cast<std::size_t>(j)];
    }
    return Z;
}

inline std::vector<double> grid99() {
    std::vector<double> g(99);
    for (int i = 1; i <= 99; ++i) g[static_cast<std::size_t>(i - 1)] = i / 100.0;
    return g;
}

inline qcm::cf::QuantilePool make_pool(const std::vector<double>& levels,
                                       const Eigen::VectorXd& values) {
    qcm::cf::QuantilePool pool;
    for (std::size_t i = 0; i < levels.size(); ++i)
        pool.push_back({levels[i], values[static_cast<Eigen::Index>(i)], -1});
    return pool;
}

// Sum of squared residuals with beta3 eliminated along the constraint
// boundary and beta0 concentrated out, scanned on a refining grid. Used to
// certify the constrained least-squares objective.
inline double boundary_grid_oracle(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y) {
    const auto n = static_cast<double>(y.size());
    auto ssr_at = [&](double b1, double b2) {
        double b3 = (18.0 * b2 * b2 - b1 * b1) / (12.0 * b1);
        Eigen::VectorXd fit = Z.col(1) * b1 + Z.col(2) * b2 + Z.col(3) * b3;
        double b0 = (y - fit).sum() / n;
        return (y - fit - Eigen::VectorXd::Constant(y.size(), b0)).squaredNorm();
    };
    double best = std::numeric_limits<double>::infinity();
    double c1 = 0.0, c2 = 0.0, w1 = 3.0, w2 = 2.0;
    for (int round = 0; round < 6; ++round) {
        double best1 = c1, best2 = c2;
        for (int i = 0; i <= 220; ++i) {
            double b1 = c1 - w1 + 2.0 * w1 * i / 220.0;
            if (std::abs(b1) < 1e-3) continue;
            for (int j = 0; j <= 220; ++j) {
                double b2 = c2 - w2 + 2.0 * w2 * j / 220.0;
                double v = ssr_at(b1, b2);
                if (v < best) {
                    best = v;
                    best1 = b1;
                    best2 = b2;
                }
            }
        }
        c1 = best1;
        c2 = best2;
        w1 *= 0.12;
        w2 *= 0.12;
    }
    return best;
}

} // namespace testsupport
