#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "qcm/errors.hpp"

namespace qcm::cf {

/// One row of the moment regression design: (1, x, x^2-1, x^3-3x) with x the
/// standard-normal quantile of the level.
struct CFDesignRow {
    double alpha;
    double x;
    std::array<double, 4> row;
};

CFDesignRow design_row(double alpha);

/// A single estimated conditional quantile entering the per-timepoint pool.
struct PoolEntry {
    double alpha;
    double value;
    int source = -1; // producing model id, -1 when not applicable
};

using QuantilePool = std::vector<PoolEntry>;

/// Regression coefficients (beta0 houses the conditional mean plus the
/// error-offset term; beta1..beta3 carry the moment information).
struct ThetaEstimate {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double beta2 = 0.0;
    double beta3 = 0.0;
    // Degenerate-scale threshold, 1e-8 x the fitted pool's value range.
    // The default corresponds to a unit value range.
    double scale_epsilon = 1e-8;
};

struct QcmTriple {
    double h = 0.0;
    double s = 0.0;
    double k = 0.0;
    bool constraint_ok = false;
};

/// beta1^2 - 18 beta2^2 + 12 beta1 beta3 >= 0, the admissibility condition
/// equivalent to k - s^2 - 1 >= 0 under the moment mapping.
bool moment_constraint_holds(const ThetaEstimate& theta);

/// Maps coefficients to (variance, skewness, kurtosis). Throws
/// DegenerateScaleError when |beta1| is below theta.scale_epsilon.
QcmTriple qcm_from_theta(const ThetaEstimate& theta);

/// Caches the design matrix and its QR factorization for one fixed level
/// multiset, so that repeated per-timepoint fits only pay for the solve.
class CfSolver {
public:
    explicit CfSolver(std::vector<double> alphas);

    int n() const { return static_cast<int>(alphas_.size()); }
    const Eigen::MatrixXd& design() const { return Z_; }
    const std::vector<double>& levels() const { return alphas_; }

    ThetaEstimate fit(const Eigen::VectorXd& y) const;

    /// Least squares subject to the moment constraint (and optionally
    /// beta1 >= 0), solved by a quadratic penalty with doubling weight,
    /// warm-started from the unconstrained fit.
    ThetaEstimate fit_constrained(const Eigen::VectorXd& y,
                                  bool require_nonneg_beta1 = false) const;

    double sum_squared_residuals(const Eigen::VectorXd& y, const ThetaEstimate& theta) const;

private:
    std::vector<double> alphas_;
    Eigen::MatrixXd Z_;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
};

ThetaEstimate ols_fit(const QuantilePool& pool);
ThetaEstimate constrained_ls_fit(const QuantilePool& pool, bool require_nonneg_beta1 = false);

} // namespace qcm::cf
