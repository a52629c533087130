#include "qcm/cf_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "qcm/math/nelder_mead.hpp"
#include "qcm/math/normal.hpp"

namespace qcm::cf {

namespace {

constexpr double kConditionLimit = 1e12;
constexpr double kConstraintTol = 1e-8;

double constraint_value(double b1, double b2, double b3) {
    return b1 * b1 - 18.0 * b2 * b2 + 12.0 * b1 * b3;
}

std::vector<double> pool_levels(const QuantilePool& pool) {
    std::vector<double> a;
    a.reserve(pool.size());
    for (const auto& e : pool) a.push_back(e.alpha);
    return a;
}

Eigen::VectorXd pool_values(const QuantilePool& pool) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(pool.size()));
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = pool[static_cast<std::size_t>(i)].value;
    return y;
}

} // namespace

CFDesignRow design_row(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::ostringstream msg;
        msg << "design_row: quantile level " << alpha << " must lie strictly in (0,1)";
        throw DomainError(msg.str());
    }
    double x = math::normal_quantile(alpha);
    return CFDesignRow{alpha, x, {1.0, x, x * x - 1.0, x * x * x - 3.0 * x}};
}

bool moment_constraint_holds(const ThetaEstimate& t) {
    return constraint_value(t.beta1, t.beta2, t.beta3) >= 0.0;
}

QcmTriple qcm_from_theta(const ThetaEstimate& t) {
    if (!(std::abs(t.beta1) > t.scale_epsilon)) {
        std::ostringstream msg;
        msg << "qcm_from_theta: |beta1| = " << std::abs(t.beta1)
            << " is at or below the degenerate-scale threshold " << t.scale_epsilon;
        throw DegenerateScaleError(msg.str());
    }
    QcmTriple out;
    out.h = t.beta1 * t.beta1;
    out.s = 6.0 * t.beta2 / t.beta1;
    out.k = 24.0 * t.beta3 / t.beta1 + 3.0;
    out.constraint_ok = moment_constraint_holds(t);
    return out;
}

CfSolver::CfSolver(std::vector<double> alphas) : alphas_(std::move(alphas)) {
    const auto n = static_cast<Eigen::Index>(alphas_.size());
    if (n < 5)
        throw InsufficientPoolError("CfSolver: need at least 5 quantile entries to fit 4 coefficients");
    Z_.resize(n, 4);
    for (Eigen::Index i = 0; i < n; ++i) {
        CFDesignRow r = design_row(alphas_[static_cast<std::size_t>(i)]);
        for (int j = 0; j < 4; ++j) Z_(i, j) = r.row[static_cast<std::size_t>(j)];
    }
    qr_.compute(Z_);
    const auto& R = qr_.matrixR();
    double dmax = std::abs(R(0, 0));
    double dmin = std::abs(R(3, 3));
    if (!(dmin > 0.0) || dmax / dmin > kConditionLimit) {
        std::set<double> distinct(alphas_.begin(), alphas_.end());
        std::ostringstream msg;
        msg << "CfSolver: design matrix is numerically singular (condition ~ "
            << (dmin > 0.0 ? dmax / dmin : std::numeric_limits<double>::infinity())
            << ") for the level set {";
        bool first = true;
        for (double a : distinct) {
            if (!first) msg << ", ";
            msg << a;
            first = false;
        }
        msg << "}";
        throw SingularDesignError(msg.str());
    }
}

ThetaEstimate CfSolver::fit(const Eigen::VectorXd& y) const {
    if (y.size() != Z_.rows())
        throw ConfigError("CfSolver::fit: value vector length does not match the level set");
    Eigen::Vector4d b = qr_.solve(y);
    ThetaEstimate t;
    t.beta0 = b[0];
    t.beta1 = b[1];
    t.beta2 = b[2];
    t.beta3 = b[3];
    t.scale_epsilon = 1e-8 * (y.maxCoeff() - y.minCoeff());
    return t;
}

double CfSolver::sum_squared_residuals(const Eigen::VectorXd& y, const ThetaEstimate& t) const {
    Eigen::Vector4d b(t.beta0, t.beta1, t.beta2, t.beta3);
    return (y - Z_ * b).squaredNorm();
}

ThetaEstimate CfSolver::fit_constrained(const Eigen::VectorXd& y, bool require_nonneg_beta1) const {
    ThetaEstimate ols = fit(y);
    double g0 = constraint_value(ols.beta1, ols.beta2, ols.beta3);
    if (g0 >= 0.0 && (!require_nonneg_beta1 || ols.beta1 >= 0.0)) return ols;

    auto ssr = [&](const math::ParamVec& p) {
        Eigen::Vector4d b(p[0], p[1], p[2], p[3]);
        return (y - Z_ * b).squaredNorm();
    };
    auto violation = [&](const math::ParamVec& p) {
        double v = std::max(0.0, -constraint_value(p[1], p[2], p[3]));
        if (require_nonneg_beta1) v = std::max(v, std::max(0.0, -p[1]));
        return v;
    };

    math::ParamVec p(4);
    p << ols.beta0, ols.beta1, ols.beta2, ols.beta3;

    double yscale = std::max(1e-12, y.maxCoeff() - y.minCoeff());
    math::ParamVec step(4);
    for (int j = 0; j < 4; ++j) step[j] = std::max(0.25 * std::abs(p[j]), 0.05 * yscale);

    double base_ssr = std::max(1.0, ssr(p));
    double mu = base_ssr;
    math::NelderMeadOptions nm;
    nm.max_iter = 800;
    nm.f_tol = 1e-12;

    const int max_outer = 60;
    bool ok = false;
    for (int outer = 0; outer < max_outer; ++outer) {
        auto objective = [&](const math::ParamVec& q) {
            double v = violation(q);
            return ssr(q) + mu * v * v;
        };
        // One restart from the converged vertex guards against a collapsed
        // simplex while the penalty surface steepens.
        for (int attempt = 0; attempt < 2; ++attempt) {
            auto r = math::nelder_mead(objective, p, step, nm);
            p = r.x;
        }
        if (violation(p) <= kConstraintTol) {
            ok = true;
            if (require_nonneg_beta1 && p[1] < 0.0) p[1] = 0.0;
            // Penalty solutions approach the surface from the infeasible
            // side; bump beta3 until the recomputed constraint value clears
            // zero despite cancellation in the three terms.
            if (std::abs(p[1]) > 1e-300) {
                double term_scale = p[1] * p[1] + 18.0 * p[2] * p[2] +
                                    12.0 * std::abs(p[1] * p[3]) + 1e-300;
                for (int i = 0; i < 10 && constraint_value(p[1], p[2], p[3]) < 0.0; ++i) {
                    double g = constraint_value(p[1], p[2], p[3]);
                    double lift = std::max(-2.0 * g, 1e-13 * term_scale);
                    p[3] += lift / (12.0 * p[1]);
                }
            } else if (constraint_value(p[1], p[2], p[3]) < 0.0) {
                p[2] = 0.0; // g reduces to -18 beta2^2 with |beta2| <= sqrt(tol/18)
            }
            break;
        }
        mu *= 2.0;
        for (int j = 0; j < 4; ++j) step[j] = std::max(0.5 * step[j], 1e-6 * yscale);
    }
    if (!ok)
        throw EstimationError(
            "constrained_ls_fit: penalty iterations exhausted without reaching the constraint surface");

    ThetaEstimate out;
    out.beta0 = p[0];
    out.beta1 = p[1];
    out.beta2 = p[2];
    out.beta3 = p[3];
    out.scale_epsilon = 1e-8 * (y.maxCoeff() - y.minCoeff());
    return out;
}

ThetaEstimate ols_fit(const QuantilePool& pool) {
    CfSolver solver(pool_levels(pool));
    return solver.fit(pool_values(pool));
}

ThetaEstimate constrained_ls_fit(const QuantilePool& pool, bool require_nonneg_beta1) {
    CfSolver solver(pool_levels(pool));
    return solver.fit_constrained(pool_values(pool), require_nonneg_beta1);
}

} // namespace qcm::cf
