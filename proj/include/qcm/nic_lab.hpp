#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "qcm/errors.hpp"

namespace qcm::nic {

/// Threshold autoregression split on the sign of the previous observation
/// (threshold 0, delay 1). Fitted values start at index `start` = p of the
/// input series; residuals are y - mu_hat exactly.
struct TarFit {
    int order = 0;
    Eigen::VectorXd coef_neg; // intercept + p lags, regime y_{t-1} <= 0
    Eigen::VectorXd coef_pos; // intercept + p lags, regime y_{t-1} > 0
    std::vector<bool> kept_neg, kept_pos; // false = pruned to zero
    int start = 0;
    std::vector<double> mu_hat;    // length T - p
    std::vector<double> residuals; // length T - p
};

/// Least squares per regime; with prune = true, coefficients insignificant
/// at the two-sided 5% level (i.i.d. standard errors) are dropped and the
/// regime refit once.
TarFit fit_tar(std::span<const double> y, int p, bool prune = false);

struct Curve {
    std::vector<double> grid;
    std::vector<double> value;
    std::vector<bool> supported; // kernel mass above the density guard
};

/// Gaussian-kernel ratio estimator of E[target | x] on an evaluation grid.
/// Grid points with kernel mass below 1e-8 * n are marked unsupported.
Curve nw_regress(std::span<const double> x, std::span<const double> target, double bandwidth,
                 std::span<const double> grid);

/// Leave-one-out bandwidth selection over 30 log-spaced candidates spanning
/// [0.1, 3] times the Silverman reference bandwidth.
double cv_bandwidth(std::span<const double> x, std::span<const double> target);

std::vector<double> make_eval_grid(std::span<const double> driver, int points = 201);

/// Semiparametric fit of response_t = theta * response_{t-1} + g(driver) by
/// double kernel smoothing: theta from the partialled-out regression, g from
/// smoothing the persistence-adjusted response.
struct NicEstimate {
    double theta_hat = 0.0;
    Curve g_hat;
    double b1 = 0.0, b2 = 0.0, b3 = 0.0;
};

NicEstimate robinson_fit(std::span<const double> response, std::span<const double> response_lag,
                         std::span<const double> driver);

enum class NicForm {
    VarianceQuadratic, // g(x) = v0 + v1 x^2
    VarianceLeverage,  // g(x) = v0 + v1 x^2 + v2 x^2 I(x<0)
    SkewnessCubic,     // g(x) = v0 + v1 x^3
    KurtosisQuartic    // g(x) = v0 + v1 x^4
};

const char* nic_form_name(NicForm form);

struct ParametricNicFit {
    NicForm form;
    double theta = 0.0;      // persistence coefficient
    Eigen::VectorXd coef;    // v0, v1 (, v2)
    double r2 = 0.0;
    double adj_r2 = 0.0;
};

ParametricNicFit fit_parametric_nic(NicForm form, std::span<const double> response,
                                    std::span<const double> response_lag,
                                    std::span<const double> driver);

double evaluate_nic_form(NicForm form, const Eigen::VectorXd& coef, double x);

} // namespace qcm::nic
