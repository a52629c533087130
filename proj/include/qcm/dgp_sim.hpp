#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "qcm/errors.hpp"
#include "qcm/pipeline.hpp"

namespace qcm::sim {

struct GarchParams {
    double omega = 0.1;
    double alpha = 0.1;
    double beta = 0.8;
};

enum class Innovation {
    Normal,
    StudentTRandomDf, // standardized t with per-timepoint df ~ U[5,20]
    Zero              // degenerate hook for recursion tests
};

/// GARCH sample with exact per-timepoint ground truth. sigma2 plays the role
/// of the true conditional variance; skewness is zero under both innovation
/// laws and kurtosis is 3 (normal) or 6/(nu_t-4)+3 (standardized t).
struct GarchTruth {
    GarchParams params;
    Innovation innovation = Innovation::Normal;
    std::vector<double> y;
    std::vector<double> sigma2;
    std::vector<double> s_true;
    std::vector<double> k_true;
    std::vector<double> nu; // empty unless StudentTRandomDf

    double quantile(int t, double alpha) const; // true conditional quantile
};

GarchTruth simulate_garch(int T, const GarchParams& params, Innovation innovation,
                          std::uint64_t seed);

struct MnGarchParams {
    double lambda1 = 0.2;
    double tau1 = 0.4;
    double a0 = 0.5;
    double a1 = 0.4;
    double b1 = -0.3;
    double c10 = 0.1, c11 = 0.05, c12 = 0.85;
    double c20 = 0.3, c21 = 0.1, c22 = 0.8;

    double lambda2() const { return 1.0 - lambda1; }
    double tau2() const { return -(lambda1 / lambda2()) * tau1; }
};

/// ARMA(1,1) sample driven by two-component mixed-normal shocks whose
/// component variances follow GARCH recursions, with exact conditional
/// mean/variance/skewness/kurtosis and quantiles at every timepoint.
struct MnGarchTruth {
    MnGarchParams params;
    std::vector<double> y, eps;
    std::vector<double> mu_t, h_t, s_t, k_t;
    std::vector<double> sigma1_sq, sigma2_sq;

    double quantile(int t, double alpha) const; // mu_t + mixture quantile
};

MnGarchTruth simulate_mn_garch(int T, const MnGarchParams& params, std::uint64_t seed);

struct MixtureMoments {
    double h = 0.0, s = 0.0, k = 0.0;
};

/// Central moments of a two-component normal mixture with zero overall mean.
MixtureMoments mn_moments(double lambda1, double tau1, double sigma1_sq, double lambda2,
                          double tau2, double sigma2_sq);

/// Root of lambda1 Phi(q; tau1, s1^2) + lambda2 Phi(q; tau2, s2^2) = alpha,
/// solved to |CDF(q) - alpha| <= 1e-10.
double mn_quantile(double alpha, double lambda1, double tau1, double sigma1_sq, double lambda2,
                   double tau2, double sigma2_sq);

/// Quantile-estimation error profiles used by the simulation study. Cases:
/// 1 passes the true quantiles through, 2 adds zero-mean noise, 3 adds
/// tail-biased noise; case 4 (CAViaR estimation) is produced by the
/// pipeline, not by inject_errors.
struct ErrorCase {
    int case_id = 1;
    double sigma2_base = 0.2;

    double mean(double alpha) const;
    double variance(double alpha) const;
};

Eigen::MatrixXd inject_errors(const Eigen::MatrixXd& truth_quantiles,
                              const std::vector<double>& levels, const ErrorCase& error_case,
                              std::uint64_t seed);

struct DeltaSeries {
    std::vector<double> dh, ds, dk;
};

DeltaSeries delta_metrics(const pipeline::QcmSeries& qcm, std::span<const double> h_true,
                          std::span<const double> s_true, std::span<const double> k_true);

} // namespace qcm::sim
