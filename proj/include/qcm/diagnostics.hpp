#pragma once

#include <span>
#include <vector>

#include "qcm/errors.hpp"
#include "qcm/pipeline.hpp"

namespace qcm::diag {

struct Descriptive {
    int n = 0;
    double mean = 0.0;
    double variance = 0.0; // 1/(n-1)
    double skewness = 0.0; // standardized third central moment
    double kurtosis = 0.0; // standardized fourth central moment, not excess
    double max = 0.0;
    double min = 0.0;
    bool degenerate = false; // zero variance; skewness/kurtosis undefined
};

Descriptive descriptive_stats(std::span<const double> series);

struct LjungBox {
    double statistic = 0.0;
    double pvalue = 1.0;
    bool degenerate = false;
};

/// Portmanteau autocorrelation test with the n(n+2) small-sample weights and
/// a chi-squared reference with `lags` degrees of freedom.
LjungBox ljung_box(std::span<const double> series, int lags = 20);

/// Moment residuals of a fitted QCM series against the observed returns:
/// zero-mean under correct conditional moments.
struct MomentResiduals {
    std::vector<double> e_h, e_s, e_k;
};

MomentResiduals moment_residuals(std::span<const double> y, std::span<const double> mu_hat,
                                 const pipeline::QcmSeries& qcm);

struct TTest {
    double statistic = 0.0;
    double pvalue = 1.0;
    bool degenerate = false;
};

/// Zero-mean t test. Because moment residuals are serially dependent the
/// variance defaults to a Bartlett-kernel long-run estimator with
/// floor(n^(1/3)) lags; newey_west = false falls back to the plain i.i.d.
/// variance for comparison.
TTest mean_zero_ttest(std::span<const double> series, bool newey_west = true);

struct ValidityTests {
    TTest h, s, k;
};

ValidityTests validity_ttests(std::span<const double> y, std::span<const double> mu_hat,
                              const pipeline::QcmSeries& qcm, bool newey_west = true);

} // namespace qcm::diag
