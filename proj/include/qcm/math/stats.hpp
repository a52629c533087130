#pragma once

#include <span>
#include <vector>

namespace qcm::math {

double mean(std::span<const double> v);

/// Sample variance with the 1/(n-1) convention.
double sample_variance(std::span<const double> v);

/// Lower empirical quantile: the ceil(n*alpha)-th order statistic. This is
/// always a minimizer of the check loss over the sample.
double empirical_quantile(std::span<const double> v, double alpha);

/// Interpolating quantile (the usual "type 7" definition), used for
/// summary tables.
double quantile_type7(std::span<const double> sorted, double p);

struct BoxStats {
    int n = 0;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
    std::vector<double> outliers; // beyond 1.5*IQR whiskers
};

BoxStats boxplot_stats(std::span<const double> v);

/// Sample autocorrelations rho_1..rho_max_lag.
std::vector<double> autocorrelations(std::span<const double> v, int max_lag);

double median(std::span<const double> v);

} // namespace qcm::math
