#pragma once

namespace qcm::math {

/// Upper tail P(X > x) of a chi-squared law with df degrees of freedom.
double chi_squared_sf(double x, double df);

/// Student-t quantile for (possibly non-integer) nu > 0.
double student_t_quantile(double alpha, double nu);

/// Student-t CDF.
double student_t_cdf(double x, double nu);

} // namespace qcm::math
