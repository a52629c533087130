#pragma once

#include <Eigen/Dense>
#include <functional>

namespace qcm::math {

// Small dimension (<= 8) vector kept on the stack; every parameter vector in
// this project has at most 4 entries.
using ParamVec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 8, 1>;

struct NelderMeadOptions {
    int max_iter = 500;
    double f_tol = 1e-8; // relative spread tolerance on simplex values
};

struct NelderMeadResult {
    ParamVec x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Downhill simplex with the standard reflection/expansion/contraction/shrink
/// coefficients (1, 2, 0.5, 0.5). The objective may return +inf to reject a
/// point (soft bounds). Stops when the simplex value spread falls below
/// f_tol * (|f_best| + f_tol) or after max_iter iterations.
NelderMeadResult nelder_mead(const std::function<double(const ParamVec&)>& f,
                             const ParamVec& x0, const ParamVec& step,
                             const NelderMeadOptions& opts = {});

} // namespace qcm::math
