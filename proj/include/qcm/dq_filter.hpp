#pragma once

#include <span>
#include <vector>

#include "qcm/cf_core.hpp"
#include "qcm/errors.hpp"

namespace qcm::dq {

/// Demeaned exceedance indicators Hit_t = I(y_t < Q_t) - alpha.
struct HitSeries {
    std::vector<double> hits;
    double alpha = 0.0;
};

HitSeries hits(std::span<const double> y, std::span<const double> q_path, double alpha);

struct DqResult {
    double statistic = 0.0;
    double pvalue = 1.0;
    bool degenerate = false; // rank-deficient lagged-hit regressors
};

/// In-sample dynamic quantile test: the hit sequence is regressed on its own
/// first four lags (no constant, no contemporaneous quantile) and the
/// explained quadratic form is referred to a chi-squared law with 4 degrees
/// of freedom. The first four timepoints drop out of the regression.
DqResult dq_insample(const HitSeries& h);

/// One fitted quantile path submitted to the screen.
struct CandidatePath {
    double alpha = 0.0;
    int source = -1;
    std::span<const double> path;
};

struct FilterResult {
    std::vector<int> kept;       // indices into the candidate list
    std::vector<DqResult> tests; // one per candidate
    std::vector<double> kept_levels;
    std::vector<int> kept_sources;

    /// Pool S_t: surviving paths evaluated at timepoint t (0-based).
    cf::QuantilePool pool_at(const std::vector<CandidatePath>& paths, int t) const;
};

/// Discards candidates whose DQ p-value falls below p_star and groups the
/// survivors. Throws InsufficientPoolError when fewer than 5 paths remain.
FilterResult filter_pool(const std::vector<CandidatePath>& paths, std::span<const double> y,
                         double p_star);

} // namespace qcm::dq
