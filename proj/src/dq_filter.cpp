#include "qcm/dq_filter.hpp"

#include <Eigen/Dense>
#include <sstream>

#include "qcm/math/special.hpp"

namespace qcm::dq {

HitSeries hits(std::span<const double> y, std::span<const double> q_path, double alpha) {
    if (y.size() != q_path.size())
        throw ConfigError("hits: series and quantile path lengths differ");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("hits: alpha must lie strictly in (0,1)");
    HitSeries out;
    out.alpha = alpha;
    out.hits.resize(y.size());
    for (std::size_t t = 0; t < y.size(); ++t)
        out.hits[t] = (y[t] < q_path[t] ? 1.0 : 0.0) - alpha;
    return out;
}

DqResult dq_insample(const HitSeries& h) {
    constexpr int kLags = 4;
    const auto T = static_cast<int>(h.hits.size());
    if (T < 50) throw ConfigError("dq_insample: need at least 50 observations");
    const int n = T - kLags;

    Eigen::MatrixXd X(n, kLags);
    Eigen::VectorXd hit(n);
    for (int t = kLags; t < T; ++t) {
        hit[t - kLags] = h.hits[static_cast<std::size_t>(t)];
        for (int j = 1; j <= kLags; ++j)
            X(t - kLags, j - 1) = h.hits[static_cast<std::size_t>(t - j)];
    }

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(X);
    cod.setThreshold(1e-10);
    DqResult res;
    if (cod.rank() < kLags) {
        res.statistic = 0.0;
        res.pvalue = 1.0;
        res.degenerate = true;
        return res;
    }
    // Hit'X (X'X)^{-1} X'Hit = squared norm of the projection of Hit onto
    // the column space of X.
    Eigen::VectorXd coef = cod.solve(hit);
    double explained = (X * coef).squaredNorm();
    res.statistic = explained / (h.alpha * (1.0 - h.alpha));
    res.pvalue = math::chi_squared_sf(res.statistic, kLags);
    res.degenerate = false;
    return res;
}

cf::QuantilePool FilterResult::pool_at(const std::vector<CandidatePath>& paths, int t) const {
    cf::QuantilePool pool;
    pool.reserve(kept.size());
    for (int idx : kept) {
        const auto& p = paths[static_cast<std::size_t>(idx)];
        pool.push_back({p.alpha, p.path[static_cast<std::size_t>(t)], p.source});
    }
    return pool;
}

FilterResult filter_pool(const std::vector<CandidatePath>& paths, std::span<const double> y,
                         double p_star) {
    if (!(p_star >= 0.0 && p_star < 1.0))
        throw ConfigError("filter_pool: p_star must lie in [0,1)");
    FilterResult res;
    res.tests.reserve(paths.size());
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const auto& cand = paths[i];
        DqResult dq = dq_insample(hits(y, cand.path, cand.alpha));
        res.tests.push_back(dq);
        if (dq.pvalue >= p_star) {
            res.kept.push_back(static_cast<int>(i));
            res.kept_levels.push_back(cand.alpha);
            res.kept_sources.push_back(cand.source);
        }
    }
    if (res.kept.size() < 5) {
        std::ostringstream msg;
        msg << "filter_pool: only " << res.kept.size() << " of " << paths.size()
            << " quantile paths survived the DQ screen at p* = " << p_star
            << "; at least 5 are needed for the moment regression";
        throw InsufficientPoolError(msg.str());
    }
    return res;
}

} // namespace qcm::dq
