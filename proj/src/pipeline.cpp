#include "qcm/pipeline.hpp"

#include <chrono>
#include <set>
#include <sstream>

#include "qcm/parallel.hpp"
#include "qcm/rng.hpp"

namespace qcm::pipeline {

namespace {

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

std::vector<double> default_grid() {
    std::vector<double> g(99);
    for (int i = 1; i <= 99; ++i) g[static_cast<std::size_t>(i - 1)] = i / 100.0;
    return g;
}

void Config::validate() const {
    if (grid.empty()) throw ConfigError("pipeline config: empty quantile grid");
    double prev = 0.0;
    for (double a : grid) {
        if (!(a > 0.0 && a < 1.0)) {
            std::ostringstream msg;
            msg << "pipeline config: grid level " << a << " outside (0,1)";
            throw ConfigError(msg.str());
        }
        if (!(a > prev)) throw ConfigError("pipeline config: grid must be strictly increasing");
        prev = a;
    }
    if (families.empty()) throw ConfigError("pipeline config: no CAViaR families selected");
    std::set<caviar::Family> seen(families.begin(), families.end());
    if (seen.size() != families.size())
        throw ConfigError("pipeline config: duplicate CAViaR family");
    if (!(p_star >= 0.0 && p_star < 1.0))
        throw ConfigError("pipeline config: p_star must lie in [0,1)");
    if (!(adap_smoothing > 0.0))
        throw ConfigError("pipeline config: adaptive smoothing constant must be positive");
}

FilteredPool build_pool(std::span<const double> y, const Config& cfg) {
    cfg.validate();
    const auto T = static_cast<int>(y.size());
    if (T < 100) throw ConfigError("pipeline: need at least 100 observations");

    const int n_jobs = static_cast<int>(cfg.families.size() * cfg.grid.size());
    std::vector<PathReport> report(static_cast<std::size_t>(n_jobs));
    std::vector<std::vector<double>> paths(static_cast<std::size_t>(n_jobs));

    auto t0 = std::chrono::steady_clock::now();
    parallel_for(n_jobs, cfg.threads, [&](int job) {
        const auto fi = static_cast<std::size_t>(job) / cfg.grid.size();
        const auto li = static_cast<std::size_t>(job) % cfg.grid.size();
        caviar::CaviarSpec spec{cfg.families[fi], cfg.grid[li], cfg.adap_smoothing};
        auto& rep = report[static_cast<std::size_t>(job)];
        rep.family = spec.family;
        rep.alpha = spec.alpha;
        auto job_t0 = std::chrono::steady_clock::now();
        try {
            caviar::EstimateOptions opts = cfg.estimation;
            opts.seed = rng::derive(cfg.seed, {static_cast<std::uint64_t>(fi),
                                               static_cast<std::uint64_t>(li)});
            caviar::CaviarFit fit = caviar::estimate(spec, y, opts);
            rep.psi = fit.psi;
            rep.loss = fit.loss;
            rep.hit_freq = fit.hit_freq;
            rep.estimated = true;
            paths[static_cast<std::size_t>(job)] = std::move(fit.q_path);
        } catch (const Error& e) {
            // A failed (family, level) estimation is dropped exactly like a
            // DQ-discarded path.
            rep.estimated = false;
            rep.error = e.what();
        }
        rep.seconds = seconds_since(job_t0);
    });

    FilteredPool pool;
    pool.seconds_estimation = seconds_since(t0);

    auto t1 = std::chrono::steady_clock::now();
    std::vector<dq::CandidatePath> candidates;
    std::vector<int> candidate_job;
    for (int job = 0; job < n_jobs; ++job) {
        if (!report[static_cast<std::size_t>(job)].estimated) continue;
        candidates.push_back({report[static_cast<std::size_t>(job)].alpha,
                              static_cast<int>(report[static_cast<std::size_t>(job)].family),
                              paths[static_cast<std::size_t>(job)]});
        candidate_job.push_back(job);
    }
    if (candidates.empty())
        throw InsufficientPoolError("pipeline: every (family, level) estimation failed");

    dq::FilterResult filtered = dq::filter_pool(candidates, y, cfg.p_star);
    for (std::size_t c = 0; c < candidates.size(); ++c)
        report[static_cast<std::size_t>(candidate_job[c])].dq = filtered.tests[c];
    for (int idx : filtered.kept)
        report[static_cast<std::size_t>(candidate_job[static_cast<std::size_t>(idx)])].kept = true;

    const auto n0 = static_cast<int>(filtered.kept.size());
    pool.levels = filtered.kept_levels;
    pool.sources = filtered.kept_sources;
    pool.values.resize(T, n0);
    for (int j = 0; j < n0; ++j) {
        const auto& path = paths[static_cast<std::size_t>(
            candidate_job[static_cast<std::size_t>(filtered.kept[static_cast<std::size_t>(j)])])];
        for (int t = 0; t < T; ++t) pool.values(t, j) = path[static_cast<std::size_t>(t)];
    }
    pool.report = std::move(report);
    pool.seconds_filter = seconds_since(t1);
    return pool;
}

QcmSeries qcm_from_pool(const FilteredPool& pool, const Config& cfg) {
    const auto T = static_cast<int>(pool.values.rows());
    const auto n0 = static_cast<int>(pool.values.cols());
    cf::CfSolver solver(pool.levels);

    QcmSeries series;
    series.rows.resize(static_cast<std::size_t>(T));
    parallel_for(T, cfg.threads, [&](int t) {
        try {
            Eigen::VectorXd yt = pool.values.row(t).transpose();
            cf::ThetaEstimate theta = solver.fit(yt);
            if (theta.beta1 < 0.0) {
                // Negative scale is not interpretable as a volatility; refit
                // on the admissible region with beta1 >= 0 added.
                theta = solver.fit_constrained(yt, true);
            }
            if (cfg.policy == ConstraintPolicy::Enforce && !cf::moment_constraint_holds(theta))
                theta = solver.fit_constrained(yt, false);
            cf::QcmTriple q = cf::qcm_from_theta(theta);
            auto& row = series.rows[static_cast<std::size_t>(t)];
            row.t = t + 1;
            row.h = q.h;
            row.s = q.s;
            row.k = q.k;
            row.constraint_ok = q.constraint_ok;
            row.n0 = n0;
            row.beta0 = theta.beta0;
        } catch (const Error& e) {
            std::ostringstream msg;
            msg << "timepoint " << t + 1 << ": " << e.what();
            throw EstimationError(msg.str());
        }
    });
    return series;
}

RunResult run(std::span<const double> y, const Config& cfg) {
    RunResult out;
    FilteredPool pool = build_pool(y, cfg);
    auto t0 = std::chrono::steady_clock::now();
    out.qcm = qcm_from_pool(pool, cfg);
    out.seconds_regression = seconds_since(t0);
    out.n0 = static_cast<int>(pool.values.cols());
    out.report = std::move(pool.report);
    out.seconds_estimation = pool.seconds_estimation;
    out.seconds_filter = pool.seconds_filter;
    return out;
}

} // namespace qcm::pipeline
