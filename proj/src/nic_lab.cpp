#include "qcm/nic_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qcm/math/normal.hpp"
#include "qcm/math/special.hpp"
#include "qcm/math/stats.hpp"

namespace qcm::nic {

namespace {

constexpr double kKernelCut = 10.0; // kernel support truncation, in bandwidths

struct SortedSample {
    std::vector<double> x, y;
};

SortedSample sort_by_x(std::span<const double> x, std::span<const double> y) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    SortedSample s;
    s.x.resize(x.size());
    s.y.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        s.x[i] = x[idx[i]];
        s.y[i] = y[idx[i]];
    }
    return s;
}

Eigen::VectorXd ls_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double* ssr) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    qr.setThreshold(1e-10);
    if (qr.rank() < X.cols())
        throw SingularDesignError("least squares: collinear regressors");
    Eigen::VectorXd b = qr.solve(y);
    if (ssr) *ssr = (y - X * b).squaredNorm();
    return b;
}

} // namespace

TarFit fit_tar(std::span<const double> y, int p, bool prune) {
    const auto T = static_cast<int>(y.size());
    if (p < 1) throw ConfigError("fit_tar: order must be positive");
    if (T <= 10 * p) throw ConfigError("fit_tar: series too short for the requested order");

    const int n = T - p;
    std::vector<int> rows_neg, rows_pos;
    for (int t = p; t < T; ++t)
        (y[t - 1] <= 0.0 ? rows_neg : rows_pos).push_back(t);

    auto fit_regime = [&](const std::vector<int>& rows, Eigen::VectorXd& coef,
                          std::vector<bool>& kept) {
        const auto m = static_cast<int>(rows.size());
        if (m < p + 2)
            throw EstimationError("fit_tar: a regime has too few observations to fit the order");
        const int k = p + 1;
        kept.assign(static_cast<std::size_t>(k), true);
        for (int pass = 0;; ++pass) {
            std::vector<int> active;
            for (int j = 0; j < k; ++j)
                if (kept[static_cast<std::size_t>(j)]) active.push_back(j);
            coef = Eigen::VectorXd::Zero(k);
            if (active.empty()) return;
            Eigen::MatrixXd X(m, static_cast<Eigen::Index>(active.size()));
            Eigen::VectorXd b(m);
            for (int i = 0; i < m; ++i) {
                int t = rows[static_cast<std::size_t>(i)];
                b[i] = y[t];
                for (std::size_t a = 0; a < active.size(); ++a) {
                    int j = active[a];
                    X(i, static_cast<Eigen::Index>(a)) = j == 0 ? 1.0 : y[t - j];
                }
            }
            double ssr = 0.0;
            Eigen::VectorXd beta = ls_solve(X, b, &ssr);
            for (std::size_t a = 0; a < active.size(); ++a)
                coef[active[a]] = beta[static_cast<Eigen::Index>(a)];
            if (!prune || pass >= 1) return;

            const int dof = m - static_cast<int>(active.size());
            if (dof < 2) return;
            double sigma2 = ssr / dof;
            Eigen::MatrixXd xtx_inv = (X.transpose() * X).inverse();
            double crit = math::student_t_quantile(0.975, dof);
            bool changed = false;
            for (std::size_t a = 0; a < active.size(); ++a) {
                double se = std::sqrt(sigma2 * xtx_inv(static_cast<Eigen::Index>(a),
                                                       static_cast<Eigen::Index>(a)));
                double tstat = se > 0.0 ? beta[static_cast<Eigen::Index>(a)] / se : 0.0;
                if (std::abs(tstat) < crit) {
                    kept[static_cast<std::size_t>(active[a])] = false;
                    changed = true;
                }
            }
            if (!changed) return;
        }
    };

    TarFit fit;
    fit.order = p;
    fit.start = p;
    fit_regime(rows_neg, fit.coef_neg, fit.kept_neg);
    fit_regime(rows_pos, fit.coef_pos, fit.kept_pos);

    fit.mu_hat.resize(static_cast<std::size_t>(n));
    fit.residuals.resize(static_cast<std::size_t>(n));
    for (int t = p; t < T; ++t) {
        const Eigen::VectorXd& c = y[t - 1] <= 0.0 ? fit.coef_neg : fit.coef_pos;
        double mu = c[0];
        for (int j = 1; j <= p; ++j) mu += c[j] * y[t - j];
        fit.mu_hat[static_cast<std::size_t>(t - p)] = mu;
        fit.residuals[static_cast<std::size_t>(t - p)] = y[t] - mu;
    }
    return fit;
}

Curve nw_regress(std::span<const double> x, std::span<const double> target, double bandwidth,
                 std::span<const double> grid) {
    if (x.size() != target.size()) throw ConfigError("nw_regress: sample lengths differ");
    if (x.empty()) throw ConfigError("nw_regress: empty sample");
    if (!(bandwidth > 0.0)) throw ConfigError("nw_regress: bandwidth must be positive");

    SortedSample s = sort_by_x(x, target);
    const auto n = static_cast<std::ptrdiff_t>(s.x.size());
    const double guard = 1e-8 * static_cast<double>(n);
    const double cut = kKernelCut * bandwidth;

    Curve out;
    out.grid.assign(grid.begin(), grid.end());
    out.value.resize(grid.size());
    out.supported.resize(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double x0 = grid[g];
        auto lo = std::lower_bound(s.x.begin(), s.x.end(), x0 - cut) - s.x.begin();
        auto hi = std::upper_bound(s.x.begin(), s.x.end(), x0 + cut) - s.x.begin();
        double mass = 0.0, weighted = 0.0;
        for (std::ptrdiff_t i = lo; i < hi; ++i) {
            double w = math::normal_pdf((x0 - s.x[static_cast<std::size_t>(i)]) / bandwidth) / bandwidth;
            mass += w;
            weighted += w * s.y[static_cast<std::size_t>(i)];
        }
        if (mass < guard) {
            out.value[g] = std::numeric_limits<double>::quiet_NaN();
            out.supported[g] = false;
        } else {
            out.value[g] = weighted / mass;
            out.supported[g] = true;
        }
    }
    return out;
}

double cv_bandwidth(std::span<const double> x, std::span<const double> target) {
    const auto n = static_cast<int>(x.size());
    if (n < 50) throw ConfigError("cv_bandwidth: need at least 50 observations");
    if (x.size() != target.size()) throw ConfigError("cv_bandwidth: sample lengths differ");

    SortedSample s = sort_by_x(x, target);
    double sd = std::sqrt(math::sample_variance(s.x));
    double iqr = math::quantile_type7(s.x, 0.75) - math::quantile_type7(s.x, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.349);
    if (!(spread > 0.0)) throw DomainError("cv_bandwidth: driver has no spread");
    const double reference = 1.06 * spread * std::pow(static_cast<double>(n), -0.2);

    const int n_candidates = 30;
    double best_b = reference, best_score = std::numeric_limits<double>::infinity();
    for (int c = 0; c < n_candidates; ++c) {
        double f = 0.1 * std::pow(30.0, static_cast<double>(c) / (n_candidates - 1));
        double b = f * reference;
        double cut = kKernelCut * b;
        double k0 = math::normal_pdf(0.0) / b;
        double score = 0.0;
        int used = 0;
        std::ptrdiff_t lo = 0, hi = 0;
        for (int i = 0; i < n; ++i) {
            double xi = s.x[static_cast<std::size_t>(i)];
            while (lo < n && s.x[static_cast<std::size_t>(lo)] < xi - cut) ++lo;
            while (hi < n && s.x[static_cast<std::size_t>(hi)] <= xi + cut) ++hi;
            double mass = 0.0, weighted = 0.0;
            for (std::ptrdiff_t j = lo; j < hi; ++j) {
                double w = math::normal_pdf((xi - s.x[static_cast<std::size_t>(j)]) / b) / b;
                mass += w;
                weighted += w * s.y[static_cast<std::size_t>(j)];
            }
            double denom = mass - k0;
            if (denom <= 1e-12 * k0) continue; // isolated point at this bandwidth
            double pred = (weighted - k0 * s.y[static_cast<std::size_t>(i)]) / denom;
            double e = s.y[static_cast<std::size_t>(i)] - pred;
            score += e * e;
            ++used;
        }
        if (used == 0) continue;
        score /= used;
        if (score < best_score) {
            best_score = score;
            best_b = b;
        }
    }
    return best_b;
}

std::vector<double> make_eval_grid(std::span<const double> driver, int points) {
    std::vector<double> sorted(driver.begin(), driver.end());
    std::sort(sorted.begin(), sorted.end());
    double lo = math::quantile_type7(sorted, 0.01);
    double hi = math::quantile_type7(sorted, 0.99);
    std::vector<double> grid(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i)
        grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1.0);
    return grid;
}

NicEstimate robinson_fit(std::span<const double> response, std::span<const double> response_lag,
                         std::span<const double> driver) {
    const auto n = static_cast<int>(response.size());
    if (response_lag.size() != response.size() || driver.size() != response.size())
        throw ConfigError("robinson_fit: series lengths differ");
    if (n < 100) throw ConfigError("robinson_fit: need at least 100 aligned observations");

    NicEstimate est;
    est.b1 = cv_bandwidth(driver, response_lag);
    est.b2 = cv_bandwidth(driver, response);

    // Kernel fits evaluated back at the sample points.
    Curve phi1 = nw_regress(driver, response_lag, est.b1, driver);
    Curve phi2 = nw_regress(driver, response, est.b2, driver);

    double num = 0.0, den = 0.0;
    for (int t = 0; t < n; ++t) {
        auto ti = static_cast<std::size_t>(t);
        if (!phi1.supported[ti] || !phi2.supported[ti]) continue;
        double u = response_lag[ti] - phi1.value[ti];
        num += u * (response[ti] - phi2.value[ti]);
        den += u * u;
    }
    double scale = 0.0;
    for (double v : response_lag) scale += v * v;
    if (!(den > 1e-12 * std::max(scale, 1e-300)))
        throw EstimationError("robinson_fit: degenerate persistence denominator");
    est.theta_hat = num / den;

    std::vector<double> adjusted(static_cast<std::size_t>(n));
    for (int t = 0; t < n; ++t)
        adjusted[static_cast<std::size_t>(t)] =
            response[static_cast<std::size_t>(t)] -
            est.theta_hat * response_lag[static_cast<std::size_t>(t)];
    est.b3 = cv_bandwidth(driver, adjusted);
    std::vector<double> grid = make_eval_grid(driver);
    est.g_hat = nw_regress(driver, adjusted, est.b3, grid);
    return est;
}

const char* nic_form_name(NicForm form) {
    switch (form) {
        case NicForm::VarianceQuadratic: return "quadratic";
        case NicForm::VarianceLeverage: return "quadratic+leverage";
        case NicForm::SkewnessCubic: return "cubic";
        case NicForm::KurtosisQuartic: return "quartic";
    }
    return "?";
}

ParametricNicFit fit_parametric_nic(NicForm form, std::span<const double> response,
                                    std::span<const double> response_lag,
                                    std::span<const double> driver) {
    const auto n = static_cast<int>(response.size());
    if (response_lag.size() != response.size() || driver.size() != response.size())
        throw ConfigError("fit_parametric_nic: series lengths differ");
    const int extra = form == NicForm::VarianceLeverage ? 2 : 1;
    const int k = 1 + extra; // regressors besides the intercept: lag + form terms
    if (n < k + 2) throw ConfigError("fit_parametric_nic: sample too short");

    Eigen::MatrixXd X(n, k + 1);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) {
        auto ii = static_cast<std::size_t>(i);
        double x = driver[ii];
        b[i] = response[ii];
        X(i, 0) = 1.0;
        X(i, 1) = response_lag[ii];
        switch (form) {
            case NicForm::VarianceQuadratic:
                X(i, 2) = x * x;
                break;
            case NicForm::VarianceLeverage:
                X(i, 2) = x * x;
                X(i, 3) = x < 0.0 ? x * x : 0.0;
                break;
            case NicForm::SkewnessCubic:
                X(i, 2) = x * x * x;
                break;
            case NicForm::KurtosisQuartic:
                X(i, 2) = x * x * x * x;
                break;
        }
    }
    double ssr = 0.0;
    Eigen::VectorXd beta = ls_solve(X, b, &ssr);

    double ymean = b.mean();
    double sst = (b.array() - ymean).matrix().squaredNorm();
    ParametricNicFit fit;
    fit.form = form;
    fit.theta = beta[1];
    fit.coef = Eigen::VectorXd(extra + 1);
    fit.coef[0] = beta[0];
    for (int j = 0; j < extra; ++j) fit.coef[j + 1] = beta[2 + j];
    fit.r2 = sst > 0.0 ? 1.0 - ssr / sst : 0.0;
    fit.adj_r2 = 1.0 - (1.0 - fit.r2) * (n - 1.0) / (n - k - 1.0);
    return fit;
}

double evaluate_nic_form(NicForm form, const Eigen::VectorXd& coef, double x) {
    switch (form) {
        case NicForm::VarianceQuadratic:
            return coef[0] + coef[1] * x * x;
        case NicForm::VarianceLeverage:
            return coef[0] + coef[1] * x * x + coef[2] * (x < 0.0 ? x * x : 0.0);
        case NicForm::SkewnessCubic:
            return coef[0] + coef[1] * x * x * x;
        case NicForm::KurtosisQuartic:
            return coef[0] + coef[1] * x * x * x * x;
    }
    throw ConfigError("evaluate_nic_form: unknown form");
}

} // namespace qcm::nic
