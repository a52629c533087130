#include "qcm/dgp_sim.hpp"

#include <cmath>
#include <sstream>

#include "qcm/math/normal.hpp"
#include "qcm/math/special.hpp"
#include "qcm/rng.hpp"

namespace qcm::sim {

namespace {

constexpr int kBurnIn = 500;

double standardized_t_quantile(double alpha, double nu) {
    return std::sqrt((nu - 2.0) / nu) * math::student_t_quantile(alpha, nu);
}

} // namespace

double GarchTruth::quantile(int t, double alpha) const {
    if (t < 0 || t >= static_cast<int>(y.size()))
        throw ConfigError("GarchTruth::quantile: timepoint out of range");
    double sd = std::sqrt(sigma2[static_cast<std::size_t>(t)]);
    switch (innovation) {
        case Innovation::Normal:
            return sd * math::normal_quantile(alpha);
        case Innovation::StudentTRandomDf:
            return sd * standardized_t_quantile(alpha, nu[static_cast<std::size_t>(t)]);
        case Innovation::Zero:
            throw DomainError("GarchTruth::quantile: undefined for the degenerate innovation");
    }
    throw DomainError("GarchTruth::quantile: unknown innovation");
}

GarchTruth simulate_garch(int T, const GarchParams& p, Innovation innovation, std::uint64_t seed) {
    if (T <= 0) throw ConfigError("simulate_garch: T must be positive");
    if (!(p.omega > 0.0) || p.alpha < 0.0 || p.beta < 0.0)
        throw ConfigError("simulate_garch: need omega > 0 and alpha, beta >= 0");
    if (!(p.alpha + p.beta < 1.0))
        throw ConfigError("simulate_garch: stationarity requires alpha + beta < 1");

    GarchTruth out;
    out.params = p;
    out.innovation = innovation;
    out.y.resize(static_cast<std::size_t>(T));
    out.sigma2.resize(static_cast<std::size_t>(T));
    out.s_true.assign(static_cast<std::size_t>(T), 0.0);
    out.k_true.resize(static_cast<std::size_t>(T));
    if (innovation == Innovation::StudentTRandomDf) out.nu.resize(static_cast<std::size_t>(T));

    auto eng = rng::engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif_nu(5.0, 20.0);

    auto draw_eta = [&](double& nu_out) {
        switch (innovation) {
            case Innovation::Normal:
                nu_out = 0.0;
                return normal(eng);
            case Innovation::StudentTRandomDf: {
                // Standardized t: scale a t_nu draw to unit variance.
                double nu = unif_nu(eng);
                nu_out = nu;
                double z = normal(eng);
                std::gamma_distribution<double> gamma(nu / 2.0, 2.0);
                double g = gamma(eng);
                double tdraw = z / std::sqrt(g / nu);
                return std::sqrt((nu - 2.0) / nu) * tdraw;
            }
            case Innovation::Zero:
                nu_out = 0.0;
                return 0.0;
        }
        return 0.0;
    };

    double sigma2 = p.omega / (1.0 - p.alpha - p.beta);
    double y_prev = 0.0;
    double nu_draw = 0.0;
    for (int t = 0; t < kBurnIn; ++t) {
        sigma2 = p.omega + p.alpha * y_prev * y_prev + p.beta * sigma2;
        y_prev = draw_eta(nu_draw) * std::sqrt(sigma2);
    }
    for (int t = 0; t < T; ++t) {
        sigma2 = p.omega + p.alpha * y_prev * y_prev + p.beta * sigma2;
        double eta = draw_eta(nu_draw);
        y_prev = eta * std::sqrt(sigma2);
        out.y[static_cast<std::size_t>(t)] = y_prev;
        out.sigma2[static_cast<std::size_t>(t)] = sigma2;
        if (innovation == Innovation::StudentTRandomDf) {
            out.nu[static_cast<std::size_t>(t)] = nu_draw;
            out.k_true[static_cast<std::size_t>(t)] = 6.0 / (nu_draw - 4.0) + 3.0;
        } else {
            out.k_true[static_cast<std::size_t>(t)] = 3.0;
        }
    }
    return out;
}

MixtureMoments mn_moments(double lambda1, double tau1, double sigma1_sq, double lambda2,
                          double tau2, double sigma2_sq) {
    double m2 = lambda1 * (tau1 * tau1 + sigma1_sq) + lambda2 * (tau2 * tau2 + sigma2_sq);
    double mean = lambda1 * tau1 + lambda2 * tau2;
    MixtureMoments mm;
    mm.h = m2 - mean * mean;
    mm.s = (lambda1 * (tau1 * tau1 * tau1 + 3.0 * tau1 * sigma1_sq) +
            lambda2 * (tau2 * tau2 * tau2 + 3.0 * tau2 * sigma2_sq)) /
           std::pow(m2, 1.5);
    mm.k = (lambda1 * (std::pow(tau1, 4) + 6.0 * tau1 * tau1 * sigma1_sq + 3.0 * sigma1_sq * sigma1_sq) +
            lambda2 * (std::pow(tau2, 4) + 6.0 * tau2 * tau2 * sigma2_sq + 3.0 * sigma2_sq * sigma2_sq)) /
           (m2 * m2);
    return mm;
}

double mn_quantile(double alpha, double lambda1, double tau1, double sigma1_sq, double lambda2,
                   double tau2, double sigma2_sq) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("mn_quantile: alpha must lie strictly in (0,1)");
    if (!(sigma1_sq > 0.0 && sigma2_sq > 0.0))
        throw DomainError("mn_quantile: component variances must be positive");
    const double s1 = std::sqrt(sigma1_sq), s2 = std::sqrt(sigma2_sq);
    auto cdf = [&](double q) {
        return lambda1 * math::normal_cdf((q - tau1) / s1) + lambda2 * math::normal_cdf((q - tau2) / s2);
    };
    auto pdf = [&](double q) {
        return lambda1 * math::normal_pdf((q - tau1) / s1) / s1 +
               lambda2 * math::normal_pdf((q - tau2) / s2) / s2;
    };

    double lo = std::min(tau1 - 10.0 * s1, tau2 - 10.0 * s2);
    double hi = std::max(tau1 + 10.0 * s1, tau2 + 10.0 * s2);
    while (cdf(lo) > alpha) lo -= 10.0 * std::max(s1, s2);
    while (cdf(hi) < alpha) hi += 10.0 * std::max(s1, s2);

    double q = 0.5 * (lo + hi);
    for (int iter = 0; iter < 200; ++iter) {
        double f = cdf(q) - alpha;
        if (std::abs(f) <= 1e-10) return q;
        if (f > 0.0)
            hi = q;
        else
            lo = q;
        double d = pdf(q);
        double next = d > 0.0 ? q - f / d : q;
        // Newton step, safeguarded by the bracket.
        q = (next > lo && next < hi) ? next : 0.5 * (lo + hi);
    }
    return q;
}

double MnGarchTruth::quantile(int t, double alpha) const {
    if (t < 0 || t >= static_cast<int>(y.size()))
        throw ConfigError("MnGarchTruth::quantile: timepoint out of range");
    auto ti = static_cast<std::size_t>(t);
    return mu_t[ti] + mn_quantile(alpha, params.lambda1, params.tau1, sigma1_sq[ti],
                                  params.lambda2(), params.tau2(), sigma2_sq[ti]);
}

MnGarchTruth simulate_mn_garch(int T, const MnGarchParams& p, std::uint64_t seed) {
    if (T <= 0) throw ConfigError("simulate_mn_garch: T must be positive");
    if (!(p.lambda1 > 0.0 && p.lambda1 < 1.0))
        throw ConfigError("simulate_mn_garch: mixture weight must lie in (0,1)");
    if (!(p.c10 > 0.0 && p.c20 > 0.0) || p.c11 < 0.0 || p.c21 < 0.0 || p.c12 < 0.0 || p.c22 < 0.0)
        throw ConfigError("simulate_mn_garch: invalid component GARCH coefficients");
    if (!(std::abs(p.a1) < 1.0))
        throw ConfigError("simulate_mn_garch: ARMA stationarity requires |a1| < 1");

    const double lam1 = p.lambda1, lam2 = p.lambda2();
    const double tau1 = p.tau1, tau2 = p.tau2();

    // Unconditional component variances solve a linear fixed point; failure
    // to find a positive solution means the variance recursion explodes.
    const double A = lam1 * tau1 * tau1 + lam2 * tau2 * tau2;
    Eigen::Matrix2d M;
    M << 1.0 - p.c12 - p.c11 * lam1, -p.c11 * lam2, -p.c21 * lam1, 1.0 - p.c22 - p.c21 * lam2;
    Eigen::Vector2d rhs(p.c10 + p.c11 * A, p.c20 + p.c21 * A);
    Eigen::Vector2d bar = M.fullPivLu().solve(rhs);
    if (!(bar[0] > 0.0 && bar[1] > 0.0) || !M.fullPivLu().isInvertible())
        throw ConfigError("simulate_mn_garch: component GARCH recursions are not stationary");

    MnGarchTruth out;
    out.params = p;
    out.y.resize(static_cast<std::size_t>(T));
    out.eps.resize(static_cast<std::size_t>(T));
    out.mu_t.resize(static_cast<std::size_t>(T));
    out.h_t.resize(static_cast<std::size_t>(T));
    out.s_t.resize(static_cast<std::size_t>(T));
    out.k_t.resize(static_cast<std::size_t>(T));
    out.sigma1_sq.resize(static_cast<std::size_t>(T));
    out.sigma2_sq.resize(static_cast<std::size_t>(T));

    auto eng = rng::engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    double s1 = bar[0], s2 = bar[1];
    double eps_prev = 0.0;
    double y_prev = p.a0 / (1.0 - p.a1);
    auto step = [&](bool record, int t) {
        s1 = p.c10 + p.c11 * eps_prev * eps_prev + p.c12 * s1;
        s2 = p.c20 + p.c21 * eps_prev * eps_prev + p.c22 * s2;
        double mu = p.a0 + p.a1 * y_prev + p.b1 * eps_prev;
        bool first = unif(eng) < lam1;
        double z = normal(eng);
        double eps = first ? tau1 + std::sqrt(s1) * z : tau2 + std::sqrt(s2) * z;
        double yt = mu + eps;
        if (record) {
            auto ti = static_cast<std::size_t>(t);
            MixtureMoments mm = mn_moments(lam1, tau1, s1, lam2, tau2, s2);
            out.y[ti] = yt;
            out.eps[ti] = eps;
            out.mu_t[ti] = mu;
            out.h_t[ti] = mm.h;
            out.s_t[ti] = mm.s;
            out.k_t[ti] = mm.k;
            out.sigma1_sq[ti] = s1;
            out.sigma2_sq[ti] = s2;
        }
        eps_prev = eps;
        y_prev = yt;
    };
    for (int t = 0; t < kBurnIn; ++t) step(false, 0);
    for (int t = 0; t < T; ++t) step(true, t);
    return out;
}

double ErrorCase::mean(double alpha) const {
    if (case_id != 3) return 0.0;
    // Tail-localized bias, decaying exponentially away from either tail.
    return alpha < 0.5 ? std::exp(-200.0 * alpha) : std::exp(-200.0 * (1.0 - alpha));
}

double ErrorCase::variance(double alpha) const {
    if (case_id == 1) return 0.0;
    return 0.5 * sigma2_base + std::abs(alpha - 0.5) * sigma2_base;
}

Eigen::MatrixXd inject_errors(const Eigen::MatrixXd& truth_quantiles,
                              const std::vector<double>& levels, const ErrorCase& error_case,
                              std::uint64_t seed) {
    if (error_case.case_id < 1 || error_case.case_id > 3)
        throw ConfigError("inject_errors: error case must be 1, 2, or 3");
    if (truth_quantiles.cols() != static_cast<Eigen::Index>(levels.size()))
        throw ConfigError("inject_errors: level count does not match quantile columns");

    Eigen::MatrixXd out = truth_quantiles;
    if (error_case.case_id == 1) return out;

    std::vector<double> sd(levels.size()), mu(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        sd[i] = std::sqrt(error_case.variance(levels[i]));
        mu[i] = error_case.mean(levels[i]);
    }
    auto eng = rng::engine(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index t = 0; t < out.rows(); ++t)
        for (Eigen::Index i = 0; i < out.cols(); ++i)
            out(t, i) += mu[static_cast<std::size_t>(i)] + sd[static_cast<std::size_t>(i)] * normal(eng);
    return out;
}

DeltaSeries delta_metrics(const pipeline::QcmSeries& qcm, std::span<const double> h_true,
                          std::span<const double> s_true, std::span<const double> k_true) {
    const std::size_t T = qcm.rows.size();
    if (h_true.size() != T || s_true.size() != T || k_true.size() != T)
        throw ConfigError("delta_metrics: series lengths differ");
    DeltaSeries d;
    d.dh.resize(T);
    d.ds.resize(T);
    d.dk.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        d.dh[t] = qcm.rows[t].h - h_true[t];
        d.ds[t] = qcm.rows[t].s - s_true[t];
        d.dk[t] = qcm.rows[t].k - k_true[t];
    }
    return d;
}

} // namespace qcm::sim
