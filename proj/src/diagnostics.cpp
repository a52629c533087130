#include "qcm/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "qcm/math/special.hpp"
#include "qcm/math/stats.hpp"

namespace qcm::diag {

Descriptive descriptive_stats(std::span<const double> series) {
    const auto n = static_cast<int>(series.size());
    if (n < 4) throw ConfigError("descriptive_stats: need at least 4 observations");
    Descriptive d;
    d.n = n;
    d.mean = math::mean(series);
    d.max = *std::max_element(series.begin(), series.end());
    d.min = *std::min_element(series.begin(), series.end());
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : series) {
        double e = x - d.mean;
        m2 += e * e;
        m3 += e * e * e;
        m4 += e * e * e * e;
    }
    d.variance = m2 / (n - 1);
    m2 /= n;
    m3 /= n;
    m4 /= n;
    if (m2 <= 0.0) {
        d.degenerate = true;
        return d;
    }
    d.skewness = m3 / std::pow(m2, 1.5);
    d.kurtosis = m4 / (m2 * m2);
    return d;
}

LjungBox ljung_box(std::span<const double> series, int lags) {
    const auto n = static_cast<int>(series.size());
    if (lags < 1) throw ConfigError("ljung_box: lags must be positive");
    if (lags >= n / 4) throw ConfigError("ljung_box: lags must be below n/4");
    LjungBox out;
    double m = math::mean(series);
    double denom = 0.0;
    for (double x : series) denom += (x - m) * (x - m);
    if (denom == 0.0) {
        out.degenerate = true;
        out.pvalue = 1.0;
        return out;
    }
    std::vector<double> acf = math::autocorrelations(series, lags);
    double q = 0.0;
    for (int j = 1; j <= lags; ++j)
        q += acf[static_cast<std::size_t>(j - 1)] * acf[static_cast<std::size_t>(j - 1)] /
             static_cast<double>(n - j);
    out.statistic = static_cast<double>(n) * (n + 2.0) * q;
    out.pvalue = math::chi_squared_sf(out.statistic, lags);
    return out;
}

MomentResiduals moment_residuals(std::span<const double> y, std::span<const double> mu_hat,
                                 const pipeline::QcmSeries& qcm) {
    const std::size_t T = y.size();
    if (mu_hat.size() != T || qcm.rows.size() != T)
        throw ConfigError("moment_residuals: series lengths differ");
    MomentResiduals r;
    r.e_h.resize(T);
    r.e_s.resize(T);
    r.e_k.resize(T);
    for (std::size_t t = 0; t < T; ++t) {
        double h = qcm.rows[t].h;
        if (!(h > 0.0)) throw DomainError("moment_residuals: fitted variance must be positive");
        double e = y[t] - mu_hat[t];
        double z = e / std::sqrt(h);
        r.e_h[t] = e * e - h;
        r.e_s[t] = z * z * z - qcm.rows[t].s;
        r.e_k[t] = z * z * z * z - qcm.rows[t].k;
    }
    return r;
}

TTest mean_zero_ttest(std::span<const double> series, bool newey_west) {
    const auto n = static_cast<int>(series.size());
    if (n < 8) throw ConfigError("mean_zero_ttest: sample too short");
    TTest out;
    double m = math::mean(series);
    std::vector<double> c(series.size());
    for (std::size_t t = 0; t < series.size(); ++t) c[t] = series[t] - m;

    double gamma0 = 0.0;
    for (double x : c) gamma0 += x * x;
    gamma0 /= n;
    double lrv = gamma0;
    if (newey_west) {
        int L = static_cast<int>(std::floor(std::cbrt(static_cast<double>(n))));
        for (int j = 1; j <= L; ++j) {
            double gj = 0.0;
            for (int t = j; t < n; ++t) gj += c[static_cast<std::size_t>(t)] * c[static_cast<std::size_t>(t - j)];
            gj /= n;
            lrv += 2.0 * (1.0 - static_cast<double>(j) / (L + 1.0)) * gj;
        }
        lrv = std::max(lrv, 0.0);
    }
    if (lrv <= 0.0) {
        out.degenerate = true;
        out.pvalue = 1.0;
        return out;
    }
    out.statistic = m / std::sqrt(lrv / n);
    out.pvalue = 2.0 * (1.0 - math::student_t_cdf(std::abs(out.statistic), n - 1));
    return out;
}

ValidityTests validity_ttests(std::span<const double> y, std::span<const double> mu_hat,
                              const pipeline::QcmSeries& qcm, bool newey_west) {
    MomentResiduals r = moment_residuals(y, mu_hat, qcm);
    ValidityTests out;
    out.h = mean_zero_ttest(r.e_h, newey_west);
    out.s = mean_zero_ttest(r.e_s, newey_west);
    out.k = mean_zero_ttest(r.e_k, newey_west);
    return out;
}

} // namespace qcm::diag
