#include "qcm/math/stats.hpp"

#include <algorithm>
#include <cmath>

#include "qcm/errors.hpp"

namespace qcm::math {

double mean(std::span<const double> v) {
    if (v.empty()) throw DomainError("mean: empty sample");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    if (v.size() < 2) throw DomainError("sample_variance: need at least 2 observations");
    double m = mean(v);
    double s = 0.0;
    for (double x : v) {
        double d = x - m;
        s += d * d;
    }
    return s / static_cast<double>(v.size() - 1);
}

double empirical_quantile(std::span<const double> v, double alpha) {
    if (v.empty()) throw DomainError("empirical_quantile: empty sample");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("empirical_quantile: alpha must lie strictly in (0,1)");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    auto n = static_cast<double>(s.size());
    auto k = static_cast<std::size_t>(std::ceil(n * alpha));
    if (k < 1) k = 1;
    if (k > s.size()) k = s.size();
    return s[k - 1];
}

double quantile_type7(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw DomainError("quantile_type7: empty sample");
    if (sorted.size() == 1) return sorted[0];
    double h = p * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo >= sorted.size() - 1) return sorted[sorted.size() - 1];
    double w = h - static_cast<double>(lo);
    return sorted[lo] * (1.0 - w) + sorted[lo + 1] * w;
}

double median(std::span<const double> v) {
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    return quantile_type7(s, 0.5);
}

BoxStats boxplot_stats(std::span<const double> v) {
    if (v.empty()) throw DomainError("boxplot_stats: empty sample");
    std::vector<double> s(v.begin(), v.end());
    std::sort(s.begin(), s.end());
    BoxStats out;
    out.n = static_cast<int>(s.size());
    out.min = s.front();
    out.max = s.back();
    out.q1 = quantile_type7(s, 0.25);
    out.median = quantile_type7(s, 0.5);
    out.q3 = quantile_type7(s, 0.75);
    double iqr = out.q3 - out.q1;
    double lo = out.q1 - 1.5 * iqr;
    double hi = out.q3 + 1.5 * iqr;
    for (double x : s)
        if (x < lo || x > hi) out.outliers.push_back(x);
    return out;
}

std::vector<double> autocorrelations(std::span<const double> v, int max_lag) {
    auto n = static_cast<int>(v.size());
    if (max_lag < 1 || max_lag >= n)
        throw DomainError("autocorrelations: invalid lag count");
    double m = mean(v);
    double denom = 0.0;
    for (double x : v) {
        double d = x - m;
        denom += d * d;
    }
    std::vector<double> acf(static_cast<std::size_t>(max_lag));
    if (denom == 0.0) throw DomainError("autocorrelations: zero-variance series");
    for (int j = 1; j <= max_lag; ++j) {
        double s = 0.0;
        for (int t = j; t < n; ++t) s += (v[t] - m) * (v[t - j] - m);
        acf[static_cast<std::size_t>(j - 1)] = s / denom;
    }
    return acf;
}

} // namespace qcm::math
