#include "qcm/caviar.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include "qcm/math/stats.hpp"
#include "qcm/rng.hpp"

namespace qcm::caviar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

inline double rho(double u, double alpha) {
    return u >= 0.0 ? alpha * u : (alpha - 1.0) * u;
}

// Check loss of the recursion path, aborting with +inf as soon as the
// running sum reaches cutoff. The loss is a sum of nonnegative terms, so an
// aborted candidate can never belong among the kept best.
double path_loss(const CaviarSpec& spec, const math::ParamVec& psi, std::span<const double> y,
                 double q_init, double cutoff) {
    const auto T = static_cast<int>(y.size());
    const double alpha = spec.alpha;
    double loss = 0.0;
    switch (spec.family) {
        case Family::SAV: {
            const double p0 = psi[0], p1 = psi[1], p2 = psi[2];
            double q = q_init;
            loss = rho(y[0] - q, alpha);
            for (int t = 1; t < T; ++t) {
                q = p0 + p1 * q + p2 * std::abs(y[t - 1]);
                loss += rho(y[t] - q, alpha);
                if (loss >= cutoff) return kInf;
            }
            break;
        }
        case Family::AS: {
            const double p0 = psi[0], p1 = psi[1], p2 = psi[2], p3 = psi[3];
            double q = q_init;
            loss = rho(y[0] - q, alpha);
            for (int t = 1; t < T; ++t) {
                double prev = y[t - 1];
                q = p0 + p1 * q + p2 * std::max(prev, 0.0) + p3 * std::min(prev, 0.0);
                loss += rho(y[t] - q, alpha);
                if (loss >= cutoff) return kInf;
            }
            break;
        }
        case Family::IG: {
            const double p0 = psi[0], p1 = psi[1], p2 = psi[2];
            const double sign = alpha <= 0.5 ? -1.0 : 1.0;
            double q2 = q_init * q_init;
            loss = rho(y[0] - q_init, alpha);
            for (int t = 1; t < T; ++t) {
                double prev = y[t - 1];
                q2 = p0 + p1 * q2 + p2 * prev * prev;
                if (q2 < 0.0) return kInf;
                loss += rho(y[t] - sign * std::sqrt(q2), alpha);
                if (loss >= cutoff) return kInf;
            }
            break;
        }
        case Family::ADAP: {
            const double p0 = psi[0];
            const double N = spec.adap_smoothing;
            double q = q_init;
            loss = rho(y[0] - q, alpha);
            for (int t = 1; t < T; ++t) {
                q += p0 * (1.0 / (1.0 + std::exp(N * (y[t - 1] - q))) - alpha);
                loss += rho(y[t] - q, alpha);
                if (loss >= cutoff) return kInf;
            }
            break;
        }
    }
    return loss;
}

bool inside_box(const math::ParamVec& psi, const ParameterBox& box) {
    for (int j = 0; j < psi.size(); ++j)
        if (psi[j] < box.lo[j] || psi[j] > box.hi[j]) return false;
    return true;
}

math::ParamVec baseline_start(const CaviarSpec& spec, double flat_quantile, const ParameterBox& box) {
    math::ParamVec psi = math::ParamVec::Zero(param_count(spec.family));
    switch (spec.family) {
        case Family::SAV:
        case Family::AS:
            psi[0] = flat_quantile;
            break;
        case Family::IG:
            psi[0] = flat_quantile * flat_quantile;
            break;
        case Family::ADAP:
            break; // zero step size keeps the path at q_init
    }
    for (int j = 0; j < psi.size(); ++j) psi[j] = std::clamp(psi[j], box.lo[j], box.hi[j]);
    return psi;
}

} // namespace

int param_count(Family family) {
    switch (family) {
        case Family::SAV: return 3;
        case Family::AS: return 4;
        case Family::IG: return 3;
        case Family::ADAP: return 1;
    }
    throw ConfigError("param_count: unknown family");
}

const char* family_name(Family family) {
    switch (family) {
        case Family::SAV: return "sav";
        case Family::AS: return "as";
        case Family::IG: return "ig";
        case Family::ADAP: return "adap";
    }
    return "?";
}

Family family_from_name(const std::string& name) {
    std::string n;
    for (char c : name) n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (n == "sav") return Family::SAV;
    if (n == "as") return Family::AS;
    if (n == "ig") return Family::IG;
    if (n == "adap") return Family::ADAP;
    throw ConfigError("unknown CAViaR family '" + name + "' (expected sav, as, ig, adap)");
}

double check_loss(std::span<const double> residuals, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw DomainError("check_loss: alpha must lie strictly in (0,1)");
    double s = 0.0;
    for (double u : residuals) {
        if (!std::isfinite(u)) throw DomainError("check_loss: non-finite residual");
        s += rho(u, alpha);
    }
    return s;
}

ParameterBox parameter_box(const CaviarSpec& spec, std::span<const double> y) {
    std::vector<double> ay(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) ay[i] = std::abs(y[i]);
    double m = std::max(1.0, math::empirical_quantile(ay, 0.99));
    ParameterBox box;
    const int k = param_count(spec.family);
    box.lo = math::ParamVec(k);
    box.hi = math::ParamVec(k);
    switch (spec.family) {
        case Family::SAV:
            box.lo << -2.0 * m, -0.999, -2.0;
            box.hi << 2.0 * m, 0.999, 2.0;
            break;
        case Family::AS:
            box.lo << -2.0 * m, -0.999, -2.0, -2.0;
            box.hi << 2.0 * m, 0.999, 2.0, 2.0;
            break;
        case Family::IG:
            box.lo << 1e-12, 0.0, 0.0;
            box.hi << 4.0 * m * m, 0.999, 2.0;
            break;
        case Family::ADAP:
            box.lo << -m;
            box.hi << m;
            break;
    }
    return box;
}

std::vector<double> quantile_path(const CaviarSpec& spec, const math::ParamVec& psi,
                                  std::span<const double> y, double q_init) {
    if (psi.size() != param_count(spec.family))
        throw ConfigError("quantile_path: parameter vector length does not match the family");
    if (y.empty()) throw ConfigError("quantile_path: empty series");
    const auto T = static_cast<int>(y.size());
    std::vector<double> q(static_cast<std::size_t>(T));
    q[0] = q_init;
    switch (spec.family) {
        case Family::SAV:
            for (int t = 1; t < T; ++t)
                q[t] = psi[0] + psi[1] * q[t - 1] + psi[2] * std::abs(y[t - 1]);
            break;
        case Family::AS:
            for (int t = 1; t < T; ++t)
                q[t] = psi[0] + psi[1] * q[t - 1] + psi[2] * std::max(y[t - 1], 0.0) +
                       psi[3] * std::min(y[t - 1], 0.0);
            break;
        case Family::IG: {
            const double sign = spec.alpha <= 0.5 ? -1.0 : 1.0;
            double q2 = q_init * q_init;
            for (int t = 1; t < T; ++t) {
                q2 = psi[0] + psi[1] * q2 + psi[2] * y[t - 1] * y[t - 1];
                if (q2 < 0.0) {
                    std::ostringstream msg;
                    msg << "quantile_path: indirect-GARCH radicand turned negative at t = " << t + 1;
                    throw InvalidParameterError(msg.str());
                }
                q[t] = sign * std::sqrt(q2);
            }
            break;
        }
        case Family::ADAP:
            for (int t = 1; t < T; ++t)
                q[t] = q[t - 1] +
                       psi[0] * (1.0 / (1.0 + std::exp(spec.adap_smoothing * (y[t - 1] - q[t - 1]))) -
                                 spec.alpha);
            break;
    }
    return q;
}

double initial_quantile(std::span<const double> y, double alpha, int window_cap) {
    const auto T = static_cast<int>(y.size());
    int window = std::min(window_cap, static_cast<int>(std::ceil(T / 10.0)));
    window = std::max(1, std::min(window, T));
    return math::empirical_quantile(y.first(static_cast<std::size_t>(window)), alpha);
}

CaviarFit estimate(const CaviarSpec& spec, std::span<const double> y, const EstimateOptions& options) {
    const auto T = static_cast<int>(y.size());
    if (T < 100) throw ConfigError("caviar::estimate: need at least 100 observations");
    if (!(spec.alpha > 0.0 && spec.alpha < 1.0))
        throw ConfigError("caviar::estimate: alpha must lie strictly in (0,1)");
    if (spec.family == Family::ADAP && !(spec.adap_smoothing > 0.0))
        throw ConfigError("caviar::estimate: adaptive smoothing constant must be positive");

    const ParameterBox box = parameter_box(spec, y);
    const int dim = param_count(spec.family);
    const double q_init = initial_quantile(y, spec.alpha, options.init_window_cap);

    // Stage 1: uniform screen of the box, retaining the best n_polish starts.
    // The running k-th best loss serves as an early-abort cutoff.
    auto eng = rng::engine(options.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    using Cand = std::pair<double, math::ParamVec>;
    auto worse = [](const Cand& a, const Cand& b) { return a.first < b.first; };
    std::priority_queue<Cand, std::vector<Cand>, decltype(worse)> best(worse);
    math::ParamVec draw(dim);
    for (int i = 0; i < options.n_random_starts; ++i) {
        for (int j = 0; j < dim; ++j) draw[j] = box.lo[j] + (box.hi[j] - box.lo[j]) * unif(eng);
        double cutoff = best.size() == static_cast<std::size_t>(options.n_polish) ? best.top().first : kInf;
        double L = path_loss(spec, draw, y, q_init, cutoff);
        if (L < cutoff) {
            best.emplace(L, draw);
            if (best.size() > static_cast<std::size_t>(options.n_polish)) best.pop();
        }
    }

    std::vector<Cand> starts;
    while (!best.empty()) {
        starts.push_back(best.top());
        best.pop();
    }
    std::sort(starts.begin(), starts.end(), worse);
    std::reverse(starts.begin(), starts.end()); // ascending loss

    // The flat empirical-quantile equivalent keeps the final loss from ever
    // exceeding the do-nothing baseline.
    {
        double flat_q = math::empirical_quantile(y, spec.alpha);
        math::ParamVec base = baseline_start(spec, flat_q, box);
        starts.emplace_back(path_loss(spec, base, y, q_init, kInf), base);
    }

    auto objective = [&](const math::ParamVec& p) {
        if (!inside_box(p, box)) return kInf;
        return path_loss(spec, p, y, q_init, kInf);
    };

    math::NelderMeadOptions nm;
    nm.max_iter = options.nm_max_iter;
    nm.f_tol = options.nm_tol;
    math::ParamVec step(dim);
    for (int j = 0; j < dim; ++j) step[j] = 0.05 * (box.hi[j] - box.lo[j]);

    double best_loss = kInf;
    math::ParamVec best_psi;
    for (const auto& [L0, p0] : starts) {
        if (L0 < best_loss) {
            best_loss = L0;
            best_psi = p0;
        }
        if (!std::isfinite(L0)) continue;
        auto r = math::nelder_mead(objective, p0, step, nm);
        if (r.f < best_loss) {
            best_loss = r.f;
            best_psi = r.x;
        }
    }
    if (!std::isfinite(best_loss))
        throw EstimationError(std::string("caviar::estimate: no feasible start for family ") +
                              family_name(spec.family));

    CaviarFit fit;
    fit.spec = spec;
    fit.psi = best_psi;
    fit.q_init = q_init;
    fit.q_path = quantile_path(spec, best_psi, y, q_init);
    std::vector<double> resid(static_cast<std::size_t>(T));
    int hits = 0;
    for (int t = 0; t < T; ++t) {
        resid[static_cast<std::size_t>(t)] = y[t] - fit.q_path[static_cast<std::size_t>(t)];
        if (y[t] < fit.q_path[static_cast<std::size_t>(t)]) ++hits;
    }
    fit.loss = check_loss(resid, spec.alpha) / static_cast<double>(T);
    fit.hit_freq = static_cast<double>(hits) / static_cast<double>(T);
    return fit;
}

} // namespace qcm::caviar
