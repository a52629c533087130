#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qcm/errors.hpp"
#include "qcm/math/nelder_mead.hpp"

namespace qcm::caviar {

enum class Family { SAV = 0, AS = 1, IG = 2, ADAP = 3 };

int param_count(Family family);
const char* family_name(Family family);
Family family_from_name(const std::string& name);

/// A conditional-quantile recursion: which family, at which level, and (for
/// the adaptive family) the logistic smoothing constant.
struct CaviarSpec {
    Family family = Family::SAV;
    double alpha = 0.05;
    double adap_smoothing = 10.0;
};

/// Knobs of the multi-start derivative-free estimation scheme. Defaults:
/// 10^4 uniform draws in the parameter box, the best 10 polished by
/// Nelder-Mead (500 iterations, spread tolerance 1e-8), plus one start at
/// the flat empirical-quantile equivalent so the fit can never lose to a
/// constant path.
struct EstimateOptions {
    int n_random_starts = 10000;
    int n_polish = 10;
    int nm_max_iter = 500;
    double nm_tol = 1e-8;
    std::uint64_t seed = 0;
    int init_window_cap = 300; // q_init window = min(cap, ceil(T/10))
};

struct CaviarFit {
    CaviarSpec spec;
    math::ParamVec psi;
    double loss = 0.0; // mean check loss of the fitted path
    double q_init = 0.0;
    std::vector<double> q_path;
    double hit_freq = 0.0; // #{y_t < Q_t}/T, coverage diagnostic
};

/// Parameter box of a family; draws outside it are rejected with +inf loss.
struct ParameterBox {
    math::ParamVec lo;
    math::ParamVec hi;
};

ParameterBox parameter_box(const CaviarSpec& spec, std::span<const double> y);

/// Sum of check-function values: rho_alpha(u) = u * (alpha - I(u < 0)).
double check_loss(std::span<const double> residuals, double alpha);

/// Runs the family recursion from q_init over y. The indirect-GARCH path is
/// returned on the negative root for alpha <= 0.5 and throws
/// InvalidParameterError if the radicand turns negative.
std::vector<double> quantile_path(const CaviarSpec& spec, const math::ParamVec& psi,
                                  std::span<const double> y, double q_init);

/// Recursion seed: lower empirical quantile of the first
/// min(cap, ceil(T/10)) observations.
double initial_quantile(std::span<const double> y, double alpha, int window_cap = 300);

CaviarFit estimate(const CaviarSpec& spec, std::span<const double> y,
                   const EstimateOptions& options = {});

} // namespace qcm::caviar
