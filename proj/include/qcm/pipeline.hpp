#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "qcm/caviar.hpp"
#include "qcm/cf_core.hpp"
#include "qcm/dq_filter.hpp"

namespace qcm::pipeline {

enum class ConstraintPolicy { CheckOnly, Enforce };

std::vector<double> default_grid(); // 0.01, 0.02, ..., 0.99

struct Config {
    std::vector<double> grid = default_grid();
    std::vector<caviar::Family> families = {caviar::Family::SAV, caviar::Family::AS,
                                            caviar::Family::IG, caviar::Family::ADAP};
    double p_star = 0.1;
    ConstraintPolicy policy = ConstraintPolicy::CheckOnly;
    std::uint64_t seed = 0;
    int threads = 0; // 0 = all hardware threads
    double adap_smoothing = 10.0;
    caviar::EstimateOptions estimation; // per-(family,level) budget knobs

    void validate() const;
};

struct PathReport {
    caviar::Family family;
    double alpha = 0.0;
    math::ParamVec psi;
    double loss = 0.0;
    double hit_freq = 0.0;
    dq::DqResult dq;
    bool estimated = false; // false when the fit failed and was dropped
    bool kept = false;
    std::string error;
    double seconds = 0.0;
};

/// Stage-1 artifact: every surviving path evaluated at every timepoint,
/// plus the full per-path report. Column j of values is the j-th survivor.
struct FilteredPool {
    std::vector<double> levels;
    std::vector<int> sources; // family ids
    Eigen::MatrixXd values;   // T x n0
    std::vector<PathReport> report;
    double seconds_estimation = 0.0;
    double seconds_filter = 0.0;
};

struct QcmRecord {
    int t = 0; // 1-based timepoint
    double h = 0.0, s = 0.0, k = 0.0;
    bool constraint_ok = false;
    int n0 = 0;
    double beta0 = 0.0;
};

struct QcmSeries {
    std::vector<QcmRecord> rows;
};

struct RunResult {
    QcmSeries qcm;
    std::vector<PathReport> report;
    int n0 = 0;
    double seconds_estimation = 0.0;
    double seconds_filter = 0.0;
    double seconds_regression = 0.0;
};

/// Fits every (family, level) recursion, screens the paths with the DQ test
/// and groups the survivors. Failed estimations are treated like discarded
/// paths rather than aborting the run.
FilteredPool build_pool(std::span<const double> y, const Config& cfg);

/// Per-timepoint moment regressions over an existing pool.
QcmSeries qcm_from_pool(const FilteredPool& pool, const Config& cfg);

RunResult run(std::span<const double> y, const Config& cfg);

} // namespace qcm::pipeline
