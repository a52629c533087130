#pragma once

#include <Eigen/Dense>
#include <string>

#include "qcm/dgp_sim.hpp"
#include "qcm/math/stats.hpp"
#include "qcm/pipeline.hpp"

namespace qcm::sim {

enum class Dgp { GarchNormal, GarchT, ArmaMnGarch };

const char* dgp_name(Dgp dgp);
Dgp dgp_from_name(const std::string& name);

/// One Monte Carlo experiment: a data-generating process, an error case,
/// and the replication layout. Case 4 runs the full estimation pipeline on
/// every replication; its knobs come from pipeline_cfg.
struct CampaignConfig {
    Dgp dgp = Dgp::GarchNormal;
    int case_id = 1;
    int reps = 100;
    int T = 1000;
    std::uint64_t seed = 0;
    int threads = 0;
    pipeline::Config pipeline_cfg;
};

struct CampaignResult {
    // Per-replication, per-timepoint precision metrics (estimate - truth).
    Eigen::MatrixXd dh, ds, dk; // reps x T
    // Admissibility bookkeeping (filled for case 4).
    long constraint_checked = 0;
    long constraint_violations = 0;          // under the plain fits
    long constraint_violations_enforced = 0; // after constrained refits
    double seconds = 0.0;
};

CampaignResult run_campaign(const CampaignConfig& cfg);

struct DeltaSummaryRow {
    char moment; // 'h', 's', 'k'
    int t;       // 1-based
    math::BoxStats stats;
};

/// Per-timepoint boxplot summaries of the precision metrics.
std::vector<DeltaSummaryRow> summarize_deltas(const CampaignResult& result);

} // namespace qcm::sim
