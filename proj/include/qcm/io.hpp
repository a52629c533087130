#pragma once

#include <string>
#include <vector>

#include "qcm/campaign.hpp"
#include "qcm/diagnostics.hpp"
#include "qcm/errors.hpp"
#include "qcm/nic_lab.hpp"
#include "qcm/pipeline.hpp"

namespace qcm::io {

/// Dated return series; values are log-returns in percent.
struct ReturnSeries {
    std::vector<std::string> dates;
    std::vector<double> values;
};

enum class InputMode { Prices, Returns };

InputMode input_mode_from_name(const std::string& name);

/// Reads a (date, value) CSV. In price mode values must be strictly positive
/// and returns are 100 * ln(P_t / P_{t-1}), dated at the later observation.
ReturnSeries load_returns(const std::string& path, InputMode mode);

/// Fixed-format numeric serialization used by every CSV writer (10
/// significant digits, locale independent).
std::string format_number(double v);

void write_qcm_csv(const std::string& path, const ReturnSeries& series,
                   const pipeline::QcmSeries& qcm);

void write_dq_report_csv(const std::string& path, const std::vector<pipeline::PathReport>& report);

void write_delta_summary_csv(const std::string& path, const std::string& dgp, int case_id,
                             const std::vector<sim::DeltaSummaryRow>& rows);

struct CurveColumn {
    std::string name;
    std::vector<double> values;
};

void write_curve_csv(const std::string& path, const nic::Curve& curve,
                     const std::vector<CurveColumn>& extra);

struct AdjustedR2Row {
    std::string moment;
    std::string form;
    double theta = 0.0;
    double r2 = 0.0;
    double adj_r2 = 0.0;
};

void write_adjusted_r2_csv(const std::string& path, const std::vector<AdjustedR2Row>& rows);

/// Table-shaped diagnostic blocks: series descriptives, QCM descriptives
/// with autocorrelation p-values, and moment-validity test p-values.
void write_diagnostics_csv(const std::string& path, const diag::Descriptive& returns_stats,
                           const std::vector<std::pair<std::string, diag::Descriptive>>& qcm_stats,
                           const std::vector<std::pair<std::string, diag::LjungBox>>& qcm_lb,
                           const diag::ValidityTests& validity);

} // namespace qcm::io
