#include "qcm/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qcm::io {

namespace {

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
    try {
        std::size_t pos = 0;
        out = std::stod(s, &pos);
        return pos == s.size() && std::isfinite(out);
    } catch (...) {
        return false;
    }
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ParseError("cannot open '" + path + "' for writing");
    return f;
}

} // namespace

InputMode input_mode_from_name(const std::string& name) {
    if (name == "prices") return InputMode::Prices;
    if (name == "returns") return InputMode::Returns;
    throw ConfigError("unknown input mode '" + name + "' (expected prices or returns)");
}

ReturnSeries load_returns(const std::string& path, InputMode mode) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open input file '" + path + "'");

    std::vector<std::string> dates;
    std::vector<double> values;
    std::string line;
    int row = 0;
    while (std::getline(f, line)) {
        ++row;
        std::string t = trim(line);
        if (t.empty()) continue;
        auto comma = t.find(',');
        if (comma == std::string::npos) {
            std::ostringstream msg;
            msg << path << ": row " << row << ": expected 'date,value'";
            throw ParseError(msg.str());
        }
        std::string date = trim(t.substr(0, comma));
        std::string val = trim(t.substr(comma + 1));
        double v = 0.0;
        if (!parse_double(val, v)) {
            if (row == 1) continue; // header line
            std::ostringstream msg;
            msg << path << ": row " << row << ": malformed value '" << val << "'";
            throw ParseError(msg.str());
        }
        if (!dates.empty() && !(date > dates.back())) {
            std::ostringstream msg;
            msg << path << ": row " << row << ": dates must be strictly increasing";
            throw ParseError(msg.str());
        }
        if (mode == InputMode::Prices && !(v > 0.0)) {
            std::ostringstream msg;
            msg << path << ": row " << row << ": nonpositive price " << v;
            throw ParseError(msg.str());
        }
        dates.push_back(std::move(date));
        values.push_back(v);
    }

    ReturnSeries out;
    if (mode == InputMode::Returns) {
        out.dates = std::move(dates);
        out.values = std::move(values);
        return out;
    }
    if (values.size() < 101) {
        std::ostringstream msg;
        msg << path << ": price mode needs at least 101 rows, got " << values.size();
        throw ParseError(msg.str());
    }
    out.dates.assign(dates.begin() + 1, dates.end());
    out.values.resize(values.size() - 1);
    for (std::size_t i = 1; i < values.size(); ++i)
        out.values[i - 1] = 100.0 * std::log(values[i] / values[i - 1]);
    return out;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

void write_qcm_csv(const std::string& path, const ReturnSeries& series,
                   const pipeline::QcmSeries& qcm) {
    auto f = open_out(path);
    f << "t,date,h,s,k,constraint_ok,n0\n";
    for (const auto& r : qcm.rows) {
        const auto idx = static_cast<std::size_t>(r.t - 1);
        f << r.t << ',' << (idx < series.dates.size() ? series.dates[idx] : "") << ','
          << format_number(r.h) << ',' << format_number(r.s) << ',' << format_number(r.k) << ','
          << (r.constraint_ok ? 1 : 0) << ',' << r.n0 << '\n';
    }
}

void write_dq_report_csv(const std::string& path, const std::vector<pipeline::PathReport>& report) {
    auto f = open_out(path);
    f << "family,alpha,estimated,loss,hit_freq,dq_stat,dq_pvalue,dq_degenerate,kept,psi,error\n";
    for (const auto& r : report) {
        f << caviar::family_name(r.family) << ',' << format_number(r.alpha) << ','
          << (r.estimated ? 1 : 0) << ',' << format_number(r.loss) << ','
          << format_number(r.hit_freq) << ',' << format_number(r.dq.statistic) << ','
          << format_number(r.dq.pvalue) << ',' << (r.dq.degenerate ? 1 : 0) << ','
          << (r.kept ? 1 : 0) << ',';
        for (int j = 0; j < r.psi.size(); ++j) {
            if (j) f << ';';
            f << format_number(r.psi[j]);
        }
        f << ',' << r.error << '\n';
    }
}

void write_delta_summary_csv(const std::string& path, const std::string& dgp, int case_id,
                             const std::vector<sim::DeltaSummaryRow>& rows) {
    auto f = open_out(path);
    f << "dgp,case,moment,t,n,min,q1,median,q3,max,outliers\n";
    for (const auto& r : rows) {
        f << dgp << ',' << case_id << ',' << r.moment << ',' << r.t << ',' << r.stats.n << ','
          << format_number(r.stats.min) << ',' << format_number(r.stats.q1) << ','
          << format_number(r.stats.median) << ',' << format_number(r.stats.q3) << ','
          << format_number(r.stats.max) << ',';
        for (std::size_t i = 0; i < r.stats.outliers.size(); ++i) {
            if (i) f << ';';
            f << format_number(r.stats.outliers[i]);
        }
        f << '\n';
    }
}

void write_curve_csv(const std::string& path, const nic::Curve& curve,
                     const std::vector<CurveColumn>& extra) {
    auto f = open_out(path);
    f << "x,g_hat,supported";
    for (const auto& col : extra) f << ',' << col.name;
    f << '\n';
    for (std::size_t i = 0; i < curve.grid.size(); ++i) {
        f << format_number(curve.grid[i]) << ','
          << (curve.supported[i] ? format_number(curve.value[i]) : "") << ','
          << (curve.supported[i] ? 1 : 0);
        for (const auto& col : extra) f << ',' << format_number(col.values[i]);
        f << '\n';
    }
}

void write_adjusted_r2_csv(const std::string& path, const std::vector<AdjustedR2Row>& rows) {
    auto f = open_out(path);
    f << "moment,form,theta,r2,adj_r2\n";
    for (const auto& r : rows)
        f << r.moment << ',' << r.form << ',' << format_number(r.theta) << ','
          << format_number(r.r2) << ',' << format_number(r.adj_r2) << '\n';
}

void write_diagnostics_csv(const std::string& path, const diag::Descriptive& returns_stats,
                           const std::vector<std::pair<std::string, diag::Descriptive>>& qcm_stats,
                           const std::vector<std::pair<std::string, diag::LjungBox>>& qcm_lb,
                           const diag::ValidityTests& validity) {
    auto f = open_out(path);
    f << "block,series,statistic,value\n";
    auto desc = [&](const std::string& block, const std::string& name, const diag::Descriptive& d) {
        f << block << ',' << name << ",n," << d.n << '\n';
        f << block << ',' << name << ",mean," << format_number(d.mean) << '\n';
        f << block << ',' << name << ",variance," << format_number(d.variance) << '\n';
        if (!d.degenerate) {
            f << block << ',' << name << ",skewness," << format_number(d.skewness) << '\n';
            f << block << ',' << name << ",kurtosis," << format_number(d.kurtosis) << '\n';
        }
        f << block << ',' << name << ",max," << format_number(d.max) << '\n';
        f << block << ',' << name << ",min," << format_number(d.min) << '\n';
    };
    desc("returns", "y", returns_stats);
    for (const auto& [name, d] : qcm_stats) desc("qcm", name, d);
    for (const auto& [name, lb] : qcm_lb)
        f << "qcm," << name << ",ljung_box_pvalue," << format_number(lb.pvalue) << '\n';
    f << "validity,e_h,pvalue," << format_number(validity.h.pvalue) << '\n';
    f << "validity,e_s,pvalue," << format_number(validity.s.pvalue) << '\n';
    f << "validity,e_k,pvalue," << format_number(validity.k.pvalue) << '\n';
}

} // namespace qcm::io
