#include <CLI11.hpp>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "qcm/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct GridSpec {
    double start = 0.01, step = 0.01, end = 0.99;
    std::string text = "0.01:0.01:0.99";
};

GridSpec parse_grid(const std::string& text) {
    GridSpec g;
    g.text = text;
    auto c1 = text.find(':');
    auto c2 = text.rfind(':');
    if (c1 == std::string::npos || c2 == c1)
        throw qcm::ConfigError("grid must be start:step:end, got '" + text + "'");
    try {
        g.start = std::stod(text.substr(0, c1));
        g.step = std::stod(text.substr(c1 + 1, c2 - c1 - 1));
        g.end = std::stod(text.substr(c2 + 1));
    } catch (...) {
        throw qcm::ConfigError("grid must be numeric start:step:end, got '" + text + "'");
    }
    if (!(g.step > 0.0) || !(g.end >= g.start))
        throw qcm::ConfigError("grid must satisfy step > 0 and end >= start");
    return g;
}

std::vector<double> grid_levels(const GridSpec& g) {
    auto n = static_cast<int>(std::floor((g.end - g.start) / g.step + 1e-9));
    std::vector<double> out(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) out[static_cast<std::size_t>(i)] = g.start + g.step * i;
    return out;
}

std::vector<qcm::caviar::Family> parse_families(const std::string& text) {
    std::vector<qcm::caviar::Family> out;
    std::string token;
    std::istringstream ss(text);
    while (std::getline(ss, token, ','))
        if (!token.empty()) out.push_back(qcm::caviar::family_from_name(token));
    if (out.empty()) throw qcm::ConfigError("no CAViaR families given");
    return out;
}

int resolve_thread_flag(int flag) {
    if (flag > 0) return flag;
    if (const char* env = std::getenv("QCM_THREADS")) {
        int v = std::atoi(env);
        if (v > 0) return v;
    }
    return 0; // pipeline resolves 0 to all hardware threads
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw qcm::ConfigError("cannot create output directory '" + out + "'");
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct ComputeArgs {
    std::string input, mode = "prices", out = ".";
    std::string grid = "0.01:0.01:0.99";
    std::string families = "sav,as,ig,adap";
    std::string constraint = "check";
    double pstar = 0.1;
    std::uint64_t seed = 0;
    int threads = 0;
};

int run_compute(const ComputeArgs& args) {
    auto t0 = std::chrono::steady_clock::now();
    qcm::io::ReturnSeries series = qcm::io::load_returns(args.input, qcm::io::input_mode_from_name(args.mode));

    qcm::pipeline::Config cfg;
    GridSpec gspec = parse_grid(args.grid);
    cfg.grid = grid_levels(gspec);
    cfg.families = parse_families(args.families);
    cfg.p_star = args.pstar;
    if (args.constraint == "check")
        cfg.policy = qcm::pipeline::ConstraintPolicy::CheckOnly;
    else if (args.constraint == "enforce")
        cfg.policy = qcm::pipeline::ConstraintPolicy::Enforce;
    else
        throw qcm::ConfigError("constraint must be 'check' or 'enforce'");
    cfg.seed = args.seed;
    cfg.threads = resolve_thread_flag(args.threads);

    ensure_out_dir(args.out);
    qcm::pipeline::RunResult result = qcm::pipeline::run(series.values, cfg);

    qcm::io::write_qcm_csv((fs::path(args.out) / "qcm.csv").string(), series, result.qcm);
    qcm::io::write_dq_report_csv((fs::path(args.out) / "dq_report.csv").string(), result.report);

    json config_echo = {{"command", "compute"},
                        {"input", args.input},
                        {"mode", args.mode},
                        {"grid", gspec.text},
                        {"families", args.families},
                        {"pstar", args.pstar},
                        {"constraint", args.constraint},
                        {"seed", args.seed},
                        {"threads", args.threads}};
    json run_info = {{"config", config_echo},
                     {"n0", result.n0},
                     {"T", series.values.size()},
                     {"timings",
                      {{"estimation_s", result.seconds_estimation},
                       {"filter_s", result.seconds_filter},
                       {"regression_s", result.seconds_regression},
                       {"total_s", seconds_since(t0)}}}};
    std::ofstream jf(fs::path(args.out) / "run.json");
    jf << run_info.dump(2) << '\n';
    std::cout << "qcm compute: T=" << series.values.size() << " n0=" << result.n0 << " -> "
              << args.out << '\n';
    return 0;
}

struct SimulateArgs {
    std::string dgp = "garch-normal";
    int case_id = 1;
    int reps = 100;
    int length = 1000;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out = ".";
};

int run_simulate(const SimulateArgs& args) {
    qcm::sim::CampaignConfig cfg;
    cfg.dgp = qcm::sim::dgp_from_name(args.dgp);
    cfg.case_id = args.case_id;
    cfg.reps = args.reps;
    cfg.T = args.length;
    cfg.seed = args.seed;
    cfg.threads = resolve_thread_flag(args.threads);

    ensure_out_dir(args.out);
    qcm::sim::CampaignResult result = qcm::sim::run_campaign(cfg);
    auto rows = qcm::sim::summarize_deltas(result);
    qcm::io::write_delta_summary_csv((fs::path(args.out) / "delta_summary.csv").string(), args.dgp,
                                     args.case_id, rows);
    std::cout << "qcm simulate: " << args.dgp << " case " << args.case_id << ", " << args.reps
              << " reps of length " << args.length << " -> " << args.out << '\n';
    return 0;
}

struct NicArgs {
    std::string input, mode = "returns", qcm_path, out = ".";
    int tar_order = 1;
    bool tar_prune = false;
};

std::vector<std::array<double, 3>> load_qcm_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw qcm::ConfigError("cannot open qcm file '" + path + "'");
    std::vector<std::array<double, 3>> rows;
    std::string line;
    bool first = true;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (first) {
            first = false;
            continue; // header
        }
        std::istringstream ss(line);
        std::string field;
        std::array<double, 3> hsk{};
        for (int col = 0; std::getline(ss, field, ','); ++col) {
            if (col >= 2 && col <= 4) {
                try {
                    hsk[static_cast<std::size_t>(col - 2)] = std::stod(field);
                } catch (...) {
                    throw qcm::ParseError(path + ": malformed numeric field '" + field + "'");
                }
            }
        }
        rows.push_back(hsk);
    }
    if (rows.empty()) throw qcm::ParseError(path + ": no QCM rows");
    return rows;
}

int run_nic(const NicArgs& args) {
    qcm::io::ReturnSeries series = qcm::io::load_returns(args.input, qcm::io::input_mode_from_name(args.mode));
    auto qcm_rows = load_qcm_csv(args.qcm_path);
    const auto T = static_cast<int>(series.values.size());
    if (static_cast<int>(qcm_rows.size()) != T)
        throw qcm::ConfigError("qcm rows do not match the input series length");

    qcm::nic::TarFit tar = qcm::nic::fit_tar(series.values, args.tar_order, args.tar_prune);
    const int p = tar.start;
    const int n = T - p - 1; // aligned (response_t, response_{t-1}, driver_{t-1}) samples
    if (n < 100) throw qcm::ConfigError("series too short for the NIC study after TAR alignment");

    // Shocks and rescaled shocks; driver index i corresponds to t = p + i.
    std::vector<double> eps = tar.residuals;
    std::vector<double> rho(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        double h = qcm_rows[i + static_cast<std::size_t>(p)][0];
        if (!(h > 0.0)) throw qcm::DomainError("nonpositive fitted variance in qcm input");
        rho[i] = eps[i] / std::sqrt(h);
    }

    ensure_out_dir(args.out);
    json summary;
    summary["tar"] = {{"order", tar.order}, {"pruned", args.tar_prune}};
    std::vector<qcm::io::AdjustedR2Row> r2_rows;

    struct MomentJob {
        char tag;
        int column;
        const std::vector<double>* driver;
        std::vector<qcm::nic::NicForm> forms;
    };
    const std::vector<MomentJob> jobs = {
        {'h', 0, &eps, {qcm::nic::NicForm::VarianceQuadratic, qcm::nic::NicForm::VarianceLeverage}},
        {'s', 1, &rho, {qcm::nic::NicForm::SkewnessCubic}},
        {'k', 2, &rho, {qcm::nic::NicForm::KurtosisQuartic}},
    };
    for (const auto& job : jobs) {
        std::vector<double> resp(static_cast<std::size_t>(n)), lag(static_cast<std::size_t>(n)),
            drv(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            resp[static_cast<std::size_t>(i)] =
                qcm_rows[static_cast<std::size_t>(p + 1 + i)][static_cast<std::size_t>(job.column)];
            lag[static_cast<std::size_t>(i)] =
                qcm_rows[static_cast<std::size_t>(p + i)][static_cast<std::size_t>(job.column)];
            drv[static_cast<std::size_t>(i)] = (*job.driver)[static_cast<std::size_t>(i)];
        }
        qcm::nic::NicEstimate est = qcm::nic::robinson_fit(resp, lag, drv);
        std::vector<qcm::io::CurveColumn> overlays;
        for (auto form : job.forms) {
            qcm::nic::ParametricNicFit fit = qcm::nic::fit_parametric_nic(form, resp, lag, drv);
            qcm::io::CurveColumn col;
            col.name = std::string("param_") + qcm::nic::nic_form_name(form);
            col.values.resize(est.g_hat.grid.size());
            for (std::size_t i = 0; i < est.g_hat.grid.size(); ++i)
                col.values[i] = qcm::nic::evaluate_nic_form(form, fit.coef, est.g_hat.grid[i]);
            overlays.push_back(std::move(col));
            r2_rows.push_back({std::string(1, job.tag), qcm::nic::nic_form_name(form), fit.theta,
                               fit.r2, fit.adj_r2});
        }
        qcm::io::write_curve_csv(
            (fs::path(args.out) / (std::string("curves_") + job.tag + ".csv")).string(), est.g_hat,
            overlays);
        summary[std::string(1, job.tag)] = {{"theta_hat", est.theta_hat},
                                            {"bandwidths", {est.b1, est.b2, est.b3}}};
    }
    qcm::io::write_adjusted_r2_csv((fs::path(args.out) / "adjusted_r2.csv").string(), r2_rows);

    // Diagnostic tables over the TAR-aligned window.
    {
        std::vector<double> y_al(series.values.begin() + p, series.values.end());
        std::vector<double> mu = tar.mu_hat;
        qcm::pipeline::QcmSeries aligned;
        std::vector<double> h_col, s_col, k_col;
        for (int t = p; t < T; ++t) {
            qcm::pipeline::QcmRecord r;
            r.t = t - p + 1;
            r.h = qcm_rows[static_cast<std::size_t>(t)][0];
            r.s = qcm_rows[static_cast<std::size_t>(t)][1];
            r.k = qcm_rows[static_cast<std::size_t>(t)][2];
            aligned.rows.push_back(r);
            h_col.push_back(r.h);
            s_col.push_back(r.s);
            k_col.push_back(r.k);
        }
        auto validity = qcm::diag::validity_ttests(y_al, mu, aligned);
        std::vector<std::pair<std::string, qcm::diag::Descriptive>> qstats = {
            {"h", qcm::diag::descriptive_stats(h_col)},
            {"s", qcm::diag::descriptive_stats(s_col)},
            {"k", qcm::diag::descriptive_stats(k_col)}};
        std::vector<std::pair<std::string, qcm::diag::LjungBox>> qlb = {
            {"h", qcm::diag::ljung_box(h_col)},
            {"s", qcm::diag::ljung_box(s_col)},
            {"k", qcm::diag::ljung_box(k_col)}};
        qcm::io::write_diagnostics_csv((fs::path(args.out) / "diagnostics.csv").string(),
                                       qcm::diag::descriptive_stats(series.values), qstats, qlb,
                                       validity);
        summary["validity_pvalues"] = {
            {"h", validity.h.pvalue}, {"s", validity.s.pvalue}, {"k", validity.k.pvalue}};
    }
    std::ofstream jf(fs::path(args.out) / "nic.json");
    jf << summary.dump(2) << '\n';
    std::cout << "qcm nic: TAR(" << tar.order << ") -> " << args.out << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantiled conditional moments: compute, simulate, and NIC workflows"};
    app.require_subcommand(1);

    ComputeArgs cargs;
    auto* compute = app.add_subcommand("compute", "QCM series from a return or price CSV");
    compute->add_option("--input", cargs.input, "input CSV (date,value)")->required();
    compute->add_option("--mode", cargs.mode, "prices|returns")
        ->check(CLI::IsMember({"prices", "returns"}));
    compute->add_option("--pstar", cargs.pstar, "DQ screen threshold");
    compute->add_option("--grid", cargs.grid, "quantile grid start:step:end");
    compute->add_option("--families", cargs.families, "comma list: sav,as,ig,adap");
    compute->add_option("--constraint", cargs.constraint, "check|enforce")
        ->check(CLI::IsMember({"check", "enforce"}));
    compute->add_option("--seed", cargs.seed, "RNG seed");
    compute->add_option("--threads", cargs.threads, "worker threads (default: all, or QCM_THREADS)");
    compute->add_option("--out", cargs.out, "output directory");

    SimulateArgs sargs;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo precision campaign");
    simulate->add_option("--dgp", sargs.dgp, "garch-normal|garch-t|arma-mn-garch")
        ->check(CLI::IsMember({"garch-normal", "garch-t", "arma-mn-garch"}));
    simulate->add_option("--case", sargs.case_id, "error case 1..4")->check(CLI::Range(1, 4));
    simulate->add_option("--reps", sargs.reps, "replications");
    simulate->add_option("--length", sargs.length, "series length T");
    simulate->add_option("--seed", sargs.seed, "RNG seed");
    simulate->add_option("--threads", sargs.threads, "worker threads");
    simulate->add_option("--out", sargs.out, "output directory");

    NicArgs nargs;
    auto* nic = app.add_subcommand("nic", "news-impact-curve study from a computed QCM series");
    nic->add_option("--input", nargs.input, "input CSV (date,value)")->required();
    nic->add_option("--mode", nargs.mode, "prices|returns")
        ->check(CLI::IsMember({"prices", "returns"}));
    nic->add_option("--qcm", nargs.qcm_path, "qcm.csv produced by compute")->required();
    nic->add_option("--tar-order", nargs.tar_order, "TAR mean order p")->required();
    nic->add_flag("--tar-prune", nargs.tar_prune, "drop insignificant TAR parameters");
    nic->add_option("--out", nargs.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (compute->parsed()) return run_compute(cargs);
        if (simulate->parsed()) return run_simulate(sargs);
        if (nic->parsed()) return run_nic(nargs);
    } catch (const qcm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const qcm::ParseError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 1;
    } catch (const qcm::DomainError& e) {
        std::cerr << "domain error: " << e.what() << '\n';
        return 1;
    } catch (const qcm::Error& e) {
        std::cerr << "estimation error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
