#pragma once

// Command-line front end: simulate, roots, certify, reproduce-paper.
// run_cli takes argv without the program name so tests can drive it
// against string streams.

#include <volterra/certify.hpp>
#include <volterra/charfun.hpp>
#include <volterra/fixtures.hpp>
#include <volterra/kernel_io.hpp>
#include <volterra/simulate.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#ifndef VOLTERRA_FIXTURE_DIR
#define VOLTERRA_FIXTURE_DIR "fixtures"
#endif

namespace volterra::cli {

enum ExitCode : int { kOk = 0, kDeviation = 1, kParseError = 2, kNonConvergence = 3 };

struct RunConfig {
    std::string command;
    std::string kernel_path;
    std::size_t steps = 10000;
    std::size_t n = 0;
    std::size_t max_degree = 32;
    std::size_t grid_points = 4096;
    std::string output_path;
    std::string format = "csv";
    std::string fixture_dir = VOLTERRA_FIXTURE_DIR;
};

namespace detail {

// Data files carry no timestamps; run metadata goes to <out>.meta.json.
inline void write_sidecar(const std::string& out_path, const RunConfig& cfg) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm utc{};
    gmtime_r(&t, &utc);
    std::ostringstream stamp;
    stamp << std::put_time(&utc, "%Y-%m-%dT%H:%M:%SZ");
    nlohmann::json meta{{"command", cfg.command},
                        {"kernel", cfg.kernel_path},
                        {"steps", cfg.steps},
                        {"max_degree", cfg.max_degree},
                        {"grid_points", cfg.grid_points},
                        {"created", stamp.str()}};
    std::ofstream(out_path + ".meta.json") << meta.dump(2) << '\n';
}

inline bool write_text(const std::string& path, const std::string& text, std::ostream& err) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        err << "error: cannot write " << path << '\n';
        return false;
    }
    f << text;
    return static_cast<bool>(f);
}

inline nlohmann::json trajectory_json(const Trajectory& t) {
    nlohmann::json values = nlohmann::json::array();
    for (double v : t.values) values.push_back(v == 0.0 ? 0.0 : v);
    return {{"kernel_id", t.kernel_id},
            {"method", to_string(t.method)},
            {"termination", to_string(t.termination)},
            {"requested_steps", t.requested_steps},
            {"values", values}};
}

inline nlohmann::json root_set_json(const RootSet& rs) {
    nlohmann::json roots = nlohmann::json::array();
    for (const auto& z : rs.roots) roots.push_back({{"re", z.real()}, {"im", z.imag() == 0.0 ? 0.0 : z.imag()}});
    nlohmann::json disks = nlohmann::json::array();
    for (std::size_t i = 0; i < rs.inclusion_centers.size(); ++i)
        disks.push_back({{"re", rs.inclusion_centers[i].real()},
                         {"im", rs.inclusion_centers[i].imag()},
                         {"radius", rs.inclusion_radius[i]}});
    return {{"n", rs.degree},
            {"roots", roots},
            {"r_n", rs.r_n},
            {"r_n_lower", rs.r_lower()},
            {"r_n_upper", rs.r_upper()},
            {"residual_bound", rs.residual_bound},
            {"inclusion_disks", disks}};
}

inline int run_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto kernel = load_kernel(cfg.kernel_path);
    const auto traj = solve_fast(kernel, cfg.steps);
    std::ostringstream text;
    if (cfg.format == "json")
        text << trajectory_json(traj).dump(2) << '\n';
    else
        write_csv(text, traj);
    if (cfg.output_path.empty()) {
        out << text.str();
        return kOk;
    }
    return write_text(cfg.output_path, text.str(), err) ? kOk : kParseError;
}

inline int run_roots(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto kernel = load_kernel(cfg.kernel_path);
    const auto text = root_set_json(pn_roots(kernel, cfg.n)).dump(2) + "\n";
    if (cfg.output_path.empty()) {
        out << text;
        return kOk;
    }
    return write_text(cfg.output_path, text, err) ? kOk : kParseError;
}

inline int run_certify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    const auto kernel = load_kernel(cfg.kernel_path);
    CertifyOptions opt;
    opt.grid_points = cfg.grid_points;
    const auto report = certify(kernel, cfg.max_degree, cfg.steps, opt);
    out << verdict_line(report) << '\n';
    if (!cfg.output_path.empty()) {
        if (!write_text(cfg.output_path, to_json(report).dump(2) + "\n", err)) return kParseError;
        write_sidecar(cfg.output_path, cfg);
    }
    return kOk;
}

// ---------------------------------------------------------------------------
// reproduce-paper

struct TableRow {
    std::size_t n = 0;
    double r_n = 0.0;
    double tail = 0.0;   // L_n
    double bound = 0.0;  // (1 - r_n)^n, only meaningful for r_n < 1
};

struct PublishedRow {
    std::size_t n;
    double r_n;
    double tail;   // NaN where the table prints "-"
    double bound;
};

// the published table, with the printed rounding as tolerance
inline const std::vector<PublishedRow>& published_table() {
    static const std::vector<PublishedRow> rows{
        {1, 1.000, NAN, NAN},         {2, 1.067, NAN, NAN},         {3, 1.012, NAN, NAN},
        {4, 0.913, 0.24716, 0.00005}, {5, 0.781, 0.04963, 0.00050}, {6, 0.667, 0.00024, 0.00137},
    };
    return rows;
}

inline constexpr double kRadiusTolerance = 5e-4;
inline constexpr double kTailTolerance = 5e-6;

inline std::string cell(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

struct Expected {
    const char* name;
    const char* verdict;
    const char* criterion;
};

inline const std::vector<Expected>& expected_verdicts() {
    static const std::vector<Expected> e{
        {"renewal", "asymptotically_stable", "EFP"},
        {"growing_renewal_p2", "unstable", "empirical"},
        {"negative_geometric_p3", "asymptotically_stable", "empirical"},
        {"double_root_stable_plus", "asymptotically_stable", "RoucheStable"},
        {"double_root_stable_minus", "asymptotically_stable", "RoucheStable"},
        {"six_term_stable", "asymptotically_stable", "RoucheStable"},
        {"double_root_unstable", "unstable", "RealAxisRoot"},
        {"alternating_cubic", "stable", "MarginalStable"},
        {"half_geometric", "stable", "MarginalStable"},
    };
    return e;
}

inline KernelSpec fixture_kernel(const std::string& dir, const std::string& name) {
    const auto path = std::filesystem::path(dir) / (name + ".json");
    if (std::filesystem::exists(path)) return load_kernel(path.string());
    for (const auto& f : fixtures::all())
        if (f.name == name) return f.kernel;
    throw KernelParseError("<file>", "no fixture " + name);
}

inline int run_reproduce(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    int deviations = 0;
    auto deviation = [&](const std::string& what) {
        err << "deviation: " << what << '\n';
        ++deviations;
    };
    nlohmann::json full;

    // table for the six-term example
    const auto six = fixture_kernel(cfg.fixture_dir, "six_term_stable");
    out << "n, r_n, L_n, (1-r_n)^n\n";
    full["table"] = nlohmann::json::array();
    for (const auto& p : published_table()) {
        const auto rs = pn_roots(six, p.n);
        const auto tail = tail_abs_sum(six, p.n);
        TableRow row{p.n, rs.r_n, tail.mid(), std::pow(1.0 - rs.r_n, static_cast<double>(p.n))};
        const bool inside = row.r_n < 1.0 - 1e-9;
        out << row.n << ", " << cell(row.r_n, 3) << ", " << (inside ? cell(row.tail, 5) : "-") << ", "
            << (inside ? cell(row.bound, 5) : "-") << '\n';
        full["table"].push_back({{"n", row.n},
                                 {"r_n", row.r_n},
                                 {"r_n_upper", rs.r_upper()},
                                 {"L_n", volterra::detail::enclosure_json(tail)},
                                 {"bound", inside ? nlohmann::json(row.bound) : nlohmann::json(nullptr)}});
        if (std::fabs(row.r_n - p.r_n) > kRadiusTolerance) deviation("r_" + std::to_string(p.n));
        if (std::isnan(p.tail)) {
            if (inside) deviation("r_" + std::to_string(p.n) + " expected >= 1");
            continue;
        }
        if (std::fabs(row.tail - p.tail) > kTailTolerance) deviation("L_" + std::to_string(p.n));
        // the certificate decision, not the printed bound, is what the row shows
        const bool published_fires = p.tail < p.bound;
        if ((row.tail < row.bound) != published_fires) deviation("certificate decision at n = " + std::to_string(p.n));
    }
    const auto fires = [&](std::size_t n) { return test_rouche_stable(six, n).rigorous(); };
    if (!fires(6) || fires(5) || fires(4)) deviation("Rouche certificate does not fire exactly at n = 6");

    // verdicts, computed concurrently and printed in fixed order
    std::vector<std::future<Report>> jobs;
    for (const auto& e : expected_verdicts()) {
        auto kernel = fixture_kernel(cfg.fixture_dir, e.name);
        jobs.push_back(std::async(std::launch::async, [kernel, &cfg] {
            CertifyOptions opt;
            opt.grid_points = cfg.grid_points;
            return certify(kernel, cfg.max_degree, cfg.steps, opt);
        }));
    }
    out << '\n';
    full["verdicts"] = nlohmann::json::object();
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& e = expected_verdicts()[i];
        const auto report = jobs[i].get();
        const bool ok = report.final.verdict == e.verdict && report.final.criterion == e.criterion;
        out << e.name << ": " << verdict_line(report) << (ok ? "" : "  [expected " + std::string(e.verdict) + " via " +
                                                                      e.criterion + "]")
            << '\n';
        full["verdicts"][e.name] = to_json(report);
        if (!ok) deviation(std::string("verdict for ") + e.name);
    }
    if (!cfg.output_path.empty()) {
        if (!write_text(cfg.output_path, full.dump(2) + "\n", err)) return kParseError;
        write_sidecar(cfg.output_path, cfg);
    }
    out << (deviations == 0 ? "reproduction matches" : std::to_string(deviations) + " deviation(s)") << '\n';
    return deviations == 0 ? kOk : kDeviation;
}

}  // namespace detail

/// argv without the program name. Returns the process exit code.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"Stability analysis for Volterra difference equations"};
    app.require_subcommand(1);
    auto* sim = app.add_subcommand("simulate", "write the trajectory x_0..x_steps");
    auto* roots = app.add_subcommand("roots", "roots of the partial-sum polynomial p_n as JSON");
    auto* cert = app.add_subcommand("certify", "run the stability certificates");
    auto* repro = app.add_subcommand("reproduce-paper", "rerun the built-in examples and compare");

    for (auto* sc : {sim, roots, cert}) sc->add_option("--kernel", cfg.kernel_path, "kernel JSON file")->required();
    for (auto* sc : {sim, cert, repro})
        sc->add_option("--steps", cfg.steps, "trajectory length")->check(CLI::Range(std::size_t{1}, std::size_t{1} << 30));
    roots->add_option("--n", cfg.n, "polynomial degree")->required()->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
    for (auto* sc : {cert, repro}) {
        sc->add_option("--max-degree", cfg.max_degree, "largest n tried")->check(CLI::Range(std::size_t{1}, std::size_t{4096}));
        sc->add_option("--grid-points", cfg.grid_points, "circle and real-axis grid")
            ->check(CLI::Range(std::size_t{16}, std::size_t{1} << 24));
    }
    for (auto* sc : {sim, roots, cert, repro}) sc->add_option("--out", cfg.output_path, "output file");
    sim->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    repro->add_option("--fixtures", cfg.fixture_dir, "directory of fixture kernels");

    std::vector<const char*> argv{"volterra_cli"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.command == "certify" && cfg.steps < kMinClassifiable) {
        err << "error: --steps must be at least " << kMinClassifiable << " for certify\n";
        return kParseError;
    }
    if (cfg.command == "reproduce-paper" && cfg.steps < kMinClassifiable) {
        err << "error: --steps must be at least " << kMinClassifiable << '\n';
        return kParseError;
    }

    try {
        if (cfg.command == "simulate") return detail::run_simulate(cfg, out, err);
        if (cfg.command == "roots") return detail::run_roots(cfg, out, err);
        if (cfg.command == "certify") return detail::run_certify(cfg, out, err);
        return detail::run_reproduce(cfg, out, err);
    } catch (const KernelParseError& e) {
        err << "error: invalid kernel field '" << e.field() << "': " << e.what() << '\n';
        return kParseError;
    } catch (const NonConvergence& e) {
        err << "error: " << e.what() << '\n';
        return kNonConvergence;
    }
}

}  // namespace volterra::cli
