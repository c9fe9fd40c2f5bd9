#pragma once

// Stability certificates for the recursion and the ordered pipeline that
// combines them, falling back to empirical classification of a simulated
// trajectory.

#include <volterra/charfun.hpp>
#include <volterra/kernel.hpp>
#include <volterra/simulate.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace volterra {

enum class Verdict { AsymptoticallyStable, Stable, Unstable, NotApplicable };
enum class Criterion { AbsoluteSum, EFP, RealAxisRoot, RoucheStable, RoucheUnstable, MarginalStable };
enum class Rigor { Rigorous, Heuristic };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::AsymptoticallyStable: return "asymptotically_stable";
        case Verdict::Stable: return "stable";
        case Verdict::Unstable: return "unstable";
        case Verdict::NotApplicable: return "not_applicable";
    }
    return "not_applicable";
}

inline const char* to_string(Criterion c) {
    switch (c) {
        case Criterion::AbsoluteSum: return "AbsoluteSum";
        case Criterion::EFP: return "EFP";
        case Criterion::RealAxisRoot: return "RealAxisRoot";
        case Criterion::RoucheStable: return "RoucheStable";
        case Criterion::RoucheUnstable: return "RoucheUnstable";
        case Criterion::MarginalStable: return "MarginalStable";
    }
    return "";
}

inline const char* to_string(Rigor r) { return r == Rigor::Rigorous ? "rigorous" : "heuristic"; }

struct Certificate {
    Verdict verdict = Verdict::NotApplicable;
    Criterion criterion = Criterion::AbsoluteSum;
    Rigor rigor = Rigor::Rigorous;
    nlohmann::json witness = nlohmann::json::object();

    bool applies() const { return verdict != Verdict::NotApplicable; }
    bool rigorous() const { return applies() && rigor == Rigor::Rigorous; }
};

inline nlohmann::json to_json(const Certificate& c) {
    return {{"criterion", to_string(c.criterion)},
            {"verdict", to_string(c.verdict)},
            {"rigor", to_string(c.rigor)},
            {"witness", c.witness}};
}

namespace detail {

inline nlohmann::json enclosure_json(const SumEnclosure& s) {
    nlohmann::json j{{"kind", to_string(s.kind)}};
    if (s.is_finite()) {
        j["lo"] = s.lo;
        j["hi"] = s.hi;
    }
    return j;
}

inline Certificate not_applicable(Criterion c, Rigor r, nlohmann::json witness) {
    return {Verdict::NotApplicable, c, r, std::move(witness)};
}

// (1 - r)^n rounded down, for 0 <= r < 1
inline double stability_margin(double r, std::size_t n) {
    return pow(Interval{1.0} - Interval{r}, static_cast<std::uint64_t>(n)).lo;
}

// Precision used when the real-axis scan evaluates a(t); only the sign of
// 1 - a(t) matters there.
inline constexpr double kScanPrecision = 1e-9;
// Approach points t = T (1 - 2^-k) toward the end of the scan interval.
inline constexpr int kApproachSteps = 14;

}  // namespace detail

/// Certified sum_n |a_n| < 1.
inline Certificate test_absolute_sum(const KernelSpec& kernel) {
    const auto s = tail_abs_sum(kernel, 0, 1e-12);
    nlohmann::json w{{"sum_abs", detail::enclosure_json(s)}};
    if (s.is_finite() && s.hi < 1.0) return {Verdict::AsymptoticallyStable, Criterion::AbsoluteSum, Rigor::Rigorous, w};
    return detail::not_applicable(Criterion::AbsoluteSum, Rigor::Rigorous, w);
}

/// Renewal conditions: a_n >= 0, gcd of the support 1, sum a_n = 1 and an
/// infinite first moment.
inline Certificate test_efp(const KernelSpec& kernel) {
    nlohmann::json w = nlohmann::json::object();
    bool nonneg = std::all_of(kernel.prefix().begin(), kernel.prefix().end(), [](double a) { return a >= 0.0; });
    if (const auto* p = kernel.parametric_tail()) nonneg = nonneg && p->c > 0.0 && p->q > 0.0;
    w["nonnegative"] = nonneg;
    if (!nonneg) return detail::not_applicable(Criterion::EFP, Rigor::Rigorous, w);

    const auto g = support_gcd(kernel);
    w["support_gcd"] = g ? nlohmann::json(*g) : nlohmann::json(nullptr);
    if (!g || *g != 1) return detail::not_applicable(Criterion::EFP, Rigor::Rigorous, w);

    const auto sum = series_sum(kernel, SeriesMode::Plain, 1e-9);
    w["sum"] = detail::enclosure_json(sum);
    if (!(sum.is_finite() && sum.width() <= 1e-9 && sum.contains(1.0)))
        return detail::not_applicable(Criterion::EFP, Rigor::Rigorous, w);

    const auto moment = series_sum(kernel, SeriesMode::FirstMoment, 1e-6);
    w["first_moment"] = detail::enclosure_json(moment);
    if (!moment.is_divergent()) return detail::not_applicable(Criterion::EFP, Rigor::Rigorous, w);
    return {Verdict::AsymptoticallyStable, Criterion::EFP, Rigor::Rigorous, w};
}

/// Certified sign change of b(t) = 1 - a(t) on the real axis inside the
/// unit disk and the convergence domain: b(0) = 1, so any t with b(t) < 0
/// proves a real characteristic root between 0 and t.
inline Certificate test_real_axis_root(const KernelSpec& kernel, std::size_t grid_points = 4096) {
    if (grid_points < 2) throw std::invalid_argument("test_real_axis_root: grid_points must be >= 2");
    const double T = std::min(1.0, radius_of_convergence(kernel));
    nlohmann::json w{{"scan_radius", T}, {"grid_points", grid_points}};

    // points of one side in increasing |t|: the grid, the approach points and
    // the endpoint (only used when the series converges there)
    std::vector<double> mags;
    for (std::size_t j = 1; j < grid_points; ++j)
        mags.push_back(T * static_cast<double>(j) / static_cast<double>(grid_points));
    for (int k = 1; k <= detail::kApproachSteps; ++k) mags.push_back(T * (1.0 - std::ldexp(1.0, -k)));
    mags.push_back(T);
    std::sort(mags.begin(), mags.end());
    mags.erase(std::unique(mags.begin(), mags.end()), mags.end());

    for (double sign : {1.0, -1.0}) {
        double last_positive = 0.0;  // b(0) = 1
        for (double m : mags) {
            const double t = sign * m;
            // a coarse enclosure usually decides the sign; refine only near 1
            auto a = power_series_at(kernel, t, 1e-3);
            if (a.is_finite() && a.lo <= 1.0 && a.hi >= 1.0) a = power_series_at(kernel, t, detail::kScanPrecision);
            if (!a.is_finite()) continue;
            if (a.hi < 1.0) {
                last_positive = t;
            } else if (a.lo > 1.0) {
                w["bracket"] = {std::min(last_positive, t), std::max(last_positive, t)};
                w["a_at_t"] = {{"t", t}, {"lo", a.lo}, {"hi", a.hi}};
                return {Verdict::Unstable, Criterion::RealAxisRoot, Rigor::Rigorous, w};
            }
        }
    }
    return detail::not_applicable(Criterion::RealAxisRoot, Rigor::Rigorous, w);
}

/// r_n < 1 and L_n < (1 - r_n)^n, with r_n replaced by its certified upper
/// bound from the root inclusion disks.
inline Certificate test_rouche_stable(const KernelSpec& kernel, std::size_t n) {
    if (n < 1) throw std::invalid_argument("test_rouche_stable: n must be >= 1");
    nlohmann::json w{{"n", n}};
    RootSet rs;
    try {
        rs = pn_roots(kernel, n);
    } catch (const NonConvergence& e) {
        w["error"] = e.what();
        return detail::not_applicable(Criterion::RoucheStable, Rigor::Rigorous, w);
    }
    const double r_hi = rs.r_upper();
    w["r_n"] = rs.r_n;
    w["r_n_upper"] = r_hi;
    if (!(r_hi < 1.0)) return detail::not_applicable(Criterion::RoucheStable, Rigor::Rigorous, w);
    const auto tail = tail_abs_sum(kernel, n);
    const double bound = detail::stability_margin(r_hi, n);
    w["tail"] = detail::enclosure_json(tail);
    w["bound"] = bound;
    if (tail.is_finite() && tail.hi < bound)
        return {Verdict::AsymptoticallyStable, Criterion::RoucheStable, Rigor::Rigorous, w};
    return detail::not_applicable(Criterion::RoucheStable, Rigor::Rigorous, w);
}

/// r_n > 1 and L_n < delta_n(rho): first with the closed-form E bound, then
/// with the maximized profile. The comparison uses the rigorous lower bound
/// of delta_n over the root inclusion clusters at the chosen rho.
inline Certificate test_rouche_unstable(const KernelSpec& kernel, std::size_t n) {
    if (n < 1) throw std::invalid_argument("test_rouche_unstable: n must be >= 1");
    nlohmann::json w{{"n", n}};
    RootSet rs;
    try {
        rs = pn_roots(kernel, n);
    } catch (const NonConvergence& e) {
        w["error"] = e.what();
        return detail::not_applicable(Criterion::RoucheUnstable, Rigor::Rigorous, w);
    }
    const double r_lo = rs.r_lower();
    w["r_n"] = rs.r_n;
    w["r_n_lower"] = r_lo;
    if (!(r_lo > 1.0) || !(rs.r_n > 1.0)) return detail::not_applicable(Criterion::RoucheUnstable, Rigor::Rigorous, w);
    const auto tail = tail_abs_sum(kernel, n);
    w["tail"] = detail::enclosure_json(tail);
    if (!tail.is_finite()) return detail::not_applicable(Criterion::RoucheUnstable, Rigor::Rigorous, w);

    // rho must exceed 1 / (true r_n); 1 / r_lo bounds that from above
    auto admissible = [&](double rho) { return rho <= 1.0 && rho * r_lo > 1.0; };

    const auto e = e_bounds(rs);
    if (e.kind != EBoundKind::NotApplicable) {
        const double certified = admissible(e.rho) ? delta_lower_bound(rs, e.rho) : 0.0;
        w["e_bound"] = {{"kind", to_string(e.kind)}, {"value", e.value}, {"rho", e.rho}, {"delta_lower", certified}};
        if (tail.hi < e.value && tail.hi < certified) {
            w["bound"] = to_string(e.kind);
            return {Verdict::Unstable, Criterion::RoucheUnstable, Rigor::Rigorous, w};
        }
    }
    const auto dm = maximize_delta(rs);
    const double certified = admissible(dm.rho0) ? delta_lower_bound(rs, dm.rho0) : 0.0;
    w["delta_max"] = {{"rho0", dm.rho0}, {"value", dm.value}, {"delta_lower", certified}};
    if (tail.hi < certified) {
        w["bound"] = "delta";
        return {Verdict::Unstable, Criterion::RoucheUnstable, Rigor::Rigorous, w};
    }
    return detail::not_applicable(Criterion::RoucheUnstable, Rigor::Rigorous, w);
}

/// Heuristic check for isolated simple zeros of 1 - a(z) on |z| = 1 with no
/// zeros inside the disk.
inline Certificate test_marginal_stable(const KernelSpec& kernel, std::size_t n, std::size_t grid_points = 4096) {
    if (n < 16) throw std::invalid_argument("test_marginal_stable: n must be >= 16");
    if (grid_points < 16) throw std::invalid_argument("test_marginal_stable: grid_points must be >= 16");
    nlohmann::json w{{"n", n}, {"grid_points", grid_points}};
    auto na = [&](const char* why) {
        w["reason"] = why;
        return detail::not_applicable(Criterion::MarginalStable, Rigor::Heuristic, w);
    };

    const auto moment = series_sum(kernel, SeriesMode::FirstMomentAbs, 1e-6);
    w["first_moment_abs"] = detail::enclosure_json(moment);
    if (!moment.is_finite()) return na("first absolute moment not certified finite");
    if (test_real_axis_root(kernel, grid_points).applies()) return na("certified real root inside the disk");

    RootSet rs;
    try {
        rs = pn_roots(kernel, n);
    } catch (const NonConvergence&) {
        return na("root finder did not converge");
    }
    w["r_n"] = rs.r_n;
    // zeros of s_n are 1 / z_i; none may sit inside radius 1 - 1e-6
    if (rs.r_n > 1.0 / (1.0 - 1e-6)) return na("truncated characteristic function has zeros inside the disk");

    const auto tail = tail_abs_sum(kernel, n);
    if (!tail.is_finite()) return na("tail not summable");
    const auto profile = circle_profile(kernel, n, grid_points);
    const double step = 2.0 * std::numbers::pi / static_cast<double>(grid_points);
    const std::size_t G = grid_points;
    auto at = [&](std::ptrdiff_t j) { return profile[static_cast<std::size_t>((j % static_cast<std::ptrdiff_t>(G) + static_cast<std::ptrdiff_t>(G)) % static_cast<std::ptrdiff_t>(G))]; };

    nlohmann::json zeros = nlohmann::json::array();
    for (std::size_t j = 0; j < G; ++j) {
        const auto jj = static_cast<std::ptrdiff_t>(j);
        const double f0 = at(jj);
        if (!(f0 <= at(jj - 1) && f0 < at(jj + 1))) continue;  // local minimum
        // |s_n'| on the circle gives the slope of |s_n(e^{i theta})| near a simple zero
        const double theta = step * static_cast<double>(j);
        const cplx z = std::polar(1.0, theta);
        std::complex<long double> d = 0.0L;
        for (std::size_t k = n; k >= 1; --k) d = d * std::complex<long double>(z) - static_cast<long double>(k) * kernel.term(k);
        const double slope = static_cast<double>(std::abs(d));
        // a zero of 1 - a within one grid step of theta leaves at most this much
        const double threshold = tail.hi + slope * step;
        if (f0 > threshold) continue;
        // order one: |s_n| grows linearly with the predicted slope on both sides
        const double right = (at(jj + 3) - at(jj + 1)) / (2.0 * step);
        const double left = (at(jj - 3) - at(jj - 1)) / (2.0 * step);
        const bool linear = slope > 0.0 && right > 0.5 * slope && right < 2.0 * slope && left > 0.5 * slope &&
                            left < 2.0 * slope;
        if (!linear) return na("near-zero on the circle is not of order one");
        zeros.push_back({{"theta", theta}, {"modulus", f0}, {"slope", slope}, {"threshold", threshold}});
    }
    if (zeros.empty()) return na("no near-zero of the characteristic function on the unit circle");
    w["tail"] = detail::enclosure_json(tail);
    w["circle_zeros"] = zeros;
    return {Verdict::Stable, Criterion::MarginalStable, Rigor::Heuristic, w};
}

// ---------------------------------------------------------------------------
// pipeline

struct CertifyOptions {
    std::size_t grid_points = 4096;
    Thresholds thresholds{};
};

struct FinalVerdict {
    std::string verdict;    // asymptotically_stable | stable | unstable | inconclusive
    std::string criterion;  // certificate name or "empirical"
    std::string rigor;      // rigorous | heuristic | empirical
    nlohmann::json witness = nlohmann::json::object();
};

struct EmpiricalEvidence {
    EmpiricalVerdict verdict;
    std::size_t steps = 0;
    std::size_t computed = 0;
    Termination termination = Termination::Complete;
    double max_abs = 0.0;
    double last = 0.0;
};

struct Report {
    std::string kernel_id;
    std::vector<Certificate> attempts;
    FinalVerdict final;
    std::optional<EmpiricalEvidence> empirical;
};

inline const char* empirical_verdict_string(EmpiricalKind k) {
    switch (k) {
        case EmpiricalKind::Decaying: return "asymptotically_stable";
        case EmpiricalKind::BoundedNonDecaying: return "stable";
        case EmpiricalKind::Unbounded: return "unstable";
        case EmpiricalKind::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

inline nlohmann::json to_json(const EmpiricalEvidence& e) {
    return {{"classification", to_string(e.verdict.kind)},
            {"index", e.verdict.index},
            {"value", e.verdict.value},
            {"reason", e.verdict.reason},
            {"steps", e.steps},
            {"computed", e.computed},
            {"termination", to_string(e.termination)},
            {"max_abs", e.max_abs},
            {"last", e.last}};
}

inline nlohmann::json to_json(const Report& r) {
    nlohmann::json j{{"kernel_id", r.kernel_id},
                     {"final",
                      {{"verdict", r.final.verdict},
                       {"criterion", r.final.criterion},
                       {"rigor", r.final.rigor},
                       {"witness", r.final.witness}}}};
    j["attempts"] = nlohmann::json::array();
    for (const auto& a : r.attempts) j["attempts"].push_back(to_json(a));
    if (r.empirical) j["empirical"] = to_json(*r.empirical);
    return j;
}

/// One-line summary, e.g. "asymptotically_stable (EFP, rigorous)".
inline std::string verdict_line(const Report& r) {
    return r.final.verdict + " (" + r.final.criterion + ", " + r.final.rigor + ")";
}

/// Runs the certificates in fixed order and stops at the first rigorous
/// one; otherwise simulates `steps` terms as empirical evidence.
inline Report certify(const KernelSpec& kernel, std::size_t max_degree = 32, std::size_t steps = 10000,
                      const CertifyOptions& opt = {}) {
    if (max_degree < 1) throw std::invalid_argument("certify: max_degree must be >= 1");
    if (steps < kMinClassifiable) throw std::invalid_argument("certify: steps must be >= 100");
    Report report;
    report.kernel_id = kernel_id(kernel);
    auto record = [&](Certificate c) {
        report.attempts.push_back(std::move(c));
        return report.attempts.back().rigorous();
    };
    auto finish_rigorous = [&]() {
        const auto& c = report.attempts.back();
        report.final = {to_string(c.verdict), to_string(c.criterion), to_string(c.rigor), c.witness};
        return report;
    };

    if (record(test_absolute_sum(kernel))) return finish_rigorous();
    if (record(test_efp(kernel))) return finish_rigorous();
    if (record(test_real_axis_root(kernel, opt.grid_points))) return finish_rigorous();
    for (std::size_t n = 1; n <= max_degree; ++n)
        if (record(test_rouche_stable(kernel, n))) return finish_rigorous();
    for (std::size_t n = 1; n <= max_degree; ++n)
        if (record(test_rouche_unstable(kernel, n))) return finish_rigorous();
    record(test_marginal_stable(kernel, std::max<std::size_t>(max_degree, 16), opt.grid_points));

    const auto traj = solve_fast(kernel, steps);
    EmpiricalEvidence ev;
    ev.verdict = classify(traj, opt.thresholds);
    ev.steps = steps;
    ev.computed = traj.values.empty() ? 0 : traj.values.size() - 1;
    ev.termination = traj.termination;
    for (double v : traj.values) ev.max_abs = std::max(ev.max_abs, std::fabs(v));
    ev.last = traj.values.empty() ? 0.0 : traj.values.back();
    report.empirical = ev;

    const auto heuristic =
        std::find_if(report.attempts.begin(), report.attempts.end(), [](const Certificate& c) { return c.applies(); });
    if (heuristic != report.attempts.end()) {
        if (heuristic->verdict != Verdict::Unstable && ev.verdict.kind == EmpiricalKind::Unbounded) {
            report.final = {"inconclusive", to_string(heuristic->criterion), to_string(heuristic->rigor),
                            {{"certificate", heuristic->witness},
                             {"conflict", "heuristic certificate contradicted by an unbounded trajectory"}}};
        } else {
            report.final = {to_string(heuristic->verdict), to_string(heuristic->criterion), to_string(heuristic->rigor),
                            heuristic->witness};
        }
        return report;
    }
    report.final = {empirical_verdict_string(ev.verdict.kind), "empirical", "empirical", to_json(ev)};
    return report;
}

}  // namespace volterra
