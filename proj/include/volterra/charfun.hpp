#pragma once

// Characteristic objects of the recursion: partial sums
//     s_n(z) = 1 - sum_{k<=n} a_k z^k,
// the reversed polynomials p_n(z) = z^n - a_1 z^{n-1} - ... - a_n with
// s_n(z) = z^n p_n(1/z), their roots and maximal modulus r_n, the profile
// delta_n(rho) = |prod (1 - rho |z_i|)| on [1/r_n, 1] and its closed-form
// lower bounds E1, E2, E3.

#include <volterra/kernel.hpp>
#include <volterra/polynomial.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace volterra {

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

using cplx = std::complex<double>;

/// Descending coefficients of p_n: [1, -a_1, ..., -a_n].
inline std::vector<double> pn_coefficients(const KernelSpec& kernel, std::size_t n) {
    std::vector<double> c(n + 1);
    c[0] = 1.0;
    for (std::size_t k = 1; k <= n; ++k) c[k] = -kernel.term(k);
    return c;
}

inline cplx partial_sum_eval(const KernelSpec& kernel, std::size_t n, cplx z) {
    if (n < 1) throw std::invalid_argument("partial_sum_eval: n must be >= 1");
    std::complex<long double> acc = 0.0L;
    const std::complex<long double> zz(z);
    for (std::size_t k = n; k >= 1; --k) acc = acc * zz - static_cast<long double>(kernel.term(k));
    return cplx(acc * zz + 1.0L);
}

/// Group of roots whose inclusion disks overlap; holds exactly `count` true
/// zeros with moduli in [modulus_lo, modulus_hi].
struct RootCluster {
    double modulus_lo = 0.0;
    double modulus_hi = 0.0;
    std::size_t count = 0;
};

struct RootSet {
    std::size_t degree = 0;
    std::vector<cplx> roots;
    std::vector<std::complex<long double>> roots_extended;  // same roots before rounding to double
    double residual_bound = 0.0;          // max normalized |p_n(root)|
    double r_n = 0.0;                     // max |root| as computed
    // every zero lies in some disk D(inclusion_centers[i], inclusion_radius[i])
    std::vector<cplx> inclusion_centers;
    std::vector<double> inclusion_radius;
    std::vector<RootCluster> clusters;

    std::vector<double> moduli() const {
        std::vector<double> m(roots.size());
        std::transform(roots.begin(), roots.end(), m.begin(), [](cplx z) { return std::abs(z); });
        return m;
    }
    /// Certified upper bound on the largest true root modulus.
    double r_upper() const {
        double r = 0.0;
        for (const auto& c : clusters) r = std::max(r, c.modulus_hi);
        return r;
    }
    /// Certified lower bound on the largest true root modulus.
    double r_lower() const {
        double r = 0.0;
        for (const auto& c : clusters) r = std::max(r, c.modulus_lo);
        return r;
    }
};

namespace detail {

inline std::vector<RootCluster> build_clusters(const std::vector<cplx>& z, const std::vector<double>& rad) {
    const std::size_t n = z.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(z[i] - z[j]) <= rad[i] + rad[j]) parent[find(i)] = find(j);
    std::vector<RootCluster> by_root(n);
    std::vector<bool> used(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t r = find(i);
        auto& c = by_root[r];
        const double lo = std::max(0.0, next_down(std::abs(z[i]) - rad[i]));
        const double hi = next_up(std::abs(z[i]) + rad[i]);
        if (!used[r]) {
            c = {lo, hi, 0};
            used[r] = true;
        }
        c.modulus_lo = std::min(c.modulus_lo, lo);
        c.modulus_hi = std::max(c.modulus_hi, hi);
        ++c.count;
    }
    std::vector<RootCluster> out;
    for (std::size_t i = 0; i < n; ++i)
        if (used[i]) out.push_back(by_root[i]);
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.modulus_hi > b.modulus_hi; });
    return out;
}

}  // namespace detail

/// All n roots of p_n. Throws NonConvergence when the residual bound 1e-8
/// is not reached.
inline RootSet pn_roots(const KernelSpec& kernel, std::size_t n) {
    if (n < 1) throw std::invalid_argument("pn_roots: n must be >= 1");
    const auto coeffs = pn_coefficients(kernel, n);
    const auto result = poly::roots(coeffs);
    RootSet rs;
    rs.degree = n;
    rs.roots = result.roots;
    rs.roots_extended = result.extended;
    rs.residual_bound = result.backward_error;
    for (const auto& z : rs.roots) rs.r_n = std::max(rs.r_n, std::abs(z));
    // Inclusion disks may be centred on either approximation set; the
    // unmerged one is pairwise distinct more often and then gives the
    // sharper Weierstrass radii around multiple roots.
    auto radii = poly::inclusion_radii(coeffs, rs.roots);
    auto alt = poly::inclusion_radii(coeffs, result.unmerged);
    auto widest = [](const std::vector<double>& r) { return r.empty() ? 0.0 : *std::max_element(r.begin(), r.end()); };
    if (widest(alt) < widest(radii)) {
        rs.inclusion_centers = result.unmerged;
        rs.inclusion_radius = std::move(alt);
    } else {
        rs.inclusion_centers = rs.roots;
        rs.inclusion_radius = std::move(radii);
    }
    rs.clusters = detail::build_clusters(rs.inclusion_centers, rs.inclusion_radius);
    return rs;
}

/// RootSet for explicitly given roots (exact by assumption: zero radii).
inline RootSet root_set_from(std::vector<cplx> roots) {
    RootSet rs;
    rs.degree = roots.size();
    rs.roots = std::move(roots);
    rs.roots_extended.assign(rs.roots.begin(), rs.roots.end());
    for (const auto& z : rs.roots) rs.r_n = std::max(rs.r_n, std::abs(z));
    rs.inclusion_centers = rs.roots;
    rs.inclusion_radius.assign(rs.roots.size(), 0.0);
    rs.clusters = detail::build_clusters(rs.roots, rs.inclusion_radius);
    return rs;
}

// ---------------------------------------------------------------------------
// delta profile

inline double delta_value(const std::vector<double>& moduli, double rho) {
    long double p = 1.0L;
    for (double m : moduli) p *= std::fabs(1.0L - static_cast<long double>(rho) * m);
    return static_cast<double>(p);
}

/// Rigorous lower bound of delta_n(rho) over all root configurations
/// compatible with the clusters' modulus intervals.
inline double delta_lower_bound(const RootSet& rs, double rho) {
    Interval prod{1.0};
    for (const auto& c : rs.clusters) {
        // min over m in [lo, hi] of |1 - rho m|
        const Interval a = Interval{1.0} - Interval{rho} * Interval{c.modulus_lo};
        const Interval b = Interval{1.0} - Interval{rho} * Interval{c.modulus_hi};
        double factor = 0.0;
        if (a.lo > 0.0 && b.lo > 0.0)
            factor = b.lo;  // both ends below 1/rho
        else if (a.hi < 0.0 && b.hi < 0.0)
            factor = -a.hi;  // both ends above 1/rho
        prod = prod * pow(Interval{factor}, static_cast<std::uint64_t>(c.count));
    }
    return std::max(0.0, prod.lo);
}

struct DeltaMax {
    double rho0 = 1.0;
    double value = 0.0;
    std::vector<double> profile_kinks;
};

/// Global maximum of delta_n on [1/r_n, 1]. log delta_n is concave between
/// consecutive kinks 1/|z_i|, so golden-section search on every piece finds
/// each piece's maximum.
inline DeltaMax maximize_delta(const RootSet& roots) {
    if (!(roots.r_n > 1.0)) throw DomainError("maximize_delta: requires r_n > 1");
    const auto moduli = roots.moduli();
    const double lo = 1.0 / roots.r_n;
    const double hi = 1.0;
    DeltaMax out;
    std::vector<double> cuts{lo};
    for (double m : moduli) {
        if (m <= 0.0) continue;
        const double k = 1.0 / m;
        if (k > lo && k < hi) out.profile_kinks.push_back(k);
    }
    std::sort(out.profile_kinks.begin(), out.profile_kinks.end());
    out.profile_kinks.erase(std::unique(out.profile_kinks.begin(), out.profile_kinks.end()), out.profile_kinks.end());
    cuts.insert(cuts.end(), out.profile_kinks.begin(), out.profile_kinks.end());
    cuts.push_back(hi);

    auto consider = [&](double rho) {
        const double v = delta_value(moduli, rho);
        if (v > out.value || (v == out.value && rho > out.rho0)) {
            out.value = v;
            out.rho0 = rho;
        }
    };
    out.value = -1.0;
    consider(hi);
    consider(lo);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        double a = cuts[p];
        double b = cuts[p + 1];
        if (!(b > a)) continue;
        double x1 = b - inv_phi * (b - a);
        double x2 = a + inv_phi * (b - a);
        double f1 = delta_value(moduli, x1);
        double f2 = delta_value(moduli, x2);
        while (b - a > 1e-12) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = delta_value(moduli, x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = delta_value(moduli, x1);
            }
        }
        consider(x1);
        consider(x2);
        consider(0.5 * (a + b));
    }
    out.value = std::max(out.value, 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// closed-form lower bounds for max delta

enum class EBoundKind { E1, E2, E3, NotApplicable };

inline const char* to_string(EBoundKind k) {
    switch (k) {
        case EBoundKind::E1: return "E1";
        case EBoundKind::E2: return "E2";
        case EBoundKind::E3: return "E3";
        case EBoundKind::NotApplicable: return "not_applicable";
    }
    return "not_applicable";
}

struct EBound {
    EBoundKind kind = EBoundKind::NotApplicable;
    double value = 0.0;
    double rho = 1.0;
};

/// Tolerance for treating a computed modulus as lying on the unit circle.
inline constexpr double kUnitModulusTolerance = 1e-9;

inline EBound e_bounds(const RootSet& roots) {
    if (!(roots.r_n > 1.0)) throw DomainError("e_bounds: requires r_n > 1");
    auto m = roots.moduli();
    std::sort(m.begin(), m.end(), std::greater<>());
    const std::size_t n = m.size();
    const double nd = static_cast<double>(n);
    // i0 = number of moduli strictly outside the unit circle
    std::size_t i0 = 0;
    while (i0 < n && m[i0] > 1.0 + kUnitModulusTolerance) ++i0;
    if (i0 == 0) return {};
    const double outer = m[i0 - 1];
    if (i0 == n) return {EBoundKind::E1, std::pow(std::fabs(1.0 - outer), nd), 1.0};
    const double inner = m[i0];
    if (std::fabs(inner - 1.0) <= kUnitModulusTolerance) {
        const double rho1 = 2.0 / (outer + 1.0);
        return {EBoundKind::E3, std::pow(std::fabs(1.0 - rho1 * outer), nd), rho1};
    }
    return {EBoundKind::E2, std::min(std::pow(std::fabs(1.0 - outer), nd), std::pow(std::fabs(1.0 - inner), nd)), 1.0};
}

// ---------------------------------------------------------------------------
// unit circle scan

struct CircleMinimum {
    double min_modulus = 0.0;
    cplx point;
    double theta = 0.0;
};

/// |s_n(e^{i theta})| on a uniform grid of `grid_points` angles.
inline std::vector<double> circle_profile(const KernelSpec& kernel, std::size_t n, std::size_t grid_points) {
    std::vector<double> out(grid_points);
    for (std::size_t j = 0; j < grid_points; ++j) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid_points);
        out[j] = std::abs(partial_sum_eval(kernel, n, std::polar(1.0, theta)));
    }
    return out;
}

inline CircleMinimum circle_min_modulus(const KernelSpec& kernel, std::size_t n, std::size_t grid_points) {
    if (grid_points < 16) throw std::invalid_argument("circle_min_modulus: grid_points must be >= 16");
    const auto profile = circle_profile(kernel, n, grid_points);
    const auto it = std::min_element(profile.begin(), profile.end());
    const auto j = static_cast<std::size_t>(it - profile.begin());
    const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(grid_points);
    return {*it, std::polar(1.0, theta), theta};
}

}  // namespace volterra
