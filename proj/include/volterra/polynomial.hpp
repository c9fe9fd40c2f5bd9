#pragma once

// All-roots solver for monic real polynomials (Aberth-Ehrlich iteration with
// Newton polishing and multiple-root cluster recovery), plus rigorous
// inclusion radii for the computed roots.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace volterra {

class NonConvergence : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace poly {

using cplx = std::complex<double>;
using cplx_ld = std::complex<long double>;

struct Evaluation {
    cplx_ld value;
    cplx_ld derivative;
    long double scale;  // sum |c_k| |z|^k, the rounding-error scale of value
};

/// Horner evaluation of p and p' for descending coefficients.
inline Evaluation evaluate(std::span<const double> desc, cplx_ld z) {
    cplx_ld p = 0.0L;
    cplx_ld dp = 0.0L;
    long double scale = 0.0L;
    const long double az = std::abs(z);
    for (double c : desc) {
        dp = dp * z + p;
        p = p * z + static_cast<long double>(c);
        scale = scale * az + std::fabs(static_cast<long double>(c));
    }
    return {p, dp, scale};
}

/// Normalized backward error |p(z)| / sum |c_k| |z|^k.
inline double backward_error(std::span<const double> desc, cplx z) {
    const auto e = evaluate(desc, cplx_ld(z));
    if (e.scale == 0.0L) return 0.0;
    return static_cast<double>(std::abs(e.value) / e.scale);
}

/// Coefficients (descending) of prod (z - r_i), expanded in extended precision.
template <class T>
std::vector<cplx_ld> expand(std::span<const std::complex<T>> roots) {
    std::vector<cplx_ld> c{1.0L};
    for (const auto& r : roots) {
        c.push_back(0.0L);
        for (std::size_t k = c.size() - 1; k > 0; --k) c[k] -= cplx_ld(r) * c[k - 1];
    }
    return c;
}

inline std::vector<cplx_ld> expand(const std::vector<cplx>& roots) { return expand(std::span<const cplx>(roots)); }
inline std::vector<cplx_ld> expand(const std::vector<cplx_ld>& roots) { return expand(std::span<const cplx_ld>(roots)); }

struct SolverOptions {
    int max_iterations = 2000;
    double acceptance = 1e-8;  // largest admissible backward error
};

namespace detail {

inline std::vector<cplx> aberth(std::span<const double> desc, const SolverOptions& opt) {
    const std::size_t n = desc.size() - 1;
    std::vector<cplx> z(n);
    if (n == 1) {
        z[0] = -desc[1];
        return z;
    }
    // initial points on a circle through the geometric mean of the moduli,
    // enlarged to the Cauchy-type bound when the coefficients are unbalanced
    double radius = std::pow(std::fabs(desc[n]), 1.0 / static_cast<double>(n));
    double cauchy = 0.0;
    for (std::size_t k = 1; k <= n; ++k)
        cauchy = std::max(cauchy, std::pow(std::fabs(desc[k]), 1.0 / static_cast<double>(k)));
    radius = std::max(radius, 0.5 * cauchy);
    if (!(radius > 0.0) || !std::isfinite(radius)) radius = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4;
        z[k] = std::polar(radius, angle);
    }

    const long double tol = 4.0L * std::numeric_limits<long double>::epsilon() * static_cast<long double>(n + 1);
    std::vector<bool> done(n, false);
    for (int it = 0; it < opt.max_iterations; ++it) {
        bool all_done = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i]) continue;
            const auto e = evaluate(desc, cplx_ld(z[i]));
            if (std::abs(e.value) <= tol * e.scale) {
                done[i] = true;
                continue;
            }
            all_done = false;
            const cplx_ld ratio = e.value / e.derivative;
            cplx_ld sum = 0.0L;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) sum += 1.0L / (cplx_ld(z[i]) - cplx_ld(z[j]));
            cplx_ld step = ratio / (1.0L - ratio * sum);
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) step = ratio;
            if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) step = cplx_ld(1e-3L, 1e-3L);
            const cplx next = cplx(z[i]) - cplx(step);
            if (std::abs(cplx_ld(next) - cplx_ld(z[i])) <= 1e-17L * std::abs(cplx_ld(z[i]))) done[i] = true;
            z[i] = next;
        }
        if (all_done) break;
    }
    return z;
}

// Newton polishing in extended precision; keeps a step only if it reduces
// the residual.
inline std::vector<cplx_ld> polish(std::span<const double> desc, const std::vector<cplx>& z) {
    std::vector<cplx_ld> out;
    out.reserve(z.size());
    for (const auto& zi : z) {
        cplx_ld w(zi);
        auto e = evaluate(desc, w);
        for (int k = 0; k < 4; ++k) {
            if (e.derivative == cplx_ld(0.0L)) break;
            const cplx_ld cand = w - e.value / e.derivative;
            const auto ec = evaluate(desc, cand);
            if (!(std::abs(ec.value) < std::abs(e.value))) break;
            w = cand;
            e = ec;
        }
        out.push_back(w);
    }
    return out;
}

// Replaces clusters of nearby roots by their centroid when the centroid is
// a better approximation, which recovers multiple roots to full accuracy.
inline void merge_clusters(std::span<const double> desc, std::vector<cplx_ld>& z) {
    const std::size_t n = z.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(z[i] - z[j]) <= 1e-5L * std::max(1.0L, std::abs(z[i]))) parent[find(i)] = find(j);
    std::vector<std::vector<std::size_t>> groups(n);
    for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
    for (const auto& g : groups) {
        if (g.size() < 2) continue;
        cplx_ld centroid = 0.0L;
        long double worst = 0.0L;
        for (auto i : g) {
            centroid += z[i];
            worst = std::max(worst, std::abs(evaluate(desc, z[i]).value));
        }
        centroid /= static_cast<long double>(g.size());
        long double best = std::abs(evaluate(desc, centroid).value);
        // real coefficients: a near-real cluster is usually a real multiple root
        if (centroid.imag() != 0.0L && std::fabs(centroid.imag()) <= 1e-5L * std::abs(centroid)) {
            const cplx_ld real_point(centroid.real(), 0.0L);
            const long double r = std::abs(evaluate(desc, real_point).value);
            if (r <= best) {
                centroid = real_point;
                best = r;
            }
        }
        if (best <= worst)
            for (auto i : g) z[i] = centroid;
    }
}

}  // namespace detail

struct RootResult {
    std::vector<cplx> roots;          // `extended` rounded to double
    std::vector<cplx_ld> extended;
    std::vector<cplx> unmerged;  // polished approximations before cluster merging
    double backward_error = 0.0;  // max over roots
};

/// Roots of the monic polynomial with descending coefficients `desc`
/// (desc[0] must be 1). Throws NonConvergence if the backward error of any
/// root exceeds opt.acceptance.
inline RootResult roots(std::span<const double> desc, const SolverOptions& opt = {}) {
    if (desc.empty() || desc[0] != 1.0) throw std::invalid_argument("roots: polynomial must be monic");
    for (double c : desc)
        if (!std::isfinite(c)) throw NonConvergence("roots: non-finite coefficient");
    std::size_t degree = desc.size() - 1;
    RootResult out;
    // exact zero roots from vanishing trailing coefficients
    while (degree > 0 && desc[degree] == 0.0) {
        out.roots.push_back(0.0);
        --degree;
    }
    out.extended.assign(out.roots.size(), 0.0L);
    if (degree > 0) {
        const auto reduced = desc.first(degree + 1);
        auto w = detail::polish(reduced, detail::aberth(reduced, opt));
        out.unmerged = out.roots;
        for (const auto& x : w) out.unmerged.push_back(cplx(x));
        detail::merge_clusters(reduced, w);
        for (const auto& x : w) {
            out.extended.push_back(x);
            out.roots.push_back(cplx(x));
        }
    } else {
        out.unmerged = out.roots;
    }
    for (const auto& r : out.roots) {
        const double be = backward_error(desc, r);
        if (!std::isfinite(r.real()) || !std::isfinite(r.imag()) || !(be <= opt.acceptance))
            throw NonConvergence("roots: iteration did not reach the residual bound");
        out.backward_error = std::max(out.backward_error, be);
    }
    return out;
}

/// Radii rad_i such that every zero of p lies in some disk D(z_i, rad_i),
/// and each connected component of k overlapping disks holds exactly k zeros.
///
/// Two constructions are tried and the tighter one kept:
///  * Weierstrass corrections, rad_i = n |p(z_i) / prod_{j!=i} (z_i - z_j)|,
///    valid for pairwise distinct approximations;
///  * a uniform radius eta^{1/n}, where eta bounds |p - prod (z - z_i)| on
///    the Cauchy disk; it also covers coincident approximations.
inline std::vector<double> inclusion_radii(std::span<const double> desc, std::span<const cplx> z) {
    const std::size_t n = z.size();
    if (n == 0) return {};
    const long double eps = std::numeric_limits<long double>::epsilon();
    const long double nd = static_cast<long double>(n);

    // uniform radius from coefficient mismatch
    const auto expanded = expand(z);
    long double max_coeff = 0.0L;
    for (std::size_t k = 1; k <= n; ++k)
        max_coeff = std::max({max_coeff, std::fabs(static_cast<long double>(desc[k])), std::abs(expanded[k])});
    const long double bound_radius = 1.0L + max_coeff;
    long double eta = 0.0L;
    long double slack = 0.0L;
    long double power = 1.0L;
    for (std::size_t k = n + 1; k-- > 0;) {
        // coefficient of z^{n-k} sits at index k; iterate powers upward
        const long double diff = std::abs(expanded[k] - cplx_ld(static_cast<long double>(desc[k])));
        eta += diff * power;
        slack += (std::abs(expanded[k]) + std::fabs(static_cast<long double>(desc[k]))) * power;
        power *= bound_radius;
    }
    eta += 8.0L * nd * nd * eps * slack;
    const double uniform = static_cast<double>(std::pow(eta, 1.0L / nd) * (1.0L + 1e-12L));
    std::vector<double> uniform_radii(n, uniform);

    // Weierstrass radii
    bool distinct = true;
    std::vector<double> w_radii(n, 0.0);
    for (std::size_t i = 0; i < n && distinct; ++i) {
        const auto e = evaluate(desc, cplx_ld(z[i]));
        cplx_ld denom = 1.0L;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const cplx_ld d = cplx_ld(z[i]) - cplx_ld(z[j]);
            if (d == cplx_ld(0.0L)) {
                distinct = false;
                break;
            }
            denom *= d;
        }
        if (!distinct) break;
        const long double pv = std::abs(e.value) + 4.0L * nd * eps * e.scale;
        const long double r = nd * pv / std::abs(denom) * (1.0L + 1e-9L);
        if (!std::isfinite(static_cast<double>(r))) distinct = false;
        w_radii[i] = static_cast<double>(r) + std::numeric_limits<double>::denorm_min();
    }
    if (distinct && *std::max_element(w_radii.begin(), w_radii.end()) < uniform) return w_radii;
    return uniform_radii;
}

}  // namespace poly
}  // namespace volterra
