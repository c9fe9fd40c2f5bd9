#pragma once

// Trajectories of x_n = sum_{i<n} a_{n-i} x_i and their empirical
// classification (bounded / decaying / unbounded).
//
// When the tail ratio |q| exceeds one the kernel terms themselves overflow
// long before the trajectory does, so the recursion is run on the rescaled
// sequence y_n = x_n / lambda^n with kernel b_k = a_k / lambda^k and
// lambda = |q|. The rescaling is exact in exact arithmetic and keeps exact
// cancellations (e.g. a_n = -p^n) exact in floating point.

#include <volterra/fft.hpp>
#include <volterra/kernel.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace volterra {

enum class SolveMethod { Direct, FftBlocked };
enum class Termination { Complete, EarlyExit, Overflow };

inline const char* to_string(SolveMethod m) { return m == SolveMethod::Direct ? "direct" : "fft_blocked"; }
inline const char* to_string(Termination t) {
    switch (t) {
        case Termination::Complete: return "complete";
        case Termination::EarlyExit: return "early_exit";
        case Termination::Overflow: return "overflow";
    }
    return "complete";
}

struct Trajectory {
    std::vector<double> values;  // x_0 .. x_N
    std::string kernel_id;
    SolveMethod method = SolveMethod::Direct;
    Termination termination = Termination::Complete;
    std::size_t requested_steps = 0;

    std::size_t size() const { return values.size(); }
    bool truncated() const { return termination != Termination::Complete; }
};

struct Thresholds {
    double unbounded_cutoff = 1e12;
    double decay_level = 1e-8;
    double window_fraction = 0.01;
};

struct SolveOptions {
    /// Trajectories stop once |x_n| exceeds this level; ten times the
    /// default classification cutoff.
    double early_exit_level = 1e13;
    /// Indices above which the direct sum uses compensated accumulation.
    std::size_t compensated_from = 10000;
};

namespace detail {

inline double rescale_factor(const KernelSpec& k) {
    if (const auto* p = k.parametric_tail()) {
        const double aq = std::fabs(p->q);
        if (aq > 1.0) return aq;
    }
    return 1.0;
}

inline std::vector<double> rescaled_kernel(const KernelSpec& k, std::size_t steps, double lambda) {
    std::vector<double> b(steps + 1, 0.0);  // b[0] unused
    for (std::size_t n = 1; n <= steps; ++n) b[n] = k.scaled_term(n, lambda);
    return b;
}

// Converts y_n back to x_n = y_n lambda^n, applying the early-exit and
// overflow contract. Returns the number of valid entries.
inline Trajectory finish_trajectory(const KernelSpec& k, std::vector<double> y, double lambda, SolveMethod method,
                                    std::size_t steps, const SolveOptions& opt) {
    Trajectory t;
    t.kernel_id = kernel_id(k);
    t.method = method;
    t.requested_steps = steps;
    t.values.reserve(y.size());
    const double log_lambda = std::log(lambda);
    const double log_exit = std::log(opt.early_exit_level);
    for (std::size_t n = 0; n < y.size(); ++n) {
        const double yn = y[n];
        if (!std::isfinite(yn)) {
            t.termination = Termination::Overflow;
            break;
        }
        double xn = yn;
        if (lambda != 1.0 && yn != 0.0) {
            const double log_mag = std::log(std::fabs(yn)) + static_cast<double>(n) * log_lambda;
            if (log_mag > log_exit) {
                // keep the crossing value when it is representable
                const double big = std::exp(log_mag);
                if (!std::isfinite(big)) {
                    t.termination = Termination::Overflow;
                    break;
                }
                t.values.push_back(std::copysign(big, yn));
                t.termination = Termination::EarlyExit;
                break;
            }
            xn = yn * std::pow(lambda, static_cast<double>(n));
        }
        t.values.push_back(xn);
        if (std::fabs(xn) > opt.early_exit_level) {
            t.termination = Termination::EarlyExit;
            break;
        }
    }
    return t;
}

// Direct evaluation of y_n for n in [from, to) using kernel b, oldest index
// first. `acc` carries contributions already accumulated from indices below
// `lo_index`.
inline void direct_range(std::vector<double>& y, const std::vector<double>& b, std::size_t lo_index, std::size_t from,
                         std::size_t to, const std::vector<double>* acc, std::size_t compensated_from) {
    for (std::size_t n = std::max<std::size_t>(from, 1); n < to; ++n) {
        double s = acc ? (*acc)[n] : 0.0;
        if (n > compensated_from) {
            // Neumaier summation
            double comp = 0.0;
            for (std::size_t i = lo_index; i < n; ++i) {
                const double term = b[n - i] * y[i];
                const double t = s + term;
                if (std::fabs(s) >= std::fabs(term))
                    comp += (s - t) + term;
                else
                    comp += (term - t) + s;
                s = t;
            }
            s += comp;
        } else {
            for (std::size_t i = lo_index; i < n; ++i) s += b[n - i] * y[i];
        }
        y[n] = s;
        if (!std::isfinite(s)) {
            for (std::size_t m = n + 1; m < y.size(); ++m) y[m] = s;
            return;
        }
    }
}

inline bool exceeds(double v, double level) { return !std::isfinite(v) || std::fabs(v) > level; }

}  // namespace detail

/// Direct O(steps^2) evaluation of the recursion, x_0 = x0.
inline Trajectory solve(const KernelSpec& kernel, std::size_t steps, double x0 = 1.0, const SolveOptions& opt = {}) {
    if (steps < 1) throw std::invalid_argument("solve: steps must be >= 1");
    const double lambda = detail::rescale_factor(kernel);
    const auto b = detail::rescaled_kernel(kernel, steps, lambda);
    std::vector<double> y(steps + 1, 0.0);
    y[0] = x0;
    if (lambda == 1.0) {
        // evaluate incrementally so early exit saves the remaining work
        for (std::size_t n = 1; n <= steps; ++n) {
            detail::direct_range(y, b, 0, n, n + 1, nullptr, opt.compensated_from);
            if (detail::exceeds(y[n], opt.early_exit_level)) {
                y.resize(n + 1);
                break;
            }
        }
    } else {
        const double log_lambda = std::log(lambda);
        const double log_exit = std::log(opt.early_exit_level);
        // rescaled trajectories that survive the exit test are typically
        // eventually zero (a_n = -p^n gives 1, -1, 0, ...), so the sum runs
        // over the nonzero entries only
        std::vector<std::size_t> support{0};
        for (std::size_t n = 1; n <= steps; ++n) {
            double s = 0.0;
            double comp = 0.0;
            for (std::size_t i : support) {
                const double term = b[n - i] * y[i];
                const double t = s + term;
                if (n > opt.compensated_from) comp += std::fabs(s) >= std::fabs(term) ? (s - t) + term : (term - t) + s;
                s = t;
            }
            y[n] = s + comp;
            if (y[n] != 0.0) support.push_back(n);
            if (!std::isfinite(y[n]) ||
                (y[n] != 0.0 && std::log(std::fabs(y[n])) + static_cast<double>(n) * log_lambda > log_exit)) {
                y.resize(n + 1);
                break;
            }
        }
    }
    return detail::finish_trajectory(kernel, std::move(y), lambda, SolveMethod::Direct, steps, opt);
}

/// Leaf length of the blocked solver: 2^ceil(log2 sqrt(steps)), capped at 64
/// so the leaf work stays O(steps log steps).
inline std::size_t fast_block_size(std::size_t steps) {
    const auto root = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(steps))));
    return std::min<std::size_t>(std::bit_ceil(std::max<std::size_t>(root, 1)), 64);
}

/// Same contract as solve(); contributions of completed halves to later
/// indices are added with FFT-based cyclic convolution (divide and conquer,
/// O(steps log^2 steps)).
inline Trajectory solve_fast(const KernelSpec& kernel, std::size_t steps, double x0 = 1.0, const SolveOptions& opt = {}) {
    if (steps < 1) throw std::invalid_argument("solve_fast: steps must be >= 1");
    const double lambda = detail::rescale_factor(kernel);
    if (lambda != 1.0) {
        // FFT rounding noise would be amplified by lambda^n after rescaling;
        // such trajectories either leave the cutoff within a few dozen steps
        // or cancel exactly, and the direct sum handles both.
        auto t = solve(kernel, steps, x0, opt);
        t.method = SolveMethod::FftBlocked;
        return t;
    }
    // blocks cover [0, total); when steps is a power of two the last index
    // is appended by a direct sum
    const std::size_t total = std::bit_ceil(steps);
    const std::size_t leaf = fast_block_size(steps);
    const auto b = detail::rescaled_kernel(kernel, std::max(total, steps), 1.0);
    std::vector<double> y(std::max(total, steps + 1), 0.0);
    std::vector<double> acc(y.size(), 0.0);
    y[0] = x0;
    // nonnegative kernels give a nonnegative trajectory; FFT noise must not
    // push decayed entries below zero
    const bool clamp = x0 >= 0.0 && std::all_of(b.begin() + 1, b.end(), [](double v) { return v >= 0.0; });
    // b's spectra are taken in long double once per block length
    const fft::Plan<long double> wide_plan(total);
    const fft::Plan<double> plan(wide_plan);
    std::map<std::size_t, std::vector<fft::Complex<double>>> kernel_hat;
    bool stopped = false;

    // iterative form of: solve(l, r) = { solve(l, m); add y[l,m) * b into acc[m, r); solve(m, r) }
    struct Frame {
        std::size_t lo, hi;
        bool left_done;
    };
    std::vector<Frame> stack{{0, total, false}};
    while (!stack.empty() && !stopped) {
        Frame f = stack.back();
        stack.pop_back();
        if (f.lo > steps) continue;
        const std::size_t len = f.hi - f.lo;
        if (len <= leaf) {
            detail::direct_range(y, b, f.lo, f.lo, f.hi, &acc, opt.compensated_from);
            for (std::size_t n = f.lo; n < f.hi && n <= steps; ++n) {
                if (clamp && y[n] < 0.0) y[n] = 0.0;
                if (detail::exceeds(y[n], opt.early_exit_level)) {
                    y.resize(n + 1);
                    stopped = true;
                    break;
                }
            }
            continue;
        }
        const std::size_t mid = f.lo + len / 2;
        if (!f.left_done) {
            stack.push_back({f.lo, f.hi, true});
            stack.push_back({f.lo, mid, false});
            continue;
        }
        if (mid > steps) continue;
        // contributions of y[lo, mid) to acc[mid, hi): index n = lo + k + 1
        auto it = kernel_hat.find(len);
        if (it == kernel_hat.end())
            it = kernel_hat.emplace(len, fft::spectrum(wide_plan, len, std::span<const double>(b.data() + 1, len - 1))).first;
        const std::span<const double> u(y.data() + f.lo, len / 2);
        const auto w = fft::cyclic_convolve(plan, u, it->second);
        for (std::size_t n = mid; n < f.hi; ++n) acc[n] += w[n - f.lo - 1];
        stack.push_back({mid, f.hi, false});
    }
    if (!stopped && total == steps) {
        detail::direct_range(y, b, 0, steps, steps + 1, nullptr, opt.compensated_from);
        if (detail::exceeds(y[steps], opt.early_exit_level)) stopped = true;
    }
    if (y.size() > steps + 1) y.resize(steps + 1);
    return detail::finish_trajectory(kernel, std::move(y), 1.0, SolveMethod::FftBlocked, steps, opt);
}

// ---------------------------------------------------------------------------
// empirical classification

enum class EmpiricalKind { Decaying, BoundedNonDecaying, Unbounded, Inconclusive };

inline const char* to_string(EmpiricalKind k) {
    switch (k) {
        case EmpiricalKind::Decaying: return "decaying";
        case EmpiricalKind::BoundedNonDecaying: return "bounded_non_decaying";
        case EmpiricalKind::Unbounded: return "unbounded";
        case EmpiricalKind::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct EmpiricalVerdict {
    EmpiricalKind kind = EmpiricalKind::Inconclusive;
    std::size_t index = 0;
    double value = 0.0;
    std::string reason;
};

namespace detail {
inline std::pair<std::size_t, double> window_max(const std::vector<double>& v, std::size_t from, std::size_t to) {
    std::size_t arg = from;
    double best = -1.0;
    for (std::size_t i = from; i < to; ++i) {
        if (std::fabs(v[i]) > best) {
            best = std::fabs(v[i]);
            arg = i;
        }
    }
    return {arg, best};
}
}  // namespace detail

/// Minimum trajectory length accepted by classify().
inline constexpr std::size_t kMinClassifiable = 100;

inline EmpiricalVerdict classify(const Trajectory& traj, const Thresholds& th = {}) {
    const auto& x = traj.values;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (std::fabs(x[i]) > th.unbounded_cutoff)
            return {EmpiricalKind::Unbounded, i, x[i], "|x_n| exceeds the unbounded cutoff"};
    }
    if (traj.termination == Termination::Overflow)
        return {EmpiricalKind::Unbounded, x.empty() ? 0 : x.size() - 1, x.empty() ? 0.0 : x.back(),
                "trajectory overflowed"};
    const std::size_t n = x.size();
    if (n < kMinClassifiable) return {EmpiricalKind::Inconclusive, 0, 0.0, "trajectory too short"};
    const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(th.window_fraction * static_cast<double>(n)));
    const auto [arg, trailing] = detail::window_max(x, n - window, n);
    if (trailing <= th.decay_level) return {EmpiricalKind::Decaying, arg, x[arg], "trailing window below decay level"};

    const auto prev = detail::window_max(x, n - std::min(n, 2 * window), n - window).second;
    if (trailing < 0.9 * prev)
        return {EmpiricalKind::Inconclusive, arg, x[arg], "trailing maximum still falling by more than 10% per window"};
    const std::size_t half = n / 2;
    const auto mid = detail::window_max(x, half - std::min(half, window), half).second;
    if (trailing < 0.99 * mid)
        return {EmpiricalKind::Inconclusive, arg, x[arg], "slow decay: trailing maximum below its mid-horizon level"};
    return {EmpiricalKind::BoundedNonDecaying, arg, x[arg], "trailing window bounded away from zero"};
}

/// CSV export: header `n,x`, 17 significant digits.
inline void write_csv(std::ostream& os, const Trajectory& t) {
    os << "n,x\n";
    char buf[64];
    for (std::size_t i = 0; i < t.values.size(); ++i) {
        double v = t.values[i];
        if (v == 0.0) v = 0.0;
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, v);
        os << buf;
    }
}

}  // namespace volterra
