#pragma once

// Coefficient sequences (a_n) of the convolution recursion
//
//     x_n = sum_{i=0}^{n-1} a_{n-i} x_i,   n >= 1,
//
// stored as an explicit prefix a_1..a_N followed by a parametric tail
// a_n = c q^n / (n^alpha (n+1)^beta) for n > N, together with certified
// enclosures of the series sums that the stability criteria consume.

#include <volterra/interval.hpp>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace volterra {

struct ZeroTail {
    bool operator==(const ZeroTail&) const = default;
};

struct ParametricTail {
    double c = 0.0;
    double q = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    bool operator==(const ParametricTail&) const = default;
};

using TailModel = std::variant<ZeroTail, ParametricTail>;

class KernelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class KernelSpec {
public:
    KernelSpec() = default;

    /// Validates the tail and normalizes c = 0 (or q = 0) to a zero tail.
    KernelSpec(std::vector<double> prefix, TailModel tail) : prefix_(std::move(prefix)), tail_(tail) {
        for (std::size_t i = 0; i < prefix_.size(); ++i) {
            if (!std::isfinite(prefix_[i]))
                throw KernelError("prefix[" + std::to_string(i) + "]: not a finite number");
        }
        if (auto* p = std::get_if<ParametricTail>(&tail_)) {
            if (!std::isfinite(p->c)) throw KernelError("tail.c: not a finite number");
            if (!std::isfinite(p->q)) throw KernelError("tail.q: not a finite number");
            if (!std::isfinite(p->alpha) || p->alpha < 0.0) throw KernelError("tail.alpha: must be a finite number >= 0");
            if (!std::isfinite(p->beta) || p->beta < 0.0) throw KernelError("tail.beta: must be a finite number >= 0");
            if (p->c == 0.0 || p->q == 0.0) tail_ = ZeroTail{};
        }
    }

    static KernelSpec finite(std::vector<double> prefix) { return {std::move(prefix), ZeroTail{}}; }
    static KernelSpec parametric(std::vector<double> prefix, double c, double q, double alpha = 0.0, double beta = 0.0) {
        return {std::move(prefix), ParametricTail{c, q, alpha, beta}};
    }

    const std::vector<double>& prefix() const { return prefix_; }
    std::size_t prefix_length() const { return prefix_.size(); }
    const TailModel& tail() const { return tail_; }
    bool has_zero_tail() const { return std::holds_alternative<ZeroTail>(tail_); }
    const ParametricTail* parametric_tail() const { return std::get_if<ParametricTail>(&tail_); }

    /// a_n for n >= 1.
    double term(std::size_t n) const {
        if (n == 0) throw std::out_of_range("kernel terms are indexed from 1");
        if (n <= prefix_.size()) return prefix_[n - 1];
        if (const auto* p = parametric_tail()) return tail_value(*p, n, 1.0);
        return 0.0;
    }

    /// a_n / lambda^n, used by the rescaled recursion when the tail grows.
    double scaled_term(std::size_t n, double lambda) const {
        if (n <= prefix_.size()) {
            if (lambda == 1.0) return prefix_[n - 1];
            return prefix_[n - 1] * std::pow(lambda, -static_cast<double>(n));
        }
        if (const auto* p = parametric_tail()) return tail_value(*p, n, lambda);
        return 0.0;
    }

    /// a_1..a_count as a dense vector (index 0 holds a_1).
    std::vector<double> terms(std::size_t count) const {
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = term(i + 1);
        return out;
    }

    bool operator==(const KernelSpec&) const = default;

private:
    static double tail_value(const ParametricTail& p, std::size_t n, double lambda) {
        const double nd = static_cast<double>(n);
        double v = p.c * std::pow(p.q / lambda, nd);
        if (p.alpha != 0.0) v /= std::pow(nd, p.alpha);
        if (p.beta != 0.0) v /= std::pow(nd + 1.0, p.beta);
        return v;
    }

    std::vector<double> prefix_;
    TailModel tail_ = ZeroTail{};
};

/// Content hash (FNV-1a, 64 bit) over the bit patterns of the kernel data.
inline std::string kernel_id(const KernelSpec& k) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix_bytes = [&h](const void* data, std::size_t len) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < len; ++i) {
            h ^= bytes[i];
            h *= 1099511628211ULL;
        }
    };
    auto mix_double = [&](double v) {
        if (v == 0.0) v = 0.0;  // fold -0
        std::uint64_t bits = 0;
        std::memcpy(&bits, &v, sizeof bits);
        mix_bytes(&bits, sizeof bits);
    };
    const std::uint64_t n = k.prefix_length();
    mix_bytes(&n, sizeof n);
    for (double v : k.prefix()) mix_double(v);
    if (const auto* p = k.parametric_tail()) {
        const char tag = 'p';
        mix_bytes(&tag, 1);
        mix_double(p->c);
        mix_double(p->q);
        mix_double(p->alpha);
        mix_double(p->beta);
    } else {
        const char tag = 'z';
        mix_bytes(&tag, 1);
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

// ---------------------------------------------------------------------------
// Series enclosures

struct SumEnclosure {
    enum class Kind { Finite, Divergent, Unknown };
    Kind kind = Kind::Unknown;
    double lo = 0.0;
    double hi = 0.0;

    static SumEnclosure finite(Interval v) { return {Kind::Finite, v.lo, v.hi}; }
    static SumEnclosure divergent() { return {Kind::Divergent, 0.0, 0.0}; }
    static SumEnclosure unknown() { return {Kind::Unknown, 0.0, 0.0}; }

    bool is_finite() const { return kind == Kind::Finite; }
    bool is_divergent() const { return kind == Kind::Divergent; }
    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double v) const { return is_finite() && lo <= v && v <= hi; }
    Interval interval() const { return {lo, hi}; }
};

inline const char* to_string(SumEnclosure::Kind k) {
    switch (k) {
        case SumEnclosure::Kind::Finite: return "finite";
        case SumEnclosure::Kind::Divergent: return "divergent";
        case SumEnclosure::Kind::Unknown: return "unknown";
    }
    return "unknown";
}

enum class SeriesMode { Plain, Absolute, FirstMoment, FirstMomentAbs };

namespace detail {

// Largest number of explicit tail terms summed before giving up on the
// requested precision.
inline constexpr std::size_t kTermBudget = std::size_t{1} << 22;

struct TailSum {
    SumEnclosure enclosure;
    bool met_precision = false;
};

inline TailSum finite_sum(Interval v, double precision) {
    return {SumEnclosure::finite(v), v.width() <= precision};
}

// Enclosure of c * q^i * i^weight / (i^alpha (i+1)^beta).
inline Interval tail_term(Interval c, Interval q, double alpha, double beta, int weight, std::size_t i) {
    const double id = static_cast<double>(i);
    Interval v = c * pow(q, static_cast<std::uint64_t>(i));
    const double e1 = static_cast<double>(weight) - alpha;
    if (e1 != 0.0) v *= pow_real(Interval{id}, e1);
    if (beta != 0.0) v *= pow_real(Interval{id + 1.0}, -beta);
    return v;
}

// Geometric-rate case |q| < 1: explicit terms plus a ratio-test remainder.
inline TailSum sum_geometric(Interval c, Interval q, double alpha, double beta, int weight, bool absolute,
                             std::size_t start, double precision) {
    const Interval qa = abs(q);
    if (alpha == 0.0 && beta == 0.0) {
        const Interval x = absolute ? qa : q;
        const Interval cc = absolute ? abs(c) : c;
        const Interval one{1.0};
        const auto m = static_cast<std::uint64_t>(start);
        if (weight == 0) {
            // sum_{i>m} x^i = x^{m+1} / (1 - x), increasing in x for x >= 0
            if (absolute)
                return finite_sum(hull(cc * pow(Interval{qa.lo}, m + 1) / (one - Interval{qa.lo}),
                                       cc * pow(Interval{qa.hi}, m + 1) / (one - Interval{qa.hi})),
                                  precision);
            return finite_sum(cc * pow(x, m + 1) / (one - x), precision);
        }
        // sum_{i>m} i x^i = x^{m+1} ((m+1) - m x) / (1 - x)^2
        const Interval md{static_cast<double>(m)};
        const Interval v = cc * pow(x, m + 1) * (md + one - md * x) / pow(one - x, 2);
        return finite_sum(v, precision);
    }

    const double e1 = static_cast<double>(weight) - alpha;
    const Interval cabs = abs(c);
    IntervalSum acc;
    std::size_t i = start + 1;
    double remainder = std::numeric_limits<double>::infinity();
    for (std::size_t count = 0; count < kTermBudget; ++count, ++i) {
        // remainder bound for sum_{j >= i}
        const double id = static_cast<double>(i);
        const double theta = qa.hi * (e1 > 0.0 ? std::pow((id + 1.0) / id, e1) * (1.0 + 1e-15) : 1.0);
        if (theta < 1.0) {
            const Interval lead = tail_term(cabs, Interval{qa.hi}, alpha, beta, weight, i);
            remainder = next_up(lead.hi / (1.0 - theta) * (1.0 + 4e-16));
            if (remainder <= 0.5 * precision) break;
        }
        const Interval t = absolute ? tail_term(cabs, qa, alpha, beta, weight, i) : tail_term(c, q, alpha, beta, weight, i);
        acc.add(t);
    }
    Interval total = acc.value();
    if (!std::isfinite(remainder)) return {SumEnclosure::unknown(), false};
    total = absolute ? Interval{total.lo, next_up(total.hi + remainder)}
                     : Interval{next_down(total.lo - remainder), next_up(total.hi + remainder)};
    return finite_sum(total, precision);
}

// |q| = 1 with all terms of one sign: integral-test bracket of the remainder.
inline TailSum sum_power_law(Interval c, double alpha, double beta, int weight, std::size_t start, double precision) {
    const double s = alpha + beta - static_cast<double>(weight);
    if (s <= 1.0) return {SumEnclosure::divergent(), true};
    if (alpha == 1.0 && beta == 1.0 && weight == 0) {
        // telescoping: sum_{i>m} 1/(i(i+1)) = 1/(m+1)
        return finite_sum(c / Interval{static_cast<double>(start) + 1.0}, precision);
    }
    const Interval one{1.0};
    const Interval sm1{s - 1.0};
    IntervalSum acc;
    std::size_t m = start;
    Interval remainder;
    // Remainder bracket for sum_{i>m} f(i), f(t) = t^-a (t+1)^-beta, a = alpha - weight.
    // For a >= 0, f is decreasing and convex, so
    //   int_{m+1}^inf f + f(m+1)/2  <=  sum_{i>m} f(i)  <=  int_{m+1/2}^inf f,
    // and the integrals are bracketed through the alternating Taylor bounds
    // of (1+u)^-beta at u = 1/t. Otherwise fall back to the cruder
    // t^-s (t/(t+1))^beta form with the factor bounded by its range.
    const double a = alpha - static_cast<double>(weight);
    auto integral = [&](Interval from, int terms) {
        // sum_k coef_k int_from^inf t^{-s-k} dt
        Interval total{0.0};
        Interval coef{1.0};
        for (int k = 0; k < terms; ++k) {
            if (k > 0) coef = coef * Interval{-(beta + static_cast<double>(k - 1))} / Interval{static_cast<double>(k)};
            const double e = s + static_cast<double>(k) - 1.0;
            total += coef * pow_real(from, -e) / Interval{e};
        }
        return total;
    };
    auto bracket = [&](std::size_t mm) {
        const double md = static_cast<double>(mm);
        const Interval m1{md + 1.0};
        if (a >= 0.0) {
            const Interval f_m1 = pow_real(m1, -a) * pow_real(Interval{md + 2.0}, -beta);
            const Interval lower = integral(m1, 4) + f_m1 * Interval{0.5};
            const Interval upper = integral(Interval{md + 0.5}, 3);
            return Interval{lower.lo, upper.hi};
        }
        const Interval lower = pow_real(m1, 1.0 - s) / sm1 + pow_real(m1, -s) * Interval{0.5};
        const Interval upper = pow_real(Interval{md + 0.5}, 1.0 - s) / sm1;
        Interval factor{1.0};
        if (beta != 0.0) factor = pow_real(Interval{md + 1.0} / Interval{md + 2.0}, beta);
        return Interval{(lower * factor).lo, upper.hi};
    };
    remainder = bracket(m);
    // refining below a few ulps of the total is pointless
    const double target = std::max(0.5 * precision, 16.0 * std::numeric_limits<double>::epsilon() * remainder.hi);
    std::size_t count = 0;
    std::size_t next_check = m + 16;
    while (remainder.width() > target && count < kTermBudget) {
        ++m;
        ++count;
        acc.add(tail_term(Interval{1.0}, Interval{1.0}, alpha, beta, weight, m));
        if (m >= next_check) {
            remainder = bracket(m);
            next_check = m + std::max<std::size_t>(16, m / 8);
        }
    }
    remainder = bracket(m);
    const Interval total = (acc.value() + remainder) * c;
    return finite_sum(total, precision);
}

// q = -1: alternating series, bracketed by the first omitted term once the
// magnitudes decrease monotonically.
inline TailSum sum_alternating(Interval c, double alpha, double beta, int weight, std::size_t start, double precision) {
    const double e1 = static_cast<double>(weight) - alpha;
    const double s = beta - e1;
    if (s <= 0.0) return {SumEnclosure::divergent(), true};
    // |t_i| decreases for i > e1 / s
    std::size_t monotone_from = start + 1;
    if (e1 > 0.0) monotone_from = std::max<std::size_t>(monotone_from, static_cast<std::size_t>(std::ceil(e1 / s)) + 1);
    const Interval minus_one{-1.0};
    IntervalSum acc;
    std::size_t i = start + 1;
    for (std::size_t count = 0; count < kTermBudget; ++count, ++i) {
        const Interval t = tail_term(c, minus_one, alpha, beta, weight, i);
        if (i >= monotone_from && t.mag() <= 0.5 * precision) {
            // remainder sum_{j>=i} t_j lies between 0 and t_i
            const Interval total = acc.value() + hull(Interval{0.0}, t);
            return finite_sum(total, precision);
        }
        acc.add(t);
    }
    const Interval t = tail_term(c, minus_one, alpha, beta, weight, i);
    if (i < monotone_from) return {SumEnclosure::unknown(), false};
    return {SumEnclosure::finite(acc.value() + hull(Interval{0.0}, t)), false};
}

/// sum_{i > start} w(i) c q^i / (i^alpha (i+1)^beta) where w(i) = i^weight,
/// with absolute value taken termwise when `absolute`.
inline TailSum sum_tail(Interval c, Interval q, double alpha, double beta, int weight, bool absolute, std::size_t start,
                        double precision) {
    const Interval qa = abs(q);
    if (qa.lo > 1.0) return {SumEnclosure::divergent(), true};
    if (qa.hi < 1.0) return sum_geometric(c, q, alpha, beta, weight, absolute, start, precision);
    if (!(qa.lo == 1.0 && qa.hi == 1.0)) return {SumEnclosure::unknown(), false};
    if (absolute) return sum_power_law(abs(c), alpha, beta, weight, start, precision);
    if (q.lo == 1.0) return sum_power_law(c, alpha, beta, weight, start, precision);
    return sum_alternating(c, alpha, beta, weight, start, precision);
}

inline int mode_weight(SeriesMode m) { return (m == SeriesMode::FirstMoment || m == SeriesMode::FirstMomentAbs) ? 1 : 0; }
inline bool mode_absolute(SeriesMode m) { return m == SeriesMode::Absolute || m == SeriesMode::FirstMomentAbs; }

inline Interval weighted_prefix_sum(const std::vector<double>& prefix, std::size_t from, SeriesMode mode) {
    IntervalSum acc;
    for (std::size_t i = from; i < prefix.size(); ++i) {
        Interval v{mode_absolute(mode) ? std::fabs(prefix[i]) : prefix[i]};
        if (mode_weight(mode) == 1) v *= Interval{static_cast<double>(i + 1)};
        acc.add(v);
    }
    return acc.value();
}

inline TailSum kernel_sum_from(const KernelSpec& k, std::size_t n, SeriesMode mode, double precision) {
    const Interval head = weighted_prefix_sum(k.prefix(), n, mode);
    const auto* p = k.parametric_tail();
    if (p == nullptr) return finite_sum(head, precision);
    const std::size_t start = std::max(n, k.prefix_length());
    const double budget = std::max(precision - head.width(), 0.5 * precision);
    TailSum t = sum_tail(Interval{p->c}, Interval{p->q}, p->alpha, p->beta, mode_weight(mode), mode_absolute(mode),
                         start, budget);
    if (!t.enclosure.is_finite()) return t;
    const Interval total = head + t.enclosure.interval();
    return {SumEnclosure::finite(total), total.width() <= precision};
}

}  // namespace detail

/// Enclosure of sum_n w(n) a_n for the selected weighting. Returns Unknown
/// when the requested precision cannot be reached or convergence cannot be
/// decided.
inline SumEnclosure series_sum(const KernelSpec& kernel, SeriesMode mode, double precision) {
    if (!(precision > 0.0)) throw std::invalid_argument("series_sum: precision must be positive");
    const auto r = detail::kernel_sum_from(kernel, 0, mode, precision);
    if (r.enclosure.is_finite() && !r.met_precision) return SumEnclosure::unknown();
    return r.enclosure;
}

/// L_n = sum_{i>n} |a_i|. Always returns the tightest enclosure reached even
/// when it is wider than `precision`.
inline SumEnclosure tail_abs_sum(const KernelSpec& kernel, std::size_t n, double precision = 1e-14) {
    return detail::kernel_sum_from(kernel, n, SeriesMode::Absolute, precision).enclosure;
}

inline double radius_of_convergence(const KernelSpec& kernel) {
    if (const auto* p = kernel.parametric_tail()) return 1.0 / std::fabs(p->q);
    return std::numeric_limits<double>::infinity();
}

/// gcd{n : a_n > 0}; nullopt when no term is positive.
inline std::optional<std::uint64_t> support_gcd(const KernelSpec& kernel) {
    std::uint64_t g = 0;
    const auto& prefix = kernel.prefix();
    for (std::size_t i = 0; i < prefix.size(); ++i)
        if (prefix[i] > 0.0) g = std::gcd(g, static_cast<std::uint64_t>(i + 1));
    if (const auto* p = kernel.parametric_tail()) {
        // positive tail indices form an arithmetic progression; its gcd is
        // gcd(first, step)
        const std::uint64_t n0 = kernel.prefix_length() + 1;
        if (p->q > 0.0) {
            if (p->c > 0.0) g = std::gcd(std::gcd(g, n0), n0 + 1);
        } else {
            // sign of c q^n alternates; positive on indices of one parity
            const bool even_positive = p->c > 0.0;
            const std::uint64_t first = ((n0 % 2 == 0) == even_positive) ? n0 : n0 + 1;
            g = std::gcd(std::gcd(g, first), first + 2);
        }
    }
    if (g == 0) return std::nullopt;
    return g;
}

/// Enclosure of the power series a(t) = sum_n a_n t^n at a real point t.
/// Divergent/Unknown follow the tail engine's classification at q t.
inline SumEnclosure power_series_at(const KernelSpec& kernel, double t, double precision = 1e-15) {
    const Interval ti{t};
    Interval head{0.0};
    const auto& prefix = kernel.prefix();
    for (std::size_t i = prefix.size(); i-- > 0;) head = (head + Interval{prefix[i]}) * ti;
    const auto* p = kernel.parametric_tail();
    if (p == nullptr) return SumEnclosure::finite(head);
    const Interval q = Interval{p->q} * ti;
    const auto r = detail::sum_tail(Interval{p->c}, q, p->alpha, p->beta, 0, false, kernel.prefix_length(), precision);
    if (!r.enclosure.is_finite()) return r.enclosure;
    return SumEnclosure::finite(head + r.enclosure.interval());
}

}  // namespace volterra
