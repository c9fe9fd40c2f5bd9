#pragma once

// Outward-rounded interval arithmetic on doubles.
//
// Endpoints of the basic operations are rounded in the safe direction with
// error-free transformations (TwoSum, fma), so exact results stay exact.
// Library functions (pow, log) are widened by two ulps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace volterra {

inline double next_down(double x) { return std::nextafter(x, -std::numeric_limits<double>::infinity()); }
inline double next_up(double x) { return std::nextafter(x, std::numeric_limits<double>::infinity()); }

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    constexpr Interval() = default;
    constexpr Interval(double v) : lo(v), hi(v) {}  // NOLINT: implicit point interval
    constexpr Interval(double l, double h) : lo(l), hi(h) {}

    double width() const { return hi - lo; }
    double mid() const { return 0.5 * (lo + hi); }
    bool contains(double v) const { return lo <= v && v <= hi; }
    bool is_point() const { return lo == hi; }
    double mag() const { return std::max(std::fabs(lo), std::fabs(hi)); }
    double mig() const {
        if (lo <= 0.0 && hi >= 0.0) return 0.0;
        return std::min(std::fabs(lo), std::fabs(hi));
    }
};

inline Interval widen(Interval x, int ulps = 1) {
    for (int i = 0; i < ulps; ++i) {
        x.lo = next_down(x.lo);
        x.hi = next_up(x.hi);
    }
    return x;
}

inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

namespace rounding {

// below this magnitude fma no longer yields exact product residuals
inline constexpr double kSafeMin = 0x1p-960;

inline double add_down(double a, double b) {
    const double s = a + b;
    if (!std::isfinite(s)) return next_down(s);
    const double bb = s - a;
    const double err = (a - (s - bb)) + (b - bb);
    return err < 0.0 ? next_down(s) : s;
}
inline double add_up(double a, double b) { return -add_down(-a, -b); }

inline double mul_down(double a, double b) {
    const double p = a * b;
    if (!std::isfinite(p)) return next_down(p);
    if (a == 0.0 || b == 0.0) return p;
    if (std::fabs(p) < kSafeMin) return next_down(p);
    return std::fma(a, b, -p) < 0.0 ? next_down(p) : p;
}
inline double mul_up(double a, double b) { return -mul_down(-a, b); }

inline double div_down(double a, double b) {
    const double q = a / b;
    if (!std::isfinite(q)) return next_down(q);
    if (a == 0.0) return q;
    if (std::fabs(q) < kSafeMin || std::fabs(a) < kSafeMin) return next_down(q);
    // a/b = q - r/b exactly
    const double r = std::fma(q, b, -a);
    if (r == 0.0) return q;
    return ((r > 0.0) == (b > 0.0)) ? next_down(q) : q;
}
inline double div_up(double a, double b) { return -div_down(-a, b); }

}  // namespace rounding

inline Interval operator+(Interval a, Interval b) {
    return {rounding::add_down(a.lo, b.lo), rounding::add_up(a.hi, b.hi)};
}

inline Interval operator-(Interval a, Interval b) { return a + (-b); }

inline Interval operator*(Interval a, Interval b) {
    using namespace rounding;
    const double lo = std::min({mul_down(a.lo, b.lo), mul_down(a.lo, b.hi), mul_down(a.hi, b.lo), mul_down(a.hi, b.hi)});
    const double hi = std::max({mul_up(a.lo, b.lo), mul_up(a.lo, b.hi), mul_up(a.hi, b.lo), mul_up(a.hi, b.hi)});
    return {lo, hi};
}

// Division by an interval containing zero yields the whole real line.
inline Interval operator/(Interval a, Interval b) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (b.lo <= 0.0 && b.hi >= 0.0) return {-inf, inf};
    using namespace rounding;
    const double lo = std::min({div_down(a.lo, b.lo), div_down(a.lo, b.hi), div_down(a.hi, b.lo), div_down(a.hi, b.hi)});
    const double hi = std::max({div_up(a.lo, b.lo), div_up(a.lo, b.hi), div_up(a.hi, b.lo), div_up(a.hi, b.hi)});
    return {lo, hi};
}

inline Interval& operator+=(Interval& a, Interval b) { return a = a + b; }
inline Interval& operator*=(Interval& a, Interval b) { return a = a * b; }

inline Interval abs(Interval a) {
    if (a.lo >= 0.0) return a;
    if (a.hi <= 0.0) return -a;
    return {0.0, std::max(-a.lo, a.hi)};
}

inline Interval hull(Interval a, Interval b) { return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)}; }

// Integer power by repeated squaring.
inline Interval pow(Interval base, std::uint64_t e) {
    Interval result{1.0};
    // even powers of sign-straddling intervals are handled by the abs trick
    const bool even = (e % 2 == 0);
    Interval b = even ? abs(base) : base;
    while (e > 0) {
        if (e & 1U) result *= b;
        e >>= 1U;
        if (e > 0) b *= b;
    }
    return result;
}

// x^y for x > 0 and real y, monotone in x for fixed sign of y.
inline Interval pow_real(Interval x, double y) {
    if (y == 0.0) return Interval{1.0};
    const double a = std::pow(x.lo, y);
    const double b = std::pow(x.hi, y);
    Interval r{std::min(a, b), std::max(a, b)};
    r = widen(r, 2);
    r.lo = std::max(r.lo, 0.0);
    return r;
}

// Summation accumulator in extended precision with directed rounding of
// each partial sum.
class IntervalSum {
public:
    void add(Interval x) {
        lo_ = add_directed(lo_, x.lo, -1);
        hi_ = add_directed(hi_, x.hi, +1);
        ++count_;
    }
    Interval value() const {
        if (count_ == 0) return Interval{0.0};
        double l = static_cast<double>(lo_);
        double h = static_cast<double>(hi_);
        if (static_cast<long double>(l) > lo_) l = next_down(l);
        if (static_cast<long double>(h) < hi_) h = next_up(h);
        return {l, h};
    }

private:
    static long double add_directed(long double acc, double x, int dir) {
        constexpr long double inf = std::numeric_limits<long double>::infinity();
        const long double xl = x;
        const long double s = acc + xl;
        if (!std::isfinite(s)) return std::nextafter(s, dir < 0 ? -inf : inf);
        const long double bb = s - acc;
        const long double err = (acc - (s - bb)) + (xl - bb);
        if (dir < 0 && err < 0.0L) return std::nextafter(s, -inf);
        if (dir > 0 && err > 0.0L) return std::nextafter(s, inf);
        return s;
    }

    long double lo_ = 0.0L;
    long double hi_ = 0.0L;
    std::size_t count_ = 0;
};

}  // namespace volterra
