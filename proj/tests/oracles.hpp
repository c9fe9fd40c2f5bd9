#pragma once

// Test-only reference computations. These deliberately avoid the library's
// enclosure engine and recursion code so they can check it independently.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

/// Plain long-double partial sum of f(1..count).
inline long double partial_sum(const std::function<long double(std::size_t)>& f, std::size_t count,
                               std::size_t first = 1) {
    long double s = 0.0L;
    for (std::size_t i = first; i < first + count; ++i) s += f(i);
    return s;
}

/// zeta(s) for s > 1 from a partial sum plus an Euler-Maclaurin remainder,
/// accurate to far below 1e-12 for s >= 2 with the default cut.
inline long double zeta(long double s, std::size_t cut = 100000) {
    long double sum = 0.0L;
    for (std::size_t i = cut; i >= 1; --i) sum += std::pow(static_cast<long double>(i), -s);
    const long double m = static_cast<long double>(cut);
    // sum_{i>m} i^-s ~ m^{1-s}/(s-1) - m^{-s}/2 + s m^{-s-1}/12
    sum += std::pow(m, 1.0L - s) / (s - 1.0L) - std::pow(m, -s) / 2.0L + s * std::pow(m, -s - 1.0L) / 12.0L;
    return sum;
}

/// Naive O(n^2) recursion x_n = sum_{i<n} a_{n-i} x_i in long double,
/// `a[k-1]` holding a_k.
inline std::vector<long double> recursion(const std::vector<double>& a, std::size_t steps, long double x0 = 1.0L) {
    std::vector<long double> x(steps + 1, 0.0L);
    x[0] = x0;
    for (std::size_t n = 1; n <= steps; ++n) {
        long double s = 0.0L;
        for (std::size_t i = 0; i < n; ++i) s += static_cast<long double>(a[n - i - 1]) * x[i];
        x[n] = s;
    }
    return x;
}

/// delta(rho) = |prod (1 - rho m_i)| for root moduli m_i.
inline double delta(const std::vector<double>& moduli, double rho) {
    long double p = 1.0L;
    for (double m : moduli) p *= std::fabs(1.0L - static_cast<long double>(rho) * m);
    return static_cast<double>(p);
}

/// Max of delta over a uniform grid on [lo, hi].
inline double delta_grid_max(const std::vector<double>& moduli, double lo, double hi, std::size_t points) {
    double best = 0.0;
    for (std::size_t k = 0; k < points; ++k) {
        const double rho = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(points - 1);
        best = std::max(best, delta(moduli, rho));
    }
    return best;
}

/// Horner evaluation of a polynomial given by descending coefficients.
inline std::complex<long double> horner(const std::vector<double>& desc, std::complex<long double> z) {
    std::complex<long double> acc = 0.0L;
    for (double c : desc) acc = acc * z + static_cast<long double>(c);
    return acc;
}

}  // namespace oracle
