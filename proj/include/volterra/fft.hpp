#pragma once

// Radix-2 complex FFT and the cyclic "middle product" used by the blocked
// trajectory solver. Templated on the real type so that large blocks can run
// in extended precision.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace volterra::fft {

template <class T>
struct Complex {
    T re = 0;
    T im = 0;
};

/// Twiddle tables for every power-of-two transform length up to max_size.
template <class T>
class Plan {
public:
    explicit Plan(std::size_t max_size) : size_(max_size), twiddle_(max_size > 1 ? max_size - 1 : 0) {
        if (max_size == 0 || !std::has_single_bit(max_size))
            throw std::invalid_argument("fft size must be a power of two");
        // the stage with butterfly span `half` uses [half - 1, 2 half - 1);
        // top-stage entries come from their own angles, recurrences lose accuracy
        const std::size_t top = max_size / 2;
        for (std::size_t k = 0; k < top; ++k) {
            const long double angle =
                -std::numbers::pi_v<long double> * static_cast<long double>(k) / static_cast<long double>(top);
            twiddle_[top - 1 + k] = {static_cast<T>(std::cos(angle)), static_cast<T>(std::sin(angle))};
        }
        // smaller stages sample the top one: k / half = (k top / half) / top
        for (std::size_t half = 1; half < top; half <<= 1)
            for (std::size_t k = 0; k < half; ++k) twiddle_[half - 1 + k] = twiddle_[top - 1 + k * (top / half)];
    }

    /// Same tables rounded to another precision.
    template <class U>
    explicit Plan(const Plan<U>& other) : size_(other.size()), twiddle_(other.twiddles().size()) {
        for (std::size_t i = 0; i < twiddle_.size(); ++i)
            twiddle_[i] = {static_cast<T>(other.twiddles()[i].re), static_cast<T>(other.twiddles()[i].im)};
    }

    std::size_t size() const { return size_; }
    const std::vector<Complex<T>>& twiddles() const { return twiddle_; }

    /// In-place transforms of any power-of-two length up to size().
    void forward(std::span<Complex<T>> data) const { transform(data, false); }

    /// Unnormalized inverse: forward followed by inverse scales by the length.
    void inverse(std::span<Complex<T>> data) const { transform(data, true); }

private:
    void transform(std::span<Complex<T>> a, bool inverse) const {
        const std::size_t n = a.size();
        if (n == 0 || n > size_ || !std::has_single_bit(n)) throw std::invalid_argument("fft length not supported by plan");
        for (std::size_t i = 1, j = 0; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(a[i], a[j]);
        }
        const T sign = inverse ? T(-1) : T(1);
        for (std::size_t half = 1; half < n; half <<= 1) {
            const Complex<T>* tw = twiddle_.data() + (half - 1);
            for (std::size_t start = 0; start < n; start += 2 * half) {
                Complex<T>* x = a.data() + start;
                Complex<T>* y = x + half;
                for (std::size_t k = 0; k < half; ++k) {
                    const T wr = tw[k].re;
                    const T wi = sign * tw[k].im;
                    const T vr = y[k].re * wr - y[k].im * wi;
                    const T vi = y[k].re * wi + y[k].im * wr;
                    y[k] = {x[k].re - vr, x[k].im - vi};
                    x[k] = {x[k].re + vr, x[k].im + vi};
                }
            }
        }
    }

    std::size_t size_;
    std::vector<Complex<T>> twiddle_;
};

/// Cyclic convolution of length n of two real sequences, packed into one
/// complex transform. `u` and `v` are zero-padded if shorter.
template <class T>
std::vector<double> cyclic_convolve(const Plan<T>& plan, std::size_t n, std::span<const double> u,
                                    std::span<const double> v) {
    // Packing mixes the rounding errors of both spectra, so v is first scaled
    // by a power of two to the magnitude of u; the product is scaled back.
    double umax = 0.0;
    double vmax = 0.0;
    for (std::size_t i = 0; i < u.size() && i < n; ++i) umax = std::max(umax, std::fabs(u[i]));
    for (std::size_t i = 0; i < v.size() && i < n; ++i) vmax = std::max(vmax, std::fabs(v[i]));
    int shift = 0;
    if (umax > 0.0 && vmax > 0.0) shift = std::ilogb(umax) - std::ilogb(vmax);
    std::vector<Complex<T>> z(n);
    for (std::size_t i = 0; i < u.size() && i < n; ++i) z[i].re = static_cast<T>(u[i]);
    for (std::size_t i = 0; i < v.size() && i < n; ++i) z[i].im = static_cast<T>(std::ldexp(v[i], shift));
    plan.forward(z);
    // U_k = (Z_k + conj Z_-k) / 2, V_k = (Z_k - conj Z_-k) / 2i, W = U V;
    // W_k and W_-k = conj W_k are filled together.
    std::vector<Complex<T>> w(n);
    for (std::size_t k = 0; k <= n / 2; ++k) {
        const std::size_t j = (n - k) % n;
        const Complex<T> a = z[k];
        const Complex<T> b = z[j];
        const T ur = (a.re + b.re) / 2, ui = (a.im - b.im) / 2;
        const T vr = (a.im + b.im) / 2, vi = (b.re - a.re) / 2;
        const T wr = ur * vr - ui * vi;
        const T wi = ur * vi + ui * vr;
        w[k] = {wr, wi};
        w[j] = {wr, -wi};
    }
    plan.inverse(w);
    std::vector<double> out(n);
    for (std::size_t k = 0; k < n; ++k)
        out[k] = std::ldexp(static_cast<double>(w[k].re / static_cast<T>(n)), -shift);
    return out;
}

/// Spectrum of a fixed real sequence, computed in precision T and stored in
/// double, for repeated convolutions against it.
template <class T>
std::vector<Complex<double>> spectrum(const Plan<T>& plan, std::size_t n, std::span<const double> v) {
    std::vector<Complex<T>> z(n);
    for (std::size_t i = 0; i < v.size() && i < z.size(); ++i) z[i].re = static_cast<T>(v[i]);
    plan.forward(z);
    std::vector<Complex<double>> out(z.size());
    for (std::size_t k = 0; k < z.size(); ++k) out[k] = {static_cast<double>(z[k].re), static_cast<double>(z[k].im)};
    return out;
}

/// Cyclic convolution of real `u` with the sequence whose spectrum is `v_hat`;
/// the length is v_hat.size().
inline std::vector<double> cyclic_convolve(const Plan<double>& plan, std::span<const double> u,
                                           const std::vector<Complex<double>>& v_hat) {
    const std::size_t n = v_hat.size();
    std::vector<Complex<double>> z(n);
    for (std::size_t i = 0; i < u.size() && i < n; ++i) z[i].re = u[i];
    plan.forward(z);
    for (std::size_t k = 0; k < n; ++k) {
        const double re = z[k].re * v_hat[k].re - z[k].im * v_hat[k].im;
        const double im = z[k].re * v_hat[k].im + z[k].im * v_hat[k].re;
        z[k] = {re, im};
    }
    plan.inverse(z);
    std::vector<double> out(n);
    const double scale = 1.0 / static_cast<double>(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = z[k].re * scale;
    return out;
}

}  // namespace volterra::fft
