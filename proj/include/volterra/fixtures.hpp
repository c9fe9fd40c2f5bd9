#pragma once

// Reference kernels whose stability behaviour is known in closed form.
// The same kernels ship as JSON under fixtures/.

#include <volterra/kernel.hpp>

#include <string>
#include <vector>

namespace volterra::fixtures {

/// 1 / zeta(3)
inline constexpr double kInverseZeta3 = 0.83190737258070746868;

/// a_n = 1 / (n (n+1)): renewal kernel, nonnegative, unit sum, infinite mean.
inline KernelSpec renewal() { return KernelSpec::parametric({}, 1.0, 1.0, 1.0, 1.0); }

/// a_n = p^{n-1} / (n (n+1)); unbounded trajectory, radius 1/p.
inline KernelSpec growing_renewal(double p = 2.0) { return KernelSpec::parametric({}, 1.0 / p, p, 1.0, 1.0); }

/// a_n = -p^n; trajectory (1, -p, 0, 0, ...).
inline KernelSpec negative_geometric(double p = 3.0) { return KernelSpec::parametric({}, -1.0, p); }

/// (3/2, -9/16, s/20, s/20^2, ...) with s = +1 or -1.
inline KernelSpec double_root_stable(double sign = 1.0) {
    return KernelSpec::parametric({1.5, -0.5625}, 400.0 * sign, 0.05);
}

/// (1, -41/36, 8/9, -34/81, 16/81, -4/81, 1/(2 4^6), 1/(2^2 4^6), ...).
inline KernelSpec six_term_stable() {
    return KernelSpec::parametric({1.0, -41.0 / 36.0, 8.0 / 9.0, -34.0 / 81.0, 16.0 / 81.0, -4.0 / 81.0}, 1.0 / 64.0, 0.5);
}

/// a_1 = 4, a_2 = -4, a_n = 2^{-(n-1)} for n >= 3.
inline KernelSpec double_root_unstable() { return KernelSpec::parametric({4.0, -4.0}, 2.0, 0.5); }

/// a_n = c0 (-1)^n / n^3 with c0 = 1/zeta(3); simple characteristic zero at z = -1.
inline KernelSpec alternating_cubic() { return KernelSpec::parametric({}, kInverseZeta3, -1.0, 3.0, 0.0); }

/// a_n = 2^{-n}; x_n = 1/2 for n >= 1.
inline KernelSpec half_geometric() { return KernelSpec::parametric({}, 1.0, 0.5); }

struct NamedKernel {
    std::string name;
    KernelSpec kernel;
};

inline std::vector<NamedKernel> all() {
    return {
        {"renewal", renewal()},
        {"growing_renewal_p2", growing_renewal(2.0)},
        {"negative_geometric_p3", negative_geometric(3.0)},
        {"double_root_stable_plus", double_root_stable(1.0)},
        {"double_root_stable_minus", double_root_stable(-1.0)},
        {"six_term_stable", six_term_stable()},
        {"double_root_unstable", double_root_unstable()},
        {"alternating_cubic", alternating_cubic()},
        {"half_geometric", half_geometric()},
    };
}

}  // namespace volterra::fixtures
