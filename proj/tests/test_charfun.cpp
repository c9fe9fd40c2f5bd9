#include <volterra/charfun.hpp>
#include <volterra/fixtures.hpp>

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace volterra;
using Catch::Approx;

namespace {

KernelSpec random_kernel(std::mt19937_64& rng, std::size_t len) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> prefix(len);
    for (auto& p : prefix) p = u(rng);
    return KernelSpec::parametric(prefix, u(rng), 0.9 * u(rng));
}

// eigenvalues of the companion matrix of [1, c_1, ..., c_n]
std::vector<std::complex<double>> companion_roots(const std::vector<double>& desc) {
    const auto n = static_cast<Eigen::Index>(desc.size() - 1);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j) m(0, j) = -desc[static_cast<std::size_t>(j + 1)];
    for (Eigen::Index i = 1; i < n; ++i) m(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
    std::vector<std::complex<double>> out;
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(es.eigenvalues()[i]);
    return out;
}

std::vector<double> sorted_moduli(const std::vector<std::complex<double>>& z) {
    std::vector<double> m;
    for (const auto& w : z) m.push_back(std::abs(w));
    std::sort(m.begin(), m.end());
    return m;
}

// moduli drawn around the unit circle, at least one strictly outside
std::vector<cplx> random_roots(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> deg(1, 10);
    std::uniform_real_distribution<double> mod(0.05, 3.0);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    std::uniform_int_distribution<int> pick(0, 5);
    const auto n = static_cast<std::size_t>(deg(rng));
    std::vector<cplx> z;
    for (std::size_t i = 0; i < n; ++i) {
        double m = mod(rng);
        if (pick(rng) == 0) m = 1.0;  // exercise the unit-modulus case
        z.push_back(std::polar(m, angle(rng)));
    }
    z[0] = std::polar(1.0 + 2.0 * std::uniform_real_distribution<double>(0.01, 1.0)(rng), angle(rng));
    return z;
}

}  // namespace

TEST_CASE("partial_sum_eval examples", "[charfun]") {
    CHECK(partial_sum_eval(fixtures::renewal(), 7, 0.0) == cplx(1.0, 0.0));
    const auto first = partial_sum_eval(fixtures::double_root_stable(1.0), 2, 1.0);
    CHECK(first.real() == Approx(1.0 / 16.0).margin(1e-15));
    CHECK(first.imag() == 0.0);
    CHECK(std::abs(partial_sum_eval(fixtures::double_root_unstable(), 2, 0.5)) <= 1e-15);
    CHECK_THROWS(partial_sum_eval(fixtures::renewal(), 0, 0.5));
}

TEST_CASE("reversal identity s_n(z) = z^n p_n(1/z)", "[charfun]") {
    std::mt19937_64 rng(1);
    std::uniform_int_distribution<int> len(1, 12);
    std::uniform_real_distribution<double> lmod(std::log(0.1), std::log(10.0));
    std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
    for (int trial = 0; trial < 1000; ++trial) {
        const auto n = static_cast<std::size_t>(len(rng));
        const auto k = random_kernel(rng, 8);
        const cplx z = std::polar(std::exp(lmod(rng)), angle(rng));
        const auto s = partial_sum_eval(k, n, z);
        const std::complex<long double> zl(z);
        const auto rev = std::pow(zl, static_cast<int>(n)) * oracle::horner(pn_coefficients(k, n), 1.0L / zl);
        const double scale = std::max(1.0, std::pow(std::abs(z), static_cast<double>(n)));
        REQUIRE(std::abs(std::complex<long double>(s) - rev) <= 1e-10L * scale);
    }
}

TEST_CASE("pn_roots examples", "[charfun][roots]") {
    SECTION("double root 3/4") {
        const auto rs = pn_roots(fixtures::double_root_stable(1.0), 2);
        REQUIRE(rs.roots.size() == 2);
        for (const auto& z : rs.roots) CHECK(std::abs(z - 0.75) <= 1e-9);
        CHECK(std::fabs(rs.r_n - 0.75) <= 1e-9);
        CHECK(rs.r_upper() >= 0.75);
        CHECK(rs.r_upper() < 0.75 + 1e-6);
    }
    SECTION("double root 2") {
        const auto rs = pn_roots(fixtures::double_root_unstable(), 2);
        for (const auto& z : rs.roots) CHECK(std::abs(z - 2.0) <= 1e-9);
        CHECK(rs.r_n == Approx(2.0).margin(1e-9));
        CHECK(rs.r_lower() <= 2.0);
        CHECK(rs.r_lower() > 2.0 - 1e-6);
    }
    SECTION("six-term table") {
        const auto k = fixtures::six_term_stable();
        CHECK(std::fabs(pn_roots(k, 4).r_n - 0.913) <= 5e-4);
        CHECK(std::fabs(pn_roots(k, 5).r_n - 0.781) <= 5e-4);
        CHECK(std::fabs(pn_roots(k, 6).r_n - 0.667) <= 5e-4);
    }
    SECTION("p_1(z) = z") {
        const auto rs = pn_roots(KernelSpec::finite({0.0}), 1);
        REQUIRE(rs.roots.size() == 1);
        CHECK(rs.roots[0] == cplx(0.0, 0.0));
        CHECK(rs.r_n == 0.0);
    }
    SECTION("degree must be positive") { CHECK_THROWS(pn_roots(fixtures::renewal(), 0)); }
}

TEST_CASE("roots agree with companion-matrix eigenvalues", "[charfun][roots]") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> len(1, 24);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(len(rng));
        const auto k = random_kernel(rng, 24);
        const auto rs = pn_roots(k, n);
        const auto ours = sorted_moduli(rs.roots);
        const auto ref = sorted_moduli(companion_roots(pn_coefficients(k, n)));
        REQUIRE(ours.size() == ref.size());
        for (std::size_t i = 0; i < ours.size(); ++i) CHECK(ours[i] == Approx(ref[i]).margin(1e-6));
        CHECK(rs.residual_bound <= 1e-8);
    }
}

TEST_CASE("root re-expansion reproduces p_n", "[charfun][roots]") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> len(1, 32);
    for (int trial = 0; trial < 300; ++trial) {
        const auto n = static_cast<std::size_t>(len(rng));
        const auto k = random_kernel(rng, 32);
        const auto coeffs = pn_coefficients(k, n);
        const auto rs = pn_roots(k, n);
        REQUIRE(rs.roots.size() == n);
        double rmax = 0.0;
        for (const auto& z : rs.roots) rmax = std::max(rmax, std::abs(z));
        CHECK(rmax == rs.r_n);
        const auto rebuilt = poly::expand(rs.roots_extended);
        for (std::size_t i = 0; i <= n; ++i) {
            if (std::fabs(coeffs[i]) < 1e-12) continue;
            INFO("trial " << trial << " n " << n << " coefficient " << i);
            CHECK(std::abs(rebuilt[i] - std::complex<long double>(coeffs[i])) <= 1e-8L * std::fabs(coeffs[i]));
        }
    }
    // fast geometric tails: coefficients down to 1e-12 are still compared
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto n = static_cast<std::size_t>(len(rng));
        const auto k = KernelSpec::parametric({u(rng)}, u(rng), 0.02 * u(rng));
        const auto coeffs = pn_coefficients(k, n);
        const auto rebuilt = poly::expand(pn_roots(k, n).roots_extended);
        for (std::size_t i = 0; i <= n; ++i)
            if (std::fabs(coeffs[i]) >= 1e-12)
                REQUIRE(std::abs(rebuilt[i] - std::complex<long double>(coeffs[i])) <= 1e-8L * std::fabs(coeffs[i]));
    }
}

TEST_CASE("inclusion disks contain the companion eigenvalues", "[charfun][roots]") {
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<int> len(1, 16);
    for (int trial = 0; trial < 200; ++trial) {
        const auto n = static_cast<std::size_t>(len(rng));
        const auto k = random_kernel(rng, 16);
        const auto rs = pn_roots(k, n);
        for (const auto& e : companion_roots(pn_coefficients(k, n))) {
            bool inside = false;
            for (std::size_t i = 0; i < rs.inclusion_centers.size(); ++i)
                inside = inside || std::abs(e - rs.inclusion_centers[i]) <= rs.inclusion_radius[i] + 1e-10;
            CHECK(inside);
        }
        CHECK(rs.r_lower() <= rs.r_n);
        CHECK(rs.r_upper() >= rs.r_n);
    }
}

TEST_CASE("maximize_delta examples", "[charfun][delta]") {
    SECTION("roots {2, 2}") {
        const auto d = maximize_delta(root_set_from({2.0, 2.0}));
        CHECK(d.rho0 == Approx(1.0).margin(1e-12));
        CHECK(d.value == Approx(1.0).margin(1e-12));
    }
    SECTION("root {2}") {
        const auto d = maximize_delta(root_set_from({2.0}));
        CHECK(d.rho0 == Approx(1.0).margin(1e-12));
        CHECK(d.value == Approx(1.0).margin(1e-12));
    }
    SECTION("roots {2, 1/2}") {
        const auto d = maximize_delta(root_set_from({2.0, 0.5}));
        CHECK(d.rho0 == Approx(1.0).margin(1e-12));
        CHECK(d.value == Approx(0.5).margin(1e-12));
    }
    SECTION("requires r_n > 1") { CHECK_THROWS_AS(maximize_delta(root_set_from({0.5, 0.9})), DomainError); }
}

TEST_CASE("delta vanishes at 1/r_n", "[charfun][delta]") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rs = root_set_from(random_roots(rng));
        CHECK(delta_value(rs.moduli(), 1.0 / rs.r_n) <= 1e-12);
    }
}

TEST_CASE("maximize_delta beats a dense grid", "[charfun][delta]") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
        const auto rs = root_set_from(random_roots(rng));
        const auto d = maximize_delta(rs);
        const double grid = oracle::delta_grid_max(rs.moduli(), 1.0 / rs.r_n, 1.0, 100000);
        INFO("trial " << trial);
        CHECK(d.value >= grid - 1e-10);
        CHECK(d.rho0 >= 1.0 / rs.r_n);
        CHECK(d.rho0 <= 1.0);
        CHECK(d.value == Approx(oracle::delta(rs.moduli(), d.rho0)).epsilon(1e-12));
    }
}

TEST_CASE("e_bounds examples", "[charfun][ebound]") {
    const auto e1 = e_bounds(root_set_from({2.0, 2.0}));
    CHECK(e1.kind == EBoundKind::E1);
    CHECK(e1.value == Approx(1.0).margin(1e-15));
    const auto e2 = e_bounds(root_set_from({2.0, 0.5}));
    CHECK(e2.kind == EBoundKind::E2);
    CHECK(e2.value == Approx(0.25).margin(1e-15));
    const auto e3 = e_bounds(root_set_from({2.0, 1.0}));
    CHECK(e3.kind == EBoundKind::E3);
    CHECK(e3.rho == Approx(2.0 / 3.0).margin(1e-15));
    CHECK(e3.value == Approx(1.0 / 9.0).margin(1e-15));
    CHECK_THROWS_AS(e_bounds(root_set_from({0.5})), DomainError);
}

TEST_CASE("DeltaMax dominates the E bounds", "[charfun][ebound][delta]") {
    std::mt19937_64 rng(21);
    int violations = 0;
    int applicable = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto rs = root_set_from(random_roots(rng));
        const auto e = e_bounds(rs);
        if (e.kind == EBoundKind::NotApplicable) continue;
        ++applicable;
        if (maximize_delta(rs).value < e.value * (1.0 - 1e-12)) ++violations;
    }
    CHECK(applicable == 1000);
    CHECK(violations == 0);
}

TEST_CASE("circle_min_modulus examples", "[charfun][circle]") {
    SECTION("prefix [1/2]") {
        const auto m = circle_min_modulus(KernelSpec::finite({0.5}), 1, 64);
        CHECK(m.min_modulus == Approx(0.5).margin(1e-15));
        CHECK(m.theta == 0.0);
    }
    SECTION("half geometric: zero at theta = 0") {
        const auto m = circle_min_modulus(fixtures::half_geometric(), 20, 4096);
        CHECK(m.min_modulus <= 1e-5);
        CHECK(std::abs(m.point - 1.0) <= 1e-3);
    }
    SECTION("alternating cubic: zero at theta = pi") {
        const auto m = circle_min_modulus(fixtures::alternating_cubic(), 200, 4096);
        CHECK(m.min_modulus <= 1e-4);
        CHECK(std::fabs(m.theta - std::numbers::pi) <= 2e-3);
    }
    SECTION("grid too small") { CHECK_THROWS(circle_min_modulus(fixtures::half_geometric(), 20, 8)); }
}
