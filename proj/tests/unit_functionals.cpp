#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kdvlab/functionals.hpp"
#include "kdvlab/rng.hpp"
#include "oracles.hpp"

using namespace kdvlab;

namespace {

// Frozen against the adaptive-quadrature oracle on the closed-form
// integrands (the same values fall out of e^{+-1/pi} I0(1/pi)).
constexpr double kKsin = 1.40984752281793;
constexpr double kKmsin = 0.745919037364208;
constexpr double kJsin = 0.475401680959373;

GridField sin_field(int n) {
    return field_from(n, [](double x) { return std::sin(2 * M_PI * x); });
}

GridField random_meanzero(int n, std::uint64_t seed, int kmax, double amp_decay = 0.3) {
    RngStream rng(seed, 23);
    SpectrumField s;
    s.n = n;
    s.coeffs.assign(static_cast<size_t>(n / 2 + 1), {0.0, 0.0});
    for (int k = 1; k <= kmax; ++k) {
        const double amp = std::exp(-amp_decay * k);
        s.coeffs[static_cast<size_t>(k)] =
            std::complex<double>(amp * rng.normal(), amp * rng.normal());
    }
    return to_grid(s);
}

GridField sup_normalized(GridField phi) {
    double sup = 0.0;
    for (double x : phi.v) sup = std::max(sup, std::abs(x));
    for (double& x : phi.v) x /= sup;
    return phi;
}

} // namespace

TEST_CASE("K of the zero field is one") {
    CHECK(k_functional(zero_field(32), +1) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(k_functional(zero_field(32), -1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("K(sin) against the quadrature oracle") {
    // independent oracle: adaptive Simpson on exp((1 - cos 2 pi x)/pi)
    const double ref = oracle::integrate(
        [](double x) { return std::exp((1.0 - std::cos(2 * M_PI * x)) / M_PI); }, 0.0, 1.0);
    CHECK(ref == doctest::Approx(kKsin).epsilon(1e-11));
    CHECK(k_functional(sin_field(4096), +1) == doctest::Approx(kKsin).epsilon(1e-11));
    CHECK(k_functional(sin_field(256), +1) == doctest::Approx(kKsin).epsilon(1e-11));

    // K(-sin) differs from K(sin): the anchored antiderivative picks up the
    // half-period constant, K(-sin) = e^{-2/pi} K(sin)
    const double refm = oracle::integrate(
        [](double x) { return std::exp(-(1.0 - std::cos(2 * M_PI * x)) / M_PI); }, 0.0, 1.0);
    CHECK(refm == doctest::Approx(kKmsin).epsilon(1e-11));
    CHECK(k_functional(sin_field(256), -1) == doctest::Approx(kKmsin).epsilon(1e-11));
    CHECK(k_functional(sin_field(256), -1) ==
          doctest::Approx(std::exp(-2.0 / M_PI) * k_functional(sin_field(256), +1)).epsilon(1e-12));
}

TEST_CASE("K obeys the Jensen lower bound") {
    // K(phi, s) = int e^{2 s Phi} >= exp(2 s mean(Phi)). Phi is anchored at
    // Phi(0) = 0, not mean-zero, so K itself can drop below 1: K(-sin) =
    // e^{-1/pi} I0(1/pi) < 1 already does.
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const GridField phi = random_meanzero(64, seed, 12);
        const double mean_Phi = quadrature_mean(antiderivative_from_zero(phi));
        CHECK(k_functional(phi, +1) >= std::exp(2.0 * mean_Phi) - 1e-14);
        CHECK(k_functional(phi, -1) >= std::exp(-2.0 * mean_Phi) - 1e-14);
        CHECK(k_functional(phi, +1) > 0.0);
        CHECK(k_functional(phi, -1) > 0.0);
    }
}

TEST_CASE("K continuity bound") {
    // |K(phi) - K(psi)| <= e^{2 |phi|_2} (e^{2 |psi - phi|_2} - 1)
    for (int trial = 0; trial < 20; ++trial) {
        const GridField phi = random_meanzero(64, 100 + trial, 10);
        GridField psi = random_meanzero(64, 200 + trial, 10);
        for (int i = 0; i < 64; ++i) psi[i] = phi[i] + 0.1 * psi[i];
        GridField diff = psi;
        for (int i = 0; i < 64; ++i) diff[i] -= phi[i];
        const double lhs = std::abs(k_functional(phi) - k_functional(psi));
        const double rhs = std::exp(2.0 * l2_norm(phi)) * (std::exp(2.0 * l2_norm(diff)) - 1.0);
        CHECK(lhs <= rhs);
    }
}

TEST_CASE("K requires mean-zero input") {
    CHECK_THROWS_AS(k_functional(field_from(16, [](double) { return 0.5; })), NonZeroMean);
    CHECK_THROWS_AS(j_weight(field_from(16, [](double) { return 0.5; })), NonZeroMean);
}

TEST_CASE("J of the zero field is (2 pi)^{-1/2}") {
    CHECK(j_weight(zero_field(64)) == doctest::Approx(0.3989422804014327).epsilon(1e-13));
}

TEST_CASE("J(sin) against the frozen oracle value") {
    // J = (2 pi)^{-1/2} K(sin) K(-sin) e^{1/8}; int sin^2 = 1/2
    CHECK(j_weight(sin_field(256)) == doctest::Approx(kJsin).epsilon(1e-11));
    CHECK(kJsin ==
          doctest::Approx(0.3989422804014327 * kKsin * kKmsin * std::exp(0.125)).epsilon(1e-12));
}

TEST_CASE("J is symmetric under phi -> -phi") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GridField phi = random_meanzero(64, seed, 10);
        GridField neg = phi;
        for (double& x : neg.v) x = -x;
        CHECK(j_weight(phi) == doctest::Approx(j_weight(neg)).epsilon(1e-12));
    }
}

TEST_CASE("j_weight overflows loudly") {
    // amplitude far outside the realistic support of P0
    GridField huge = sin_field(64);
    for (double& x : huge.v) x *= 2000.0;
    CHECK_THROWS_AS(j_weight(huge), Overflow);
}

TEST_CASE("Miura transform of trig fields") {
    const int n = 32;
    for (double v : miura(zero_field(n)).v) CHECK(v == 0.0);

    const GridField m = miura(sin_field(n));
    for (int i = 0; i < n; ++i) {
        const double x = m.grid.x(i);
        CHECK(m[i] == doctest::Approx(2 * M_PI * std::cos(2 * M_PI * x) -
                                      0.5 * std::cos(4 * M_PI * x))
                          .epsilon(1e-10));
    }
}

TEST_CASE("Miura output is mean-zero") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const GridField out = miura(random_meanzero(64, seed, 15));
        CHECK(std::abs(quadrature_mean(out)) < 1e-12);
    }
}

TEST_CASE("mKdV Hamiltonian") {
    CHECK(hamiltonian_mkdv(zero_field(32)) == 0.0);
    CHECK(hamiltonian_mkdv(sin_field(64)) ==
          doctest::Approx(3.0 / 16.0 + M_PI * M_PI).epsilon(1e-12));
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        CHECK(hamiltonian_mkdv(random_meanzero(64, seed, 12)) >= 0.0);
}

TEST_CASE("h1 and e3") {
    CHECK(h1(zero_field(32)) == 0.0);
    CHECK(e3(zero_field(32)) == 0.0);
    CHECK(h1(sin_field(64)) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK(e3(sin_field(64)) == doctest::Approx(M_PI * M_PI).epsilon(1e-12));

    // homogeneity of h1
    const GridField u = random_meanzero(64, 3, 12);
    GridField cu = u;
    for (double& x : cu.v) x *= -2.5;
    CHECK(h1(cu) == doctest::Approx(6.25 * h1(u)).epsilon(1e-13));
}

TEST_CASE("lattice Q witnesses") {
    CHECK(lattice_q(std::vector<double>{0, 0, 0, 0, 0}) == 0.0);
    CHECK(lattice_q(std::vector<double>{1, -1, 1, -1}) == doctest::Approx(-4.0));
    CHECK(lattice_q(std::vector<double>{1, 1, 1, 1}) == doctest::Approx(12.0));
    CHECK_THROWS_AS(lattice_q(std::vector<double>{1, 2}), TooShort);
}

TEST_CASE("Jacobian determinant is one at phi = 0") {
    CHECK(miura_jacobian_det(zero_field(32)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Jacobian determinant is invariant under phi -> -phi") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const GridField phi = sup_normalized(random_meanzero(64, seed, 8, 0.5));
        GridField neg = phi;
        for (double& x : neg.v) x = -x;
        const double d = miura_jacobian_det(phi);
        CHECK(std::abs(miura_jacobian_det(neg) - d) / std::abs(d) < 1e-10);
    }
}

TEST_CASE("Jacobian linearization matches finite differences of the map") {
    // directional derivative of mu at phi equals v_x + 2(phi v - int phi v)
    const int n = 64;
    const GridField phi = random_meanzero(n, 4, 6, 0.5);
    const GridField v = random_meanzero(n, 9, 6, 0.5);
    const double eps = 1e-6;
    GridField up = phi, dn = phi;
    for (int i = 0; i < n; ++i) {
        up[i] += eps * v[i];
        dn[i] -= eps * v[i];
    }
    const GridField mu_up = miura(up), mu_dn = miura(dn);
    GridField lin = spectral_derivative(v);
    GridField pv = v;
    for (int i = 0; i < n; ++i) pv[i] *= phi[i];
    const double pm = quadrature_mean(pv);
    for (int i = 0; i < n; ++i) lin[i] += 2.0 * (pv[i] - pm);
    for (int i = 0; i < n; ++i) {
        const double fd = (mu_up[i] - mu_dn[i]) / (2.0 * eps);
        CHECK(fd == doctest::Approx(lin[i]).epsilon(1e-7));
    }
}

TEST_CASE("Jacobian ratio to K(phi)K(-phi) is constant across smooth fields") {
    // small version of the E5 run: 8 fields, n = 64
    std::vector<double> ratios;
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const GridField phi = sup_normalized(random_meanzero(64, 300 + seed, 8, 0.5));
        ratios.push_back(miura_jacobian_det(phi) /
                         (k_functional(phi, +1) * k_functional(phi, -1)));
    }
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    CHECK((*hi - *lo) / *lo < 1e-3);
}
