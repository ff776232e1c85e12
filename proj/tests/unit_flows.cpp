#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kdvlab/flows.hpp"
#include "kdvlab/functionals.hpp"
#include "kdvlab/rng.hpp"

using namespace kdvlab;

namespace {

std::vector<double> gaussian_state(int n, std::uint64_t seed) {
    RngStream rng(seed, 0);
    std::vector<double> u(static_cast<size_t>(n));
    for (double& x : u) x = rng.normal();
    return u;
}

GridField band_limited_noise(int n, int modes, std::uint64_t seed) {
    RngStream rng(seed, 0);
    SpectrumField s;
    s.n = n;
    s.coeffs.assign(static_cast<size_t>(n / 2 + 1), {0.0, 0.0});
    for (int k = 1; k <= modes; ++k)
        s.coeffs[static_cast<size_t>(k)] =
            std::complex<double>(rng.normal(), rng.normal()) / std::sqrt(2.0);
    return to_grid(s);
}

double sum_sq(const std::vector<double>& u) {
    double s = 0.0;
    for (double x : u) s += x * x;
    return s;
}

double max_abs_diff(const GridField& a, const GridField& b) {
    double worst = 0.0;
    for (int i = 0; i < a.n(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    return worst;
}

} // namespace

TEST_CASE("ZK vector field: stencil examples") {
    CHECK(zk_vector_field(std::vector<double>(8, 0.0)) == std::vector<double>(8, 0.0));
    // constant: first factor multiplies a zero difference, second telescopes
    const auto bc = zk_vector_field(std::vector<double>(8, 2.5));
    for (double x : bc) CHECK(x == 0.0);

    std::vector<double> impulse(9, 0.0);
    impulse[0] = 1.0;
    const auto b = zk_vector_field(impulse);
    CHECK(b[0] == 0.0);
    CHECK(b[1] == -3.0);
    CHECK(b[2] == 1.0);
    for (size_t i = 3; i + 2 < b.size(); ++i) CHECK(b[i] == 0.0);
    CHECK(b[b.size() - 2] == -1.0);
    CHECK(b.back() == 3.0);

    CHECK_THROWS_AS(zk_vector_field(std::vector<double>{1, 2, 3, 4}), TooShort);
}

TEST_CASE("ZK conserves sum u^2 and is divergence-free") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const std::vector<double> u = gaussian_state(64, seed);
        const std::vector<double> b = zk_vector_field(u);
        double dot = 0.0;
        for (size_t i = 0; i < u.size(); ++i) dot += u[i] * b[i];
        CHECK(std::abs(dot) < 1e-12 * sum_sq(u));
        CHECK(std::abs(zk_divergence(u)) < 1e-12);
    }
    CHECK(zk_divergence(std::vector<double>(16, 0.0)) == 0.0);
}

TEST_CASE("ZK divergence agrees with the finite-difference oracle") {
    const std::vector<double> u = gaussian_state(64, 3);
    const double eps = 1e-6;
    double fd = 0.0;
    std::vector<double> w = u;
    for (size_t i = 0; i < u.size(); ++i) {
        w[i] = u[i] + eps;
        const double fp = zk_vector_field(w)[i];
        w[i] = u[i] - eps;
        const double fm = zk_vector_field(w)[i];
        w[i] = u[i];
        fd += (fp - fm) / (2 * eps);
    }
    CHECK(std::abs(fd - zk_divergence(u)) < 1e-4);
}

TEST_CASE("alpha lattice: alpha = 0 is the pure linear stencil") {
    const std::vector<double> u = gaussian_state(32, 1);
    const auto b = alpha_vector_field(u, 0.0);
    const size_t n = u.size();
    for (size_t i = 0; i < n; ++i) {
        const double expect = u[(i + n - 2) % n] - 2 * u[(i + n - 1) % n] +
                              2 * u[(i + 1) % n] - u[(i + 2) % n];
        CHECK(b[i] == doctest::Approx(expect).epsilon(1e-14));
    }
    const auto z = alpha_vector_field(std::vector<double>(16, 0.0), 0.7);
    for (double x : z) CHECK(x == 0.0);
}

TEST_CASE("alpha lattice conserves Q along the field") {
    for (double alpha : {0.05, 0.1, 0.3}) {
        const std::vector<double> u = gaussian_state(32, 17);
        const auto b = alpha_vector_field(u, alpha);
        double qdot = 0.0, scale = 0.0;
        const size_t n = u.size();
        for (size_t i = 0; i < n; ++i) {
            const double grad = 2 * u[i] + 2 * u[(i + 1) % n] + 2 * u[(i + n - 1) % n];
            qdot += grad * b[i];
            scale += std::abs(grad * b[i]);
        }
        CHECK(std::abs(qdot) < 1e-10 * scale);
    }
}

TEST_CASE("implicit midpoint: fixed point and quadratic invariants") {
    auto zero = [](std::span<const double>) { return std::vector<double>(4, 0.0); };
    CHECK(implicit_midpoint_step(std::vector<double>(4, 0.0), zero, 0.1) ==
          std::vector<double>(4, 0.0));

    // planar rotation: energy conserved to round-off each step
    auto rot = [](std::span<const double> u) { return std::vector<double>{-u[1], u[0]}; };
    std::vector<double> v{1.0, 0.0};
    for (int s = 0; s < 200; ++s) {
        v = implicit_midpoint_step(v, rot, 0.05, 1e-14, 80);
        CHECK(std::abs(v[0] * v[0] + v[1] * v[1] - 1.0) < 1e-13);
    }

    // ZK: per-step sum u^2 conservation at tolerance scale
    std::vector<double> u = gaussian_state(64, 5);
    auto zk = [](std::span<const double> w) { return zk_vector_field(w); };
    const double s0 = sum_sq(u);
    for (int s = 0; s < 50; ++s) {
        const double before = sum_sq(u);
        u = implicit_midpoint_step(u, zk, 1e-3);
        CHECK(std::abs(sum_sq(u) - before) < 1e-10 * before);
    }
    CHECK(std::abs(sum_sq(u) - s0) < 1e-9 * s0);
}

TEST_CASE("implicit midpoint reports non-contraction") {
    // rotation with dt = 3: the fixed-point map has spectral radius 1.5
    auto rot = [](std::span<const double> u) { return std::vector<double>{-u[1], u[0]}; };
    CHECK_THROWS_AS(implicit_midpoint_step(std::vector<double>{1.0, 0.0}, rot, 3.0, 1e-12, 50),
                    NoConvergence);
}

TEST_CASE("airy flow: identity, single mode, moduli, group property") {
    const int n = 64;
    const GridField f = band_limited_noise(n, 12, 4);
    CHECK(max_abs_diff(airy_evolve(f, 0.0), f) < 1e-13);

    const double t = 3.7e-4;
    const GridField c = field_from(n, [](double x) { return std::cos(2 * M_PI * x); });
    const GridField ct = airy_evolve(c, t);
    const double w3 = std::pow(2 * M_PI, 3) * t;
    for (int i = 0; i < n; ++i)
        CHECK(ct[i] == doctest::Approx(std::cos(2 * M_PI * ct.grid.x(i) + w3)).epsilon(1e-12));

    CHECK(std::abs(h1(airy_evolve(f, 0.013)) - h1(f)) < 1e-14 * h1(f));

    const GridField two_steps = airy_evolve(airy_evolve(f, 1.3e-3), 2.9e-3);
    CHECK(max_abs_diff(two_steps, airy_evolve(f, 4.2e-3)) < 1e-11);
}

TEST_CASE("mKdV step leaves constants unchanged") {
    const GridField c = field_from(32, [](double) { return 0.8; });
    CHECK(max_abs_diff(mkdv_step(c, 1e-4), c) < 1e-14);
}

TEST_CASE("small-amplitude KdV step is the Airy step to O(a^2)") {
    const int n = 64;
    const double a = 1e-4, dt = 1e-3;
    const GridField u = field_from(n, [a](double x) { return a * std::sin(2 * M_PI * x); });
    const double diff = max_abs_diff(kdv_step(u, dt), airy_evolve(u, dt));
    // nonlinear term 3 (u^2)_x has amplitude 2 pi a^2, acting for time dt
    CHECK(diff < 10.0 * 2 * M_PI * a * a * dt);
    CHECK(diff > 0.0);
}

TEST_CASE("Strang splitting is second order (step halving)") {
    const int n = 128;
    const double T = 0.005;
    const GridField u0 = field_from(n, [](double x) { return std::sin(2 * M_PI * x); });
    auto run = [&](double dt) {
        GridField u = u0;
        const long steps = std::lround(T / dt);
        for (long s = 0; s < steps; ++s) u = mkdv_step(u, dt);
        return u;
    };
    const GridField a = run(4e-5), b = run(2e-5), c = run(1e-5);
    const double e_coarse = max_abs_diff(a, b);
    const double e_fine = max_abs_diff(b, c);
    CHECK(e_coarse / e_fine == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("spectral steps preserve the mean and guard the step size") {
    const GridField u = band_limited_noise(128, 16, 8);
    GridField shifted = u;
    for (double& x : shifted.v) x += 0.4;
    const double m0 = quadrature_mean(shifted);
    GridField v = shifted;
    for (int s = 0; s < 20; ++s) v = kdv_step(v, 2e-6);
    CHECK(std::abs(quadrature_mean(v) - m0) < 1e-13);

    CHECK_THROWS_AS(kdv_step(u, 5e-3), StepTooLarge); // far beyond the CFL scale
}

TEST_CASE("viscous Burgers: constants, exact diffusion, mean preservation") {
    const GridField c = field_from(32, [](double) { return 1.7; });
    CHECK(max_abs_diff(burgers_viscous_step(c, 1e-3, 1e-3), c) < 1e-14);

    // amplitude -> 0: the k-th mode must decay by exactly exp(-eps (2 pi k)^2 t)
    const int n = 64, k = 3;
    const double a = 1e-8, eps = 1e-2, dt = 1e-3;
    GridField u = field_from(n, [k, a](double x) { return a * std::cos(2 * M_PI * k * x); });
    for (int s = 0; s < 10; ++s) u = burgers_viscous_step(u, dt, eps);
    const double decay = std::exp(-eps * std::pow(2 * M_PI * k, 2) * 10 * dt);
    for (int i = 0; i < n; ++i)
        CHECK(u[i] == doctest::Approx(a * decay * std::cos(2 * M_PI * k * u.grid.x(i)))
                          .epsilon(1e-10));

    GridField w = band_limited_noise(128, 16, 10);
    const double m0 = quadrature_mean(w);
    for (int s = 0; s < 10; ++s) w = burgers_viscous_step(w, 5e-5, 1e-3);
    CHECK(std::abs(quadrature_mean(w) - m0) < 1e-12);
}

TEST_CASE("flow spec validation") {
    FlowSpec s = FlowSpec::zk(1e-3);
    s.alpha = 0.2;
    CHECK_THROWS_AS(s.validate(), ConfigInvalid);
    FlowSpec b = FlowSpec::burgers(0.0, 1e-3);
    CHECK_THROWS_AS(b.validate(), ConfigInvalid);
    FlowSpec k = FlowSpec::kdv(1e-4);
    k.integrator = Integrator::Rk4;
    CHECK_THROWS_AS(k.validate(), ConfigInvalid);
    CHECK_NOTHROW(FlowSpec::mkdv(1e-5).validate());
}

TEST_CASE("evolve: t = 0 returns the input, diagnostics track invariants") {
    const GridField u0{TorusGrid::make(64), gaussian_state(64, 12)};
    const EvolveResult r0 = evolve(u0, FlowSpec::zk(1e-3), 0.0);
    CHECK(r0.state.v == u0.v);
    CHECK(r0.diagnostics.times.size() == 1);

    const EvolveResult r = evolve(u0, FlowSpec::zk(1e-3), 1.0);
    CHECK(r.diagnostics.relative_drift("sum_sq") < 1e-8);

    const EvolveResult ra = evolve(u0, FlowSpec::alpha_lattice(0.1, 1e-3), 1.0);
    CHECK(ra.diagnostics.relative_drift("lattice_q") < 1e-8);

    // rk4 runs too (for speed comparisons), with visibly worse conservation
    FlowSpec fast = FlowSpec::zk(1e-3);
    fast.integrator = Integrator::Rk4;
    const EvolveResult rr = evolve(u0, fast, 1.0);
    CHECK(rr.diagnostics.relative_drift("sum_sq") < 1e-6);
    CHECK(rr.diagnostics.relative_drift("sum_sq") > r.diagnostics.relative_drift("sum_sq"));
}

TEST_CASE("evolve: mKdV conserves the K product on a short run") {
    const GridField phi0 = field_from(128, [](double x) { return std::sin(2 * M_PI * x); });
    const EvolveResult r = evolve(phi0, FlowSpec::mkdv(1e-5), 0.01);
    CHECK(r.diagnostics.relative_drift("k_product") < 1e-7);
    CHECK(r.diagnostics.relative_drift("h1") < 1e-10);
    CHECK(r.diagnostics.relative_drift("hamiltonian") < 1e-7);
    // the anchored functionals drift visibly even here
    CHECK(r.diagnostics.relative_drift("k_plus") > 1e-5);
}

TEST_CASE("Miura intertwining holds in the shifted frame (small run)") {
    const int n = 128;
    const double T = 0.01, dt = 5e-6;
    const GridField phi0 = field_from(n, [](double x) { return std::sin(2 * M_PI * x); });
    const double c = h1(phi0);

    const GridField phiT = evolve(phi0, FlowSpec::mkdv(dt), T).state;
    const GridField via_mkdv = miura(phiT);
    const GridField uT = evolve(miura(phi0), FlowSpec::kdv(dt), T).state;
    const GridField matched = shift(uT, 6.0 * c * T);

    auto rel_l2 = [](const GridField& a, const GridField& b) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < a.n(); ++i) {
            num += (a[i] - b[i]) * (a[i] - b[i]);
            den += a[i] * a[i];
        }
        return std::sqrt(num / den);
    };
    CHECK(rel_l2(via_mkdv, matched) < 1e-4);
    CHECK(rel_l2(via_mkdv, uT) > 1e-2); // the unshifted frame does not match
}
