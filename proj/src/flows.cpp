#include "kdvlab/flows.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "kdvlab/functionals.hpp"

namespace kdvlab {

std::string to_string(FlowKind k) {
    switch (k) {
        case FlowKind::ZkLattice: return "zk_lattice";
        case FlowKind::AlphaLattice: return "alpha_lattice";
        case FlowKind::Airy: return "airy";
        case FlowKind::Kdv: return "kdv";
        case FlowKind::Mkdv: return "mkdv";
        case FlowKind::BurgersViscous: return "burgers_viscous";
    }
    return "?";
}

void FlowSpec::validate() const {
    if (dt <= 0.0) throw ConfigInvalid("dt must be positive");
    if (fixed_point_tol <= 0.0) throw ConfigInvalid("fixed_point_tol must be positive");
    if (max_fixed_point_iters < 1) throw ConfigInvalid("max_fixed_point_iters must be >= 1");
    if (alpha != 0.0 && kind != FlowKind::AlphaLattice)
        throw ConfigInvalid("alpha is only meaningful for the alpha lattice");
    if (epsilon != 0.0 && kind != FlowKind::BurgersViscous)
        throw ConfigInvalid("epsilon is only meaningful for viscous Burgers");
    if (kind == FlowKind::BurgersViscous && epsilon <= 0.0)
        throw ConfigInvalid("viscous Burgers needs epsilon > 0");
    switch (kind) {
        case FlowKind::ZkLattice:
        case FlowKind::AlphaLattice:
            if (integrator != Integrator::ImplicitMidpoint && integrator != Integrator::Rk4)
                throw ConfigInvalid("lattice flows use implicit_midpoint or rk4");
            break;
        case FlowKind::Airy:
            if (integrator != Integrator::Exact) throw ConfigInvalid("airy is integrated exactly");
            break;
        default:
            if (integrator != Integrator::SplitstepEtd)
                throw ConfigInvalid("spectral flows use splitstep_etd");
    }
}

FlowSpec FlowSpec::zk(double dt) {
    return FlowSpec{FlowKind::ZkLattice, 0.0, 0.0, dt, Integrator::ImplicitMidpoint, 1e-12, 50, 1e-6};
}
FlowSpec FlowSpec::alpha_lattice(double alpha, double dt) {
    return FlowSpec{FlowKind::AlphaLattice, alpha, 0.0, dt, Integrator::ImplicitMidpoint, 1e-12, 50, 1e-6};
}
FlowSpec FlowSpec::airy() {
    return FlowSpec{FlowKind::Airy, 0.0, 0.0, 1.0, Integrator::Exact, 1e-12, 50, 1e-6};
}
FlowSpec FlowSpec::kdv(double dt) {
    return FlowSpec{FlowKind::Kdv, 0.0, 0.0, dt, Integrator::SplitstepEtd, 1e-12, 50, 1e-6};
}
FlowSpec FlowSpec::mkdv(double dt) {
    return FlowSpec{FlowKind::Mkdv, 0.0, 0.0, dt, Integrator::SplitstepEtd, 1e-12, 50, 1e-6};
}
FlowSpec FlowSpec::burgers(double epsilon, double dt) {
    return FlowSpec{FlowKind::BurgersViscous, 0.0, epsilon, dt, Integrator::SplitstepEtd, 1e-12, 50, 1e-6};
}

std::vector<double> zk_vector_field(std::span<const double> u) {
    const size_t n = u.size();
    if (n < 5) throw TooShort("zk_vector_field needs length >= 5");
    std::vector<double> b(n);
    for (size_t i = 0; i < n; ++i) {
        const double up1 = u[(i + 1) % n], up2 = u[(i + 2) % n];
        const double um1 = u[(i + n - 1) % n], um2 = u[(i + n - 2) % n];
        b[i] = (up1 + u[i] + um1) * (up1 - um1) - (up2 - 2.0 * up1 + 2.0 * um1 - um2);
    }
    return b;
}

double zk_divergence(std::span<const double> u) {
    const size_t n = u.size();
    if (n < 5) throw TooShort("zk_divergence needs length >= 5");
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += u[(i + 1) % n] - u[(i + n - 1) % n];
    return acc;
}

std::vector<double> alpha_vector_field(std::span<const double> u, double alpha) {
    const size_t n = u.size();
    if (n < 5) throw TooShort("alpha_vector_field needs length >= 5");
    std::vector<double> b(n);
    for (size_t i = 0; i < n; ++i) {
        const double up1 = u[(i + 1) % n], up2 = u[(i + 2) % n];
        const double um1 = u[(i + n - 1) % n], um2 = u[(i + n - 2) % n];
        const double inner = -alpha * um1 * (um2 - u[i])
                             - alpha * (um1 + 2.0 * u[i] + up1) * (um1 - up1)
                             - alpha * up1 * (u[i] - up2)
                             + um2 - 2.0 * um1 + 2.0 * up1 - up2;
        b[i] = (1.0 - alpha * u[i]) * inner;
    }
    return b;
}

std::vector<double> implicit_midpoint_step(std::span<const double> u, const LatticeField& b,
                                           double dt, double tol, int max_iters) {
    const size_t n = u.size();
    std::vector<double> next(u.begin(), u.end());
    std::vector<double> mid(n);
    for (int it = 0; it < max_iters; ++it) {
        for (size_t i = 0; i < n; ++i) mid[i] = 0.5 * (u[i] + next[i]);
        const std::vector<double> f = b(mid);
        double delta = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double v = u[i] + dt * f[i];
            delta = std::max(delta, std::abs(v - next[i]));
            next[i] = v;
        }
        if (delta <= tol) return next;
    }
    throw NoConvergence(max_iters);
}

std::vector<double> rk4_lattice_step(std::span<const double> u, const LatticeField& b, double dt) {
    const size_t n = u.size();
    auto stage = [&](const std::vector<double>& k, double c) {
        std::vector<double> v(n);
        for (size_t i = 0; i < n; ++i) v[i] = u[i] + c * dt * k[i];
        return v;
    };
    const std::vector<double> k1 = b(u);
    const std::vector<double> k2 = b(stage(k1, 0.5));
    const std::vector<double> k3 = b(stage(k2, 0.5));
    const std::vector<double> k4 = b(stage(k3, 1.0));
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i)
        out[i] = u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

SpectrumField airy_evolve(const SpectrumField& s, double t) {
    SpectrumField out = s;
    for (int k = 1; k < s.n / 2; ++k) {
        const double w = 2.0 * M_PI * k;
        const double th = w * w * w * t;
        out.coeffs[static_cast<size_t>(k)] *= std::complex<double>(std::cos(th), std::sin(th));
    }
    return out;
}

GridField airy_evolve(const GridField& f, double t) {
    return to_grid(airy_evolve(to_spectrum(f), t));
}

namespace {

// factor * d/dx dealias(u^power); exactly mean-zero.
GridField nonlinear_derivative(const GridField& u, int power, double factor) {
    GridField w = u;
    for (double& x : w.v) {
        double p = x;
        for (int q = 1; q < power; ++q) p *= x;
        x = p;
    }
    SpectrumField s = dealias_23(to_spectrum(w));
    const int n = u.n();
    s.coeffs[0] = 0.0;
    for (int k = 1; k < n / 2; ++k)
        s.coeffs[static_cast<size_t>(k)] *= std::complex<double>(0.0, factor * 2.0 * M_PI * k);
    s.coeffs[static_cast<size_t>(n / 2)] = 0.0;
    GridField out = to_grid(s);
    const double m = quadrature_mean(out);
    for (double& x : out.v) x -= m;
    return out;
}

GridField rk4_spectral(const GridField& u, double dt, int power, double factor) {
    auto rhs = [&](const GridField& v) { return nonlinear_derivative(v, power, factor); };
    auto stage = [&](const GridField& k, double c) {
        GridField v = u;
        for (int i = 0; i < u.n(); ++i) v[i] += c * dt * k[i];
        return v;
    };
    const GridField k1 = rhs(u);
    const GridField k2 = rhs(stage(k1, 0.5));
    const GridField k3 = rhs(stage(k2, 0.5));
    const GridField k4 = rhs(stage(k3, 1.0));
    GridField out = u;
    for (int i = 0; i < u.n(); ++i)
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    return out;
}

GridField strang_step(const GridField& u, double dt, int power, double factor,
                      double h1_drift_tol, const char* what) {
    const double h1_before = h1(u);
    GridField v = airy_evolve(u, 0.5 * dt);
    v = rk4_spectral(v, dt, power, factor);
    v = airy_evolve(v, 0.5 * dt);
    const double h1_after = h1(v);
    if (h1_before > 0.0 && std::abs(h1_after - h1_before) > h1_drift_tol * h1_before)
        throw StepTooLarge(std::string(what) + ": per-step h1 drift " +
                           std::to_string(std::abs(h1_after - h1_before) / h1_before));
    return v;
}

} // namespace

GridField kdv_step(const GridField& u, double dt, double h1_drift_tol) {
    // u_t = 6 u u_x = 3 (u^2)_x
    return strang_step(u, dt, 2, 3.0, h1_drift_tol, "kdv_step");
}

GridField mkdv_step(const GridField& phi, double dt, double h1_drift_tol) {
    // phi_t = 6 phi^2 phi_x = 2 (phi^3)_x
    return strang_step(phi, dt, 3, 2.0, h1_drift_tol, "mkdv_step");
}

GridField burgers_viscous_step(const GridField& u, double dt, double epsilon,
                               double h1_growth_tol) {
    if (epsilon <= 0.0) throw ConfigInvalid("burgers_viscous_step needs epsilon > 0");
    const int n = u.n();
    auto half_diffusion = [&](const GridField& f) {
        SpectrumField s = to_spectrum(f);
        for (int k = 1; k <= n / 2; ++k) {
            const double w = 2.0 * M_PI * k;
            s.coeffs[static_cast<size_t>(k)] *= std::exp(-epsilon * w * w * 0.5 * dt);
        }
        return to_grid(s);
    };
    const double h1_before = h1(u);
    GridField v = half_diffusion(u);
    v = rk4_spectral(v, dt, 2, 1.0); // u_t = 2 u u_x = (u^2)_x
    v = half_diffusion(v);
    const double h1_after = h1(v);
    if (h1_before > 0.0 && h1_after - h1_before > h1_growth_tol * h1_before)
        throw StepTooLarge("burgers_viscous_step: h1 grew by " +
                           std::to_string((h1_after - h1_before) / h1_before));
    return v;
}

void Diagnostics::append(double t, const std::vector<double>& values) {
    times.push_back(t);
    rows.push_back(values);
}

void Diagnostics::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out << "t,invariant,value\n";
    char buf[32];
    for (size_t c = 0; c < times.size(); ++c) {
        for (size_t j = 0; j < names.size(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", times[c]);
            out << buf << ',' << names[j] << ',';
            std::snprintf(buf, sizeof(buf), "%.17g", rows[c][j]);
            out << buf << '\n';
        }
    }
}

double Diagnostics::initial(const std::string& name) const {
    for (size_t j = 0; j < names.size(); ++j)
        if (names[j] == name) return rows.front()[j];
    throw Error("no invariant named " + name);
}

double Diagnostics::relative_drift(const std::string& name) const {
    for (size_t j = 0; j < names.size(); ++j) {
        if (names[j] != name) continue;
        const double x0 = rows.front()[j];
        const double scale = std::max(std::abs(x0), 1e-300);
        double worst = 0.0;
        for (const auto& row : rows) worst = std::max(worst, std::abs(row[j] - x0));
        return worst / scale;
    }
    throw Error("no invariant named " + name);
}

namespace {

std::vector<std::string> invariant_names(FlowKind kind) {
    switch (kind) {
        case FlowKind::ZkLattice: return {"sum_sq"};
        case FlowKind::AlphaLattice: return {"lattice_q"};
        case FlowKind::Airy:
        case FlowKind::Kdv: return {"mean", "h1", "e3"};
        case FlowKind::Mkdv: return {"mean", "h1", "k_plus", "k_minus", "k_product", "hamiltonian"};
        case FlowKind::BurgersViscous: return {"mean", "h1"};
    }
    return {};
}

std::vector<double> invariant_values(FlowKind kind, double alpha, const GridField& f) {
    (void)alpha;
    switch (kind) {
        case FlowKind::ZkLattice: {
            double s = 0.0;
            for (double x : f.v) s += x * x;
            return {s};
        }
        case FlowKind::AlphaLattice:
            return {lattice_q(f.v)};
        case FlowKind::Airy:
        case FlowKind::Kdv:
            return {quadrature_mean(f), h1(f), e3(f)};
        case FlowKind::Mkdv: {
            const double kp = k_functional(f, +1);
            const double km = k_functional(f, -1);
            return {quadrature_mean(f), h1(f), kp, km, kp * km, hamiltonian_mkdv(f)};
        }
        case FlowKind::BurgersViscous:
            return {quadrature_mean(f), h1(f)};
    }
    return {};
}

} // namespace

EvolveResult evolve(const GridField& state, const FlowSpec& spec, double t_final,
                    int checkpoints) {
    spec.validate();
    if (t_final < 0.0) throw ConfigInvalid("t_final must be >= 0");

    EvolveResult r{state, {}};
    r.diagnostics.names = invariant_names(spec.kind);
    r.diagnostics.append(0.0, invariant_values(spec.kind, spec.alpha, state));
    if (t_final == 0.0) return r;

    long nsteps;
    double dt;
    if (spec.kind == FlowKind::Airy) {
        nsteps = 1; // exact flow, one application
        dt = t_final;
    } else {
        nsteps = std::max(1L, std::lround(std::ceil(t_final / spec.dt - 1e-9)));
        dt = t_final / static_cast<double>(nsteps);
    }
    const long stride = std::max(1L, nsteps / std::max(1, checkpoints));

    LatticeField lattice;
    if (spec.kind == FlowKind::ZkLattice)
        lattice = [](std::span<const double> u) { return zk_vector_field(u); };
    else if (spec.kind == FlowKind::AlphaLattice)
        lattice = [a = spec.alpha](std::span<const double> u) { return alpha_vector_field(u, a); };

    for (long s = 1; s <= nsteps; ++s) {
        switch (spec.kind) {
            case FlowKind::ZkLattice:
            case FlowKind::AlphaLattice:
                r.state.v = spec.integrator == Integrator::Rk4
                                ? rk4_lattice_step(r.state.v, lattice, dt)
                                : implicit_midpoint_step(r.state.v, lattice, dt,
                                                         spec.fixed_point_tol,
                                                         spec.max_fixed_point_iters);
                break;
            case FlowKind::Airy:
                r.state = airy_evolve(r.state, dt);
                break;
            case FlowKind::Kdv:
                r.state = kdv_step(r.state, dt, spec.h1_drift_tol);
                break;
            case FlowKind::Mkdv:
                r.state = mkdv_step(r.state, dt, spec.h1_drift_tol);
                break;
            case FlowKind::BurgersViscous:
                r.state = burgers_viscous_step(r.state, dt, spec.epsilon, spec.h1_drift_tol);
                break;
        }
        if (s % stride == 0 || s == nsteps)
            r.diagnostics.append(s * dt, invariant_values(spec.kind, spec.alpha, r.state));
    }
    return r;
}

} // namespace kdvlab
