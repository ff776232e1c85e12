#pragma once

// Dynamics:
//
//   zk_lattice        u'_i = (u_{i+1}+u_i+u_{i-1})(u_{i+1}-u_{i-1})
//                            - (u_{i+2}-2u_{i+1}+2u_{i-1}-u_{i-2})
//                     divergence-free and conserving sum u_i^2
//   alpha_lattice     the one-parameter family of integrable lattice flows
//                     conserving Q = sum u_i^2 + 2 u_i u_{i+1}
//   airy              u_t = -u_xxx, solved exactly by phase rotation
//   kdv               u_t = 6 u u_x - u_xxx        (Strang split, RK4 + Airy)
//   mkdv              phi_t = 6 phi^2 phi_x - phi_xxx
//   burgers_viscous   u_t = 2 u u_x + eps u_xx     (exact diffusion factor)
//
// Lattice flows default to the implicit midpoint rule, which conserves
// quadratic first integrals exactly (up to the fixed-point tolerance); the
// spectral flows keep every state dealiased under the 2/3 rule and guard each
// step with an h1 drift check instead of an a-priori CFL bound.

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kdvlab/grid.hpp"

namespace kdvlab {

enum class FlowKind { ZkLattice, AlphaLattice, Airy, Kdv, Mkdv, BurgersViscous };
enum class Integrator { ImplicitMidpoint, Rk4, Exact, SplitstepEtd };

std::string to_string(FlowKind k);

struct FlowSpec {
    FlowKind kind = FlowKind::ZkLattice;
    double alpha = 0.0;   // alpha_lattice only
    double epsilon = 0.0; // burgers_viscous only
    double dt = 1e-3;
    Integrator integrator = Integrator::ImplicitMidpoint;
    double fixed_point_tol = 1e-12;
    int max_fixed_point_iters = 50;
    double h1_drift_tol = 1e-6; // per-step guard for the split-step flows

    /// Kind/parameter consistency; throws ConfigInvalid.
    void validate() const;

    static FlowSpec zk(double dt);
    static FlowSpec alpha_lattice(double alpha, double dt);
    static FlowSpec airy();
    static FlowSpec kdv(double dt);
    static FlowSpec mkdv(double dt);
    static FlowSpec burgers(double epsilon, double dt);
};

/// Right-hand side of the Zabusky-Kruskal lattice, periodic indexing.
/// Throws TooShort for fewer than 5 sites.
std::vector<double> zk_vector_field(std::span<const double> u);

/// sum_i (u_{i+1} - u_{i-1}) = sum_i db_i/du_i, summed literally; telescopes
/// to zero in exact arithmetic.
double zk_divergence(std::span<const double> u);

std::vector<double> alpha_vector_field(std::span<const double> u, double alpha);

using LatticeField = std::function<std::vector<double>(std::span<const double>)>;

/// One step of the implicit midpoint rule, u_next = u + dt b((u+u_next)/2),
/// solved by fixed-point iteration to `tol` in the max norm. Throws
/// NoConvergence after max_iters sweeps.
std::vector<double> implicit_midpoint_step(std::span<const double> u, const LatticeField& b,
                                           double dt, double tol = 1e-12, int max_iters = 50);

std::vector<double> rk4_lattice_step(std::span<const double> u, const LatticeField& b, double dt);

/// Exact Airy flow: coefficient k rotates by exp(i (2 pi k)^3 t). Moduli are
/// preserved and the group property is exact; the unpaired Nyquist mode is
/// left fixed.
SpectrumField airy_evolve(const SpectrumField& s, double t);
GridField airy_evolve(const GridField& f, double t);

/// One Strang step of KdV / mKdV (exact half Airy, RK4 on the dealiased
/// nonlinear term, exact half Airy). Mean is preserved; throws StepTooLarge
/// when the per-step relative h1 drift exceeds the guard.
GridField kdv_step(const GridField& u, double dt, double h1_drift_tol = 1e-6);
GridField mkdv_step(const GridField& phi, double dt, double h1_drift_tol = 1e-6);

/// One Strang step of viscous Burgers, diffusion applied exactly in spectrum.
/// The guard triggers on relative h1 growth (diffusion can only dissipate).
GridField burgers_viscous_step(const GridField& u, double dt, double epsilon,
                               double h1_growth_tol = 1e-6);

/// Named invariant time series along a trajectory.
struct Diagnostics {
    std::vector<std::string> names;
    std::vector<double> times;
    std::vector<std::vector<double>> rows; // rows[c][j] = invariant j at checkpoint c

    void append(double t, const std::vector<double>& values);
    /// CSV with columns t, invariant, value.
    void save_csv(const std::string& path) const;
    /// Max |x(t) - x(0)| / max(|x(0)|, floor) over checkpoints for invariant `name`.
    double relative_drift(const std::string& name) const;
    double initial(const std::string& name) const;
};

struct EvolveResult {
    GridField state;
    Diagnostics diagnostics;
};

/// Steps `state` to t_final with the given flow, recording the flow's natural
/// invariants at `checkpoints` evenly spaced times (plus t = 0). The step
/// size is dt rounded so the trajectory lands on t_final exactly; t_final = 0
/// returns the input unchanged.
EvolveResult evolve(const GridField& state, const FlowSpec& spec, double t_final,
                    int checkpoints = 16);

} // namespace kdvlab
