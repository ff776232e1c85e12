#pragma once

// Samplers for the measures under study:
//
//   Q  / Q0   band-limited white noise: iid standard normal coefficients on
//             the orthonormal trig basis {1, sqrt2 cos 2 pi k x,
//             sqrt2 sin 2 pi k x}, k <= m_modes (constant mode dropped when
//             mean_zero is set);
//   P0        circular Brownian motion conditioned to mean zero: independent
//             coefficients with variance 1/(2 pi k)^2, truncated at k = n/3
//             so downstream cubic products stay alias-free;
//   P0^(4)    the weighted Gibbs measure J(phi) exp(-1/2 int phi^4) dP0,
//             realized two independent ways: P0 proposals with exact
//             importance log-weights, and a pCN random-walk chain targeting
//             the same density.

#include <cstdint>

#include "kdvlab/ensemble.hpp"
#include "kdvlab/rng.hpp"

namespace kdvlab {

/// One band-limited white-noise field. Requires 1 <= m_modes <= n/3
/// (dealiasing-safe for the flows), else BadModeCount.
GridField sample_white_noise(int n, int m_modes, bool mean_zero, RngStream& rng);

/// One circular-bridge (mean-zero conditioned Wiener) field, truncated at n/3.
GridField sample_circular_bridge(int n, RngStream& rng);

/// Ensemble of `m` white-noise fields, one substream per member starting at
/// `base_stream`.
WeightedEnsemble sample_white_noise_ensemble(int m, int n, int m_modes, bool mean_zero,
                                             std::uint64_t master_seed,
                                             std::uint64_t base_stream = 0);

WeightedEnsemble sample_bridge_ensemble(int m, int n, std::uint64_t master_seed,
                                        std::uint64_t base_stream = 0);

/// log density ratio of P0^(4) against P0: log J(phi) - (1/2) int phi^4.
double log_p04_target(const GridField& phi);

/// P0^(4) by importance sampling: m >= 100 bridge proposals with exact
/// log-weights. Records ESS in meta.diagnostics["ess"]; throws
/// DegenerateWeights if ESS < 10.
WeightedEnsemble sample_p04_importance(int m, int n, std::uint64_t master_seed);

struct PcnOptions {
    int burn_in = 2000;
    double beta = 0.25; // proposal mixing; beta = 1 is an independence sampler
    int thin = 5;
};

/// P0^(4) by preconditioned Crank-Nicolson MCMC: proposals
/// phi' = sqrt(1-beta^2) phi + beta xi, xi ~ P0, accepted with probability
/// min(1, exp(l(phi') - l(phi))). Returns m uniform-weight samples after
/// burn-in and thinning; acceptance rate lands in
/// meta.diagnostics["acceptance_rate"].
WeightedEnsemble sample_p04_pcn(int m, int n, const PcnOptions& opt, std::uint64_t master_seed,
                                std::uint64_t chain_stream = 0);

/// Basis coefficient <f, sqrt2 cos(2 pi k x)> (component COS) or
/// <f, sqrt2 sin(2 pi k x)> (SIN); standard normal under white noise.
enum class BasisComponent { Cos, Sin };
double basis_coefficient(const GridField& f, int k, BasisComponent c);

} // namespace kdvlab
