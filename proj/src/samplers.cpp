#include "kdvlab/samplers.hpp"

#include <cmath>

#include "kdvlab/functionals.hpp"
#include "kdvlab/parallel.hpp"

namespace kdvlab {

namespace {

// Draw order is part of the reproducibility contract: constant mode first
// (when present), then a_k, b_k for k = 1, 2, ...
GridField field_from_coefficients(int n, int m_modes, bool mean_zero, RngStream& rng,
                                  double (*mode_sd)(int)) {
    SpectrumField s;
    s.n = n;
    s.coeffs.assign(static_cast<size_t>(n / 2 + 1), {0.0, 0.0});
    if (!mean_zero) s.coeffs[0] = rng.normal();
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int k = 1; k <= m_modes; ++k) {
        const double sd = mode_sd(k);
        const double a = sd * rng.normal();
        const double b = sd * rng.normal();
        // u += a sqrt2 cos(2 pi k x) + b sqrt2 sin(2 pi k x)
        s.coeffs[static_cast<size_t>(k)] = std::complex<double>(a, -b) * inv_sqrt2;
    }
    return to_grid(s);
}

} // namespace

GridField sample_white_noise(int n, int m_modes, bool mean_zero, RngStream& rng) {
    TorusGrid::make(n);
    if (m_modes < 1 || m_modes > n / 3)
        throw BadModeCount("m_modes must be in [1, n/3], got " + std::to_string(m_modes));
    return field_from_coefficients(n, m_modes, mean_zero, rng, [](int) { return 1.0; });
}

GridField sample_circular_bridge(int n, RngStream& rng) {
    TorusGrid::make(n);
    return field_from_coefficients(n, n / 3, true, rng,
                                   [](int k) { return 1.0 / (2.0 * M_PI * k); });
}

WeightedEnsemble sample_white_noise_ensemble(int m, int n, int m_modes, bool mean_zero,
                                             std::uint64_t master_seed,
                                             std::uint64_t base_stream) {
    std::vector<GridField> members(static_cast<size_t>(m), zero_field(n));
    parallel_for(static_cast<size_t>(m), [&](size_t i) {
        RngStream rng(master_seed, base_stream + i);
        members[i] = sample_white_noise(n, m_modes, mean_zero, rng);
    });
    EnsembleMeta meta{n, mean_zero ? "white_noise_q0" : "white_noise_q", master_seed, {}};
    return uniform_ensemble(std::move(members), std::move(meta));
}

WeightedEnsemble sample_bridge_ensemble(int m, int n, std::uint64_t master_seed,
                                        std::uint64_t base_stream) {
    std::vector<GridField> members(static_cast<size_t>(m), zero_field(n));
    parallel_for(static_cast<size_t>(m), [&](size_t i) {
        RngStream rng(master_seed, base_stream + i);
        members[i] = sample_circular_bridge(n, rng);
    });
    EnsembleMeta meta{n, "circular_bridge_p0", master_seed, {}};
    return uniform_ensemble(std::move(members), std::move(meta));
}

double log_p04_target(const GridField& phi) {
    GridField p4 = phi;
    for (double& x : p4.v) x = x * x * x * x;
    return log_j_weight(phi) - 0.5 * quadrature_mean(p4);
}

WeightedEnsemble sample_p04_importance(int m, int n, std::uint64_t master_seed) {
    if (m < 100) throw TooFewSamples("importance sampler needs m >= 100");
    WeightedEnsemble e = sample_bridge_ensemble(m, n, master_seed);
    e.meta.measure = "p04_importance";
    parallel_for(e.size(), [&](size_t i) { e.log_weights[i] = log_p04_target(e.members[i]); });
    const double ess = e.ess();
    e.meta.diagnostics["ess"] = ess;
    if (ess < 10.0)
        throw DegenerateWeights("importance ESS " + std::to_string(ess) + " < 10");
    return e;
}

WeightedEnsemble sample_p04_pcn(int m, int n, const PcnOptions& opt, std::uint64_t master_seed,
                                std::uint64_t chain_stream) {
    if (opt.beta <= 0.0 || opt.beta > 1.0) throw ConfigInvalid("pCN beta must be in (0, 1]");
    if (opt.burn_in < 0 || opt.thin < 1) throw ConfigInvalid("pCN burn_in/thin invalid");
    RngStream rng(master_seed, chain_stream);
    const double keep = std::sqrt(1.0 - opt.beta * opt.beta);

    GridField phi = zero_field(n);
    double lp = log_p04_target(phi);
    std::vector<GridField> samples;
    samples.reserve(static_cast<size_t>(m));
    long accepted = 0;
    const long total = static_cast<long>(opt.burn_in) + static_cast<long>(m) * opt.thin;
    for (long step = 0; step < total; ++step) {
        GridField prop = sample_circular_bridge(n, rng);
        for (int i = 0; i < n; ++i) prop[i] = keep * phi[i] + opt.beta * prop[i];
        const double lq = log_p04_target(prop);
        if (std::log(rng.uniform()) < lq - lp) {
            phi = std::move(prop);
            lp = lq;
            ++accepted;
        }
        if (step >= opt.burn_in && (step - opt.burn_in) % opt.thin == 0)
            samples.push_back(phi);
    }
    EnsembleMeta meta{n, "p04_pcn", master_seed, {}};
    meta.diagnostics["acceptance_rate"] = static_cast<double>(accepted) / total;
    return uniform_ensemble(std::move(samples), std::move(meta));
}

double basis_coefficient(const GridField& f, int k, BasisComponent c) {
    const SpectrumField s = to_spectrum(f);
    const std::complex<double> ck = s.coeffs[static_cast<size_t>(k)];
    return c == BasisComponent::Cos ? std::sqrt(2.0) * ck.real() : -std::sqrt(2.0) * ck.imag();
}

} // namespace kdvlab
