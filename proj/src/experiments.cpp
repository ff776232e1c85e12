#include "kdvlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>

#include "kdvlab/flows.hpp"
#include "kdvlab/functionals.hpp"
#include "kdvlab/parallel.hpp"
#include "kdvlab/samplers.hpp"

namespace fs = std::filesystem;

namespace kdvlab {

namespace {

struct RegistryEntry {
    const char* id;
    const char* description;
    ExperimentConfig (*defaults)();
};

ExperimentConfig base(const char* id) {
    ExperimentConfig c;
    c.id = id;
    return c;
}

ExperimentConfig e1_defaults() {
    ExperimentConfig c = base("E1");
    c.n = 64; c.m = 10000; c.k_max = 8; c.dt = 1e-3; c.t_final = 1.0;
    return c;
}
ExperimentConfig e2_defaults() {
    ExperimentConfig c = base("E2");
    c.n = 64; c.m = 20; c.dt = 1e-3; c.t_final = 1.0; c.alpha = 0.05; c.alpha2 = 0.1;
    return c;
}
ExperimentConfig e3_defaults() {
    ExperimentConfig c = base("E3");
    c.n = 256; c.dt = 1e-5; c.t_final = 0.1;
    return c;
}
ExperimentConfig e4_defaults() {
    ExperimentConfig c = base("E4");
    c.n = 256; c.dt = 5e-6; c.t_final = 0.05;
    return c;
}
ExperimentConfig e5_defaults() {
    ExperimentConfig c = base("E5");
    c.n = 64; c.m = 20; c.modes = 8;
    return c;
}
ExperimentConfig e6_defaults() {
    ExperimentConfig c = base("E6");
    c.n = 64; c.m = 100000; c.k_max = 8;
    c.m_pcn = 20000; c.burn_in = 2000; c.thin = 5; c.beta = 0.25;
    return c;
}
ExperimentConfig e7_defaults() {
    ExperimentConfig c = base("E7");
    c.n = 128; c.m = 1000; c.modes = 16; c.k_max = 8; c.dt = 4e-6; c.t_final = 0.01;
    return c;
}
ExperimentConfig e8_defaults() {
    ExperimentConfig c = base("E8");
    c.n = 128; c.m = 10000; c.modes = 16; c.k_max = 8; c.t_final = 0.1;
    return c;
}
ExperimentConfig e9_defaults() {
    ExperimentConfig c = base("E9");
    c.n = 128; c.m = 10000; c.modes = 16; c.k_max = 12; c.dt = 5e-5; c.t_final = 0.01;
    c.epsilon = 1e-3;
    return c;
}
ExperimentConfig e10_defaults() {
    ExperimentConfig c = base("E10");
    c.n = 128; c.m = 500; c.modes = 16; c.dt = 4e-6; c.t_final = 0.01;
    return c;
}

constexpr RegistryEntry kRegistry[] = {
    {"E1", "zk-invariance: lattice flow preserves discrete white noise", e1_defaults},
    {"E2", "alpha-conservation: Q conserved, Liouville divergence, indefinite witness", e2_defaults},
    {"E3", "mkdv-k-conservation: conserved functionals of mKdV and the IBP identity", e3_defaults},
    {"E4", "miura-intertwine: mKdV then Miura equals shifted KdV then Miura", e4_defaults},
    {"E5", "jacobian-ratio: det(1 + 2 phi D^-1) proportional to K(phi)K(-phi)", e5_defaults},
    {"E6", "pushforward-whitenoise: Miura image of quartic Gibbs measure is white", e6_defaults},
    {"E7", "kdv-whitenoise-invariance: white noise statistically invariant under KdV", e7_defaults},
    {"E8", "airy-whitenoise: exact dispersive rotation preserves whiteness", e8_defaults},
    {"E9", "burgers-counterexample: viscous flow must fail whiteness (expected failure)", e9_defaults},
    {"E10", "correlation: S(x,t) estimates under the E7 setup", e10_defaults},
};

const RegistryEntry& registry_entry(const std::string& id) {
    for (const auto& e : kRegistry)
        if (id == e.id) return e;
    throw ConfigInvalid("unknown experiment id '" + id + "'");
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid("bad numeric value for " + key + ": '" + value + "'");
    }
}

long parse_long(const std::string& key, const std::string& value) {
    try {
        size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid("bad integer value for " + key + ": '" + value + "'");
    }
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

} // namespace

void ExperimentConfig::apply(const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        if (key == "n") n = static_cast<int>(parse_long(key, value));
        else if (key == "m") m = static_cast<int>(parse_long(key, value));
        else if (key == "modes") modes = static_cast<int>(parse_long(key, value));
        else if (key == "k_max") k_max = static_cast<int>(parse_long(key, value));
        else if (key == "dt") dt = parse_double(key, value);
        else if (key == "T") t_final = parse_double(key, value);
        else if (key == "alpha") alpha = parse_double(key, value);
        else if (key == "alpha2") alpha2 = parse_double(key, value);
        else if (key == "epsilon") epsilon = parse_double(key, value);
        else if (key == "beta") beta = parse_double(key, value);
        else if (key == "burn_in") burn_in = static_cast<int>(parse_long(key, value));
        else if (key == "thin") thin = static_cast<int>(parse_long(key, value));
        else if (key == "m_pcn") m_pcn = static_cast<int>(parse_long(key, value));
        else if (key == "seed") seed = static_cast<std::uint64_t>(parse_long(key, value));
        else if (key == "outdir") outdir = value;
        else if (key == "label") label = value;
        else if (key == "quiet") quiet = (value == "1" || value == "true");
        else throw ConfigInvalid("unknown config key '" + key + "'");
    }
}

std::vector<std::string> experiment_ids() {
    std::vector<std::string> out;
    for (const auto& e : kRegistry) out.emplace_back(e.id);
    return out;
}

std::string experiment_description(const std::string& id) {
    return registry_entry(id).description;
}

ExperimentConfig default_config(const std::string& id) {
    return registry_entry(id).defaults();
}

ExperimentConfig resolve_config(const std::string& id, const ConfigFile* file,
                                const KeyValues& overrides) {
    ExperimentConfig cfg = default_config(id);
    if (file) {
        cfg.apply(file->global);
        const auto it = file->sections.find(id);
        if (it != file->sections.end()) cfg.apply(it->second);
        for (const auto& [section, _] : file->sections) registry_entry(section);
    }
    cfg.apply(overrides);
    return cfg;
}

namespace {

void write_snapshot(const ExperimentConfig& c, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot write " + path.string());
    out << "id = " << c.id << "\n";
    out << "n = " << c.n << "\n";
    out << "m = " << c.m << "\n";
    out << "modes = " << c.modes << "\n";
    out << "k_max = " << c.k_max << "\n";
    out << "dt = " << fmt(c.dt) << "\n";
    out << "T = " << fmt(c.t_final) << "\n";
    out << "alpha = " << fmt(c.alpha) << "\n";
    out << "alpha2 = " << fmt(c.alpha2) << "\n";
    out << "epsilon = " << fmt(c.epsilon) << "\n";
    out << "beta = " << fmt(c.beta) << "\n";
    out << "burn_in = " << c.burn_in << "\n";
    out << "thin = " << c.thin << "\n";
    out << "m_pcn = " << c.m_pcn << "\n";
    out << "seed = " << c.seed << "\n";
}

void merge_report(TestReport& into, const TestReport& from, const std::string& prefix) {
    for (const auto& s : from.stats) {
        StatLine line = s;
        line.label = prefix + line.label;
        into.stats.push_back(line);
    }
    for (const auto& n : from.notes) into.notes.push_back(prefix + n);
}

GridField gaussian_lattice_state(int n, RngStream& rng) {
    GridField f = zero_field(n);
    for (int i = 0; i < n; ++i) f[i] = rng.normal();
    return f;
}

double sum_sq(const GridField& f) {
    double s = 0.0;
    for (double x : f.v) s += x * x;
    return s;
}

/// Smooth random mean-zero field with |.|_inf = 1: coefficient amplitudes
/// exp(-k/2) up to `modes`, then sup-normalized.
GridField smooth_unit_field(int n, int modes, RngStream& rng) {
    SpectrumField s;
    s.n = n;
    s.coeffs.assign(static_cast<size_t>(n / 2 + 1), {0.0, 0.0});
    for (int k = 1; k <= modes; ++k) {
        const double amp = std::exp(-0.5 * k);
        const double a = amp * rng.normal();
        const double b = amp * rng.normal();
        s.coeffs[static_cast<size_t>(k)] = std::complex<double>(a, -b) / std::sqrt(2.0);
    }
    GridField f = to_grid(s);
    double sup = 0.0;
    for (double x : f.v) sup = std::max(sup, std::abs(x));
    if (sup > 0.0)
        for (double& x : f.v) x /= sup;
    return f;
}

/// Central finite-difference estimate of sum_i db_i/du_i.
double fd_divergence(const std::function<std::vector<double>(std::span<const double>)>& field,
                     const GridField& u, double eps = 1e-6) {
    double acc = 0.0;
    std::vector<double> w = u.v;
    for (size_t i = 0; i < w.size(); ++i) {
        const double save = w[i];
        w[i] = save + eps;
        const double fp = field(w)[i];
        w[i] = save - eps;
        const double fm = field(w)[i];
        w[i] = save;
        acc += (fp - fm) / (2.0 * eps);
    }
    return acc;
}

GridField second_derivative(const GridField& f) {
    return spectral_derivative(spectral_derivative(f));
}

// The four stages of the integration-by-parts chain
//   int phi_xx e^{2 Phi} = -2 int phi_x phi e^{2 Phi}
//                        = -int (phi^2)_x e^{2 Phi} = 2 int phi^3 e^{2 Phi},
// each computed independently by quadrature; returns max pairwise deviation
// relative to the last stage's scale.
double ibp_chain_deviation(const GridField& phi) {
    const int n = phi.n();
    const GridField Phi = antiderivative_from_zero(phi);
    const GridField dphi = spectral_derivative(phi);
    const GridField ddphi = second_derivative(phi);
    GridField sq = phi;
    for (double& x : sq.v) x *= x;
    const GridField dsq = spectral_derivative(sq);
    double s1 = 0.0, s2 = 0.0, s3 = 0.0, s4 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double w = std::exp(2.0 * Phi[i]);
        s1 += ddphi[i] * w;
        s2 += -2.0 * dphi[i] * phi[i] * w;
        s3 += -dsq[i] * w;
        s4 += 2.0 * phi[i] * phi[i] * phi[i] * w;
    }
    s1 /= n; s2 /= n; s3 /= n; s4 /= n;
    const double scale = std::max({1.0, std::abs(s4)});
    const double hi = std::max({s1, s2, s3, s4});
    const double lo = std::min({s1, s2, s3, s4});
    return (hi - lo) / scale;
}

// ---------------------------------------------------------------------------
// E1: Zabusky-Kruskal lattice preserves discrete white noise
// ---------------------------------------------------------------------------
void run_e1(const ExperimentConfig& cfg, TestReport& rep, const fs::path& dir) {
    std::vector<GridField> before(static_cast<size_t>(cfg.m), zero_field(cfg.n));
    std::vector<GridField> after(static_cast<size_t>(cfg.m), zero_field(cfg.n));
    std::vector<double> drift(static_cast<size_t>(cfg.m), 0.0);

    const long nsteps = std::lround(cfg.t_final / cfg.dt);
    parallel_for(static_cast<size_t>(cfg.m), [&](size_t i) {
        RngStream rng(cfg.seed, i);
        before[i] = gaussian_lattice_state(cfg.n, rng);
        GridField u = before[i];
        const double s0 = sum_sq(u);
        auto field = [](std::span<const double> v) { return zk_vector_field(v); };
        for (long s = 0; s < nsteps; ++s)
            u.v = implicit_midpoint_step(u.v, field, cfg.dt);
        drift[i] = std::abs(sum_sq(u) - s0) / s0;
        after[i] = std::move(u);
    });

    rep.add("max_sum_sq_drift", *std::max_element(drift.begin(), drift.end()), 0.0,
            tol::lattice_conservation);

    // structure of the vector field on the sampled states
    double worst_div = 0.0, worst_orth = 0.0;
    for (int i = 0; i < std::min(cfg.m, 100); ++i) {
        const GridField& u = before[static_cast<size_t>(i)];
        worst_div = std::max(worst_div, std::abs(zk_divergence(u.v)));
        const std::vector<double> b = zk_vector_field(u.v);
        double dot = 0.0, scale = 0.0;
        for (int g = 0; g < cfg.n; ++g) {
            dot += u[g] * b[g];
            scale += std::abs(u[g] * b[g]);
        }
        worst_orth = std::max(worst_orth, std::abs(dot) / scale);
    }
    rep.add("max_divergence", worst_div, 0.0, tol::zk_structure);
    rep.add("max_energy_orthogonality", worst_orth, 0.0, tol::zk_structure);

    WeightedEnsemble e0 = uniform_ensemble(std::move(before), {cfg.n, "lattice_gaussian", cfg.seed, {}});
    WeightedEnsemble e1 = uniform_ensemble(std::move(after), {cfg.n, "lattice_gaussian_evolved", cfg.seed, {}});
    TwoSampleOptions opt;
    opt.k_max = cfg.k_max;
    opt.site_marginals = true;
    merge_report(rep, two_sample_report(e0, e1, opt), "ts_");

    save_ensemble(e0, (dir / "ensembles" / "before.bin").string());
    save_ensemble(e1, (dir / "ensembles" / "after.bin").string());
}

// ---------------------------------------------------------------------------
// E2: alpha-family conservation and Liouville property
// ---------------------------------------------------------------------------
void run_e2(const ExperimentConfig& cfg, TestReport& rep, const fs::path& dir) {
    for (double alpha : {cfg.alpha, cfg.alpha2}) {
        const std::string tag = "alpha" + fmt(alpha) + "_";
        double worst_q = 0.0, worst_fd = 0.0;
        for (int i = 0; i < cfg.m; ++i) {
            RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
            const GridField u0 = gaussian_lattice_state(cfg.n, rng);
            FlowSpec spec = FlowSpec::alpha_lattice(alpha, cfg.dt);
            const EvolveResult r = evolve(u0, spec, cfg.t_final);
            worst_q = std::max(worst_q, r.diagnostics.relative_drift("lattice_q"));
            worst_fd = std::max(worst_fd, std::abs(fd_divergence(
                [alpha](std::span<const double> v) { return alpha_vector_field(v, alpha); }, u0)));
            if (i == 0) r.diagnostics.save_csv((dir / "diagnostics" / (tag + "invariants.csv")).string());
        }
        rep.add(tag + "max_q_drift", worst_q, 0.0, tol::lattice_conservation);
        rep.add(tag + "max_fd_divergence", worst_fd, 0.0, tol::fd_divergence);
    }

    // Q is indefinite: the alternating witness, and e^{-Q} blows up along it
    const std::vector<double> witness{1.0, -1.0, 1.0, -1.0};
    rep.add("q_witness_alternating", lattice_q(witness), -4.0 - 1e-12, -4.0 + 1e-12);
    for (double c : {1.0, 2.0, 4.0, 8.0}) {
        std::vector<double> scaled = witness;
        for (double& x : scaled) x *= c;
        rep.add("q_witness_scale_" + fmt(c), lattice_q(scaled), -4.0 * c * c - 1e-9,
                -4.0 * c * c + 1e-9);
    }
    rep.notes.push_back("Q(c*witness) = -4c^2 -> -inf, so exp(-Q) du cannot be normalized");
}

// ---------------------------------------------------------------------------
// E3: conserved functionals of the mKdV flow
// ---------------------------------------------------------------------------
void run_e3(const ExperimentConfig& cfg, TestReport& rep, const fs::path& dir) {
    const std::vector<std::pair<std::string, GridField>> starts = {
        {"sin", field_from(cfg.n, [](double x) { return std::sin(2 * M_PI * x); })},
        {"mix", field_from(cfg.n, [](double x) {
             return std::sin(2 * M_PI * x) + 0.5 * std::cos(4 * M_PI * x);
         })},
    };
    for (const auto& [name, phi0] : starts) {
        const EvolveResult r = evolve(phi0, FlowSpec::mkdv(cfg.dt), cfg.t_final);
        r.diagnostics.save_csv((dir / "diagnostics" / (name + "_invariants.csv")).string());
        rep.add(name + "_mean_drift", r.diagnostics.relative_drift("mean"), 0.0, tol::mean_drift);
        rep.add(name + "_h1_drift", r.diagnostics.relative_drift("h1"), 0.0, tol::h1_spectral_drift);
        rep.add(name + "_k_product_drift", r.diagnostics.relative_drift("k_product"), 0.0,
                tol::k_product_drift);
        rep.add(name + "_hamiltonian_drift", r.diagnostics.relative_drift("hamiltonian"), 0.0,
                tol::hamiltonian_drift);
        // J = (2 pi)^{-1/2} K K- exp((int phi^2)^2 / 2): conserved with them
        const double j0 = j_weight(phi0);
        const double jT = j_weight(r.state);
        rep.add(name + "_j_drift", std::abs(jT - j0) / j0, 0.0, tol::k_product_drift);
        // The anchored functionals K(phi), K(-phi) themselves drift by the
        // gauge factor exp(-2 int_0^t (2 phi^3 - phi_xx)(x_0, s) ds): recorded.
        rep.record(name + "_k_plus_anchored_drift", r.diagnostics.relative_drift("k_plus"));
        rep.record(name + "_k_minus_anchored_drift", r.diagnostics.relative_drift("k_minus"));

        rep.add(name + "_ibp_identity", ibp_chain_deviation(phi0), 0.0, tol::ibp_identity);
        rep.add(name + "_ibp_identity_evolved", ibp_chain_deviation(r.state), 0.0, tol::ibp_identity);
    }
    // IBP chain on random smooth fields as well
    RngStream rng(cfg.seed, 900);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
        worst = std::max(worst, ibp_chain_deviation(smooth_unit_field(cfg.n, 8, rng)));
    rep.add("ibp_identity_random", worst, 0.0, tol::ibp_identity);

    // d/dt Phi = (2 phi^3 - phi_xx) - (2 phi^3 - phi_xx)(x_0), checked by a
    // central difference at the half-way state. The spatial constant is the
    // anchor term; the raw mismatch without it is recorded.
    const GridField mid = evolve(starts[0].second, FlowSpec::mkdv(cfg.dt), 0.5 * cfg.t_final).state;
    const GridField plus = mkdv_step(mid, cfg.dt);
    const GridField minus = mkdv_step(mid, -cfg.dt);
    const GridField phi_plus = antiderivative_from_zero(plus);
    const GridField phi_minus = antiderivative_from_zero(minus);
    GridField rhs = second_derivative(mid);
    for (int i = 0; i < cfg.n; ++i) rhs[i] = 2.0 * std::pow(mid[i], 3) - rhs[i];
    double max_anchored = 0.0, max_raw = 0.0, scale = 0.0;
    for (int i = 0; i < cfg.n; ++i) {
        const double dphi = (phi_plus[i] - phi_minus[i]) / (2.0 * cfg.dt);
        max_anchored = std::max(max_anchored, std::abs(dphi - (rhs[i] - rhs[0])));
        max_raw = std::max(max_raw, std::abs(dphi - rhs[i]));
        scale = std::max(scale, std::abs(rhs[i]));
    }
    rep.add("dphi_dt_anchored", max_anchored / scale, 0.0, tol::dphi_dt_consistency);
    rep.record("dphi_dt_without_anchor_term", max_raw / scale);
    rep.notes.push_back("K(phi) and K(-phi) are conserved only as a product; the anchored");
    rep.notes.push_back("functionals pick up the time integral of (2 phi^3 - phi_xx)(x_0)");
}

// ---------------------------------------------------------------------------
// E4: Miura intertwining with the Galilean frame shift
// ---------------------------------------------------------------------------
void run_e4(const ExperimentConfig& cfg, TestReport& rep, const fs::path& dir) {
    const GridField phi0 = field_from(cfg.n, [](double x) { return std::sin(2 * M_PI * x); });
    const double c = h1(phi0); // int phi0^2, conserved by mKdV

    const EvolveResult mkdv_run = evolve(phi0, FlowSpec::mkdv(cfg.dt), cfg.t_final);
    const GridField via_mkdv = miura(mkdv_run.state);

    const GridField u0 = miura(phi0);
    const EvolveResult kdv_run = evolve(u0, FlowSpec::kdv(cfg.dt), cfg.t_final);
    kdv_run.diagnostics.save_csv((dir / "diagnostics" / "kdv_invariants.csv").string());

    // mu(M_t phi0)(x) = (S_t mu(phi0))(x + 6 c t): the constant subtraction in
    // the corrected transform composes with the Galilean symmetry of KdV.
    const GridField matched = shift(kdv_run.state, 6.0 * c * cfg.t_final);

    auto rel_l2 = [](const GridField& a, const GridField& b) {
        double num = 0.0, den = 0.0;
        for (int i = 0; i < a.n(); ++i) {
            num += (a[i] - b[i]) * (a[i] - b[i]);
            den += a[i] * a[i];
        }
        return std::sqrt(num / den);
    };
    rep.add("intertwine_matched_frame", rel_l2(via_mkdv, matched), 0.0, tol::intertwine_l2);
    rep.record("intertwine_unshifted", rel_l2(via_mkdv, kdv_run.state));
    rep.record("frame_speed", 6.0 * c);
    rep.notes.push_back("matching variant shifts the KdV result by x -> x + 6t int phi0^2");
}

// ---------------------------------------------------------------------------
// E5: finite-dimensional Jacobian determinant against K(phi)K(-phi)
// ---------------------------------------------------------------------------
void run_e5(const ExperimentConfig& cfg, TestReport& rep, const fs::path& dir) {
    std::vector<double> ratios;
    std::ofstream csv((dir / "diagnostics" / "ratios.csv").string());
    csv << "field,det,k_product,ratio\n";
    double worst_sym = 0.0;
    for (int i = 0; i < cfg.m; ++i) {
        RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
        GridField phi = smooth_unit_field(cfg.n, cfg.modes, rng);
        const double det = miura_jacobian_det(phi);
        const double kk = k_functional(phi, +1) * k_functional(phi, -1);
        ratios.push_back(det / kk);
        csv << i << ',' << fmt(det) << ',' << fmt(kk) << ',' << fmt(det / kk) << '\n';

        GridField neg = phi;
        for (double& x : neg.v) x = -x;
        worst_sym = std::max(worst_sym, std::abs(miura_jacobian_det(neg) - det) / std::abs(det));
    }
    const double mean = std::accumulate(ratios.begin(), ratios.end(), 0.0) / ratios.size();
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    rep.add("ratio_relative_spread", (*hi - *lo) / std::abs(mean), 0.0, tol::jacobian_spread);
    rep.add("det_sign_symmetry", worst_sym, 0.0, tol::det_symmetry);
    rep.add("det_at_zero", miura_jacobian_det(zero_field(cfg.n)), 1.0 - 1e-12, 1.0 + 1e-12);
    rep.record("ratio_constant", mean);
    rep.notes.push_back("the grid-dependent constant C = det/(K K-) is recorded, not asserted");
}

// ---------------------------------------------------------------------------
// E6: Miura pushforward of P0^(4) is mean-zero white noise
// ---------------------------------------------------------------------------
void run_e6(const ExperimentConfig& cfg, TestReport& rep, const fs::path& dir) {
    WeightedEnsemble gibbs = sample_p04_importance(cfg.m, cfg.n, cfg.seed);
    rep.add("importance_ess", gibbs.meta.diagnostics.at("ess"), tol::e6_ess_floor,
            static_cast<double>(cfg.m));

    WeightedEnsemble pushed;
    pushed.meta = gibbs.meta;
    pushed.meta.measure = "miura_p04_importance";
    pushed.log_weights = gibbs.log_weights;
    pushed.members.assign(gibbs.size(), zero_field(cfg.n));
    parallel_for(gibbs.size(), [&](size_t i) { pushed.members[i] = miura(gibbs.members[i]); });
    merge_report(rep, whiteness_report(pushed, cfg.k_max), "is_");

    // Independent route to the same measure: pCN chain, then pushforward
    WeightedEnsemble chain = sample_p04_pcn(cfg.m_pcn, cfg.n,
                                            PcnOptions{cfg.burn_in, cfg.beta, cfg.thin},
                                            cfg.seed, /*chain_stream=*/1u << 20);
    rep.record("pcn_acceptance_rate", chain.meta.diagnostics.at("acceptance_rate"));

    WeightedEnsemble pushed_pcn;
    pushed_pcn.meta = chain.meta;
    pushed_pcn.meta.measure = "miura_p04_pcn";
    pushed_pcn.log_weights = chain.log_weights;
    pushed_pcn.members.assign(chain.size(), zero_field(cfg.n));
    parallel_for(chain.size(), [&](size_t i) { pushed_pcn.members[i] = miura(chain.members[i]); });
    merge_report(rep, whiteness_report(pushed_pcn, cfg.k_max), "pcn_");

    // The two samplers must agree on E[int phi^2] within combined 3 sigma.
    const std::vector<double> p = gibbs.normalized_weights();
    double mean_is = 0.0;
    std::vector<double> h1s(gibbs.size());
    for (size_t i = 0; i < gibbs.size(); ++i) {
        h1s[i] = h1(gibbs.members[i]);
        mean_is += p[i] * h1s[i];
    }
    double var_is = 0.0;
    for (size_t i = 0; i < gibbs.size(); ++i)
        var_is += p[i] * (h1s[i] - mean_is) * (h1s[i] - mean_is);
    const double se_is = std::sqrt(var_is / gibbs.ess());

    // batch means for the autocorrelated chain
    const int nb = 40;
    const size_t bs = chain.size() / nb;
    if (bs == 0) throw ConfigInvalid("E6 needs m_pcn >= 40 for batch-mean errors");
    std::vector<double> batch(nb, 0.0);
    double mean_pcn = 0.0;
    for (int b = 0; b < nb; ++b) {
        for (size_t i = 0; i < bs; ++i) batch[b] += h1(chain.members[b * bs + i]);
        batch[b] /= static_cast<double>(bs);
        mean_pcn += batch[b];
    }
    mean_pcn /= nb;
    double se_pcn = 0.0;
    for (double x : batch) se_pcn += (x - mean_pcn) * (x - mean_pcn);
    se_pcn = std::sqrt(se_pcn / (nb - 1.0) / nb);

    const double band = 3.0 * std::hypot(se_is, se_pcn);
    rep.add("sampler_agreement_int_phi2", mean_is - mean_pcn, -band, band);
    rep.record("int_phi2_importance", mean_is);
    rep.record("int_phi2_pcn", mean_pcn);

    save_ensemble(pushed, (dir / "ensembles" / "pushforward_importance.bin").string());
    save_ensemble(pushed_pcn, (dir / "ensembles" / "pushforward_pcn.bin").string());
}

// ---------------------------------------------------------------------------
// E7: spectral KdV on band-limited white noise, equality in law
// ---------------------------------------------------------------------------
void run_e7(const ExperimentConfig& cfg, TestReport& rep, const fs::path& dir) {
    WeightedEnsemble before = sample_white_noise_ensemble(cfg.m, cfg.n, cfg.modes, true, cfg.seed);
    WeightedEnsemble after;
    after.meta = before.meta;
    after.meta.measure = "white_noise_q0_kdv";
    after.log_weights = before.log_weights;
    after.members.assign(before.size(), zero_field(cfg.n));
    std::vector<double> h1_drift(before.size(), 0.0);
    parallel_for(before.size(), [&](size_t i) {
        const EvolveResult r = evolve(before.members[i], FlowSpec::kdv(cfg.dt), cfg.t_final, 2);
        after.members[i] = r.state;
        h1_drift[i] = r.diagnostics.relative_drift("h1");
    });
    rep.record("max_h1_drift", *std::max_element(h1_drift.begin(), h1_drift.end()));

    TwoSampleOptions opt;
    opt.k_max = cfg.k_max;
    merge_report(rep, two_sample_report(before, after, opt), "ts_");
    rep.notes.push_back("band-limited initial data: an approximation statement, tested within");
    rep.notes.push_back("Monte Carlo resolution only");

    save_ensemble(before, (dir / "ensembles" / "before.bin").string());
    save_ensemble(after, (dir / "ensembles" / "after.bin").string());
}

// ---------------------------------------------------------------------------
// E8: exact Airy rotation preserves whiteness
// ---------------------------------------------------------------------------
void run_e8(const ExperimentConfig& cfg, TestReport& rep, const fs::path& dir) {
    WeightedEnsemble before = sample_white_noise_ensemble(cfg.m, cfg.n, cfg.modes, true, cfg.seed);
    WeightedEnsemble after;
    after.meta = before.meta;
    after.meta.measure = "white_noise_q0_airy";
    after.log_weights = before.log_weights;
    after.members.assign(before.size(), zero_field(cfg.n));
    double worst_h1 = 0.0;
    for (size_t i = 0; i < before.size(); ++i) {
        after.members[i] = airy_evolve(before.members[i], cfg.t_final);
        const double a = h1(before.members[i]);
        const double b = h1(after.members[i]);
        worst_h1 = std::max(worst_h1, std::abs(b - a) / a);
    }
    rep.add("max_h1_drift", worst_h1, 0.0, tol::airy_h1_drift);
    merge_report(rep, whiteness_report(after, cfg.k_max), "is_");
    save_ensemble(after, (dir / "ensembles" / "after.bin").string());
}

// ---------------------------------------------------------------------------
// E9: viscous Burgers must fail whiteness (negative control)
// ---------------------------------------------------------------------------
void run_e9(const ExperimentConfig& cfg, TestReport& rep, const fs::path& dir) {
    WeightedEnsemble before = sample_white_noise_ensemble(cfg.m, cfg.n, cfg.modes, true, cfg.seed);
    WeightedEnsemble after;
    after.meta = before.meta;
    after.meta.measure = "white_noise_burgers";
    after.log_weights = before.log_weights;
    after.members.assign(before.size(), zero_field(cfg.n));
    parallel_for(before.size(), [&](size_t i) {
        after.members[i] =
            evolve(before.members[i], FlowSpec::burgers(cfg.epsilon, cfg.dt), cfg.t_final, 2).state;
    });
    merge_report(rep, whiteness_report(after, cfg.k_max), "is_");
    save_ensemble(after, (dir / "ensembles" / "after.bin").string());
    rep.notes.push_back("this experiment succeeds when the whiteness report FAILS with variance");
    rep.notes.push_back("decay on at least one mode");
}

/// E9 succeeds iff whiteness failed and at least one variance stat decayed.
bool e9_expected_failure(const TestReport& rep) {
    bool decay = false;
    for (const auto& s : rep.stats)
        if (s.bounded && !s.pass && s.label.rfind("is_var_", 0) == 0 && s.value < 1.0) decay = true;
    TestReport sub;
    for (const auto& s : rep.stats)
        if (s.label.rfind("is_", 0) == 0) sub.stats.push_back(s);
    return decay && !sub.overall_pass();
}

// ---------------------------------------------------------------------------
// E10: correlation function S(x,t)
// ---------------------------------------------------------------------------
void run_e10(const ExperimentConfig& cfg, TestReport& rep, const fs::path& dir) {
    WeightedEnsemble initial = sample_white_noise_ensemble(cfg.m, cfg.n, cfg.modes, true, cfg.seed);

    std::vector<double> probes;
    for (int j = 0; j < 64; ++j) probes.push_back(j / 64.0);

    const std::vector<double> times{0.0, 0.2 * cfg.t_final, cfg.t_final};
    WeightedEnsemble current = initial;
    double t_now = 0.0;
    for (size_t ti = 0; ti < times.size(); ++ti) {
        const double t = times[ti];
        if (t > t_now) {
            parallel_for(current.size(), [&](size_t i) {
                current.members[i] =
                    evolve(current.members[i], FlowSpec::kdv(cfg.dt), t - t_now, 2).state;
            });
            t_now = t;
        }
        const CorrelationTable table = correlation_function(initial, current, t, probes);
        char name[32];
        std::snprintf(name, sizeof(name), "S_t%zu.csv", ti);
        table.save_csv((dir / "diagnostics" / name).string());

        if (ti == 0) {
            // t = 0 analytic check: S(x,0) = sum_{k<=M} 2 cos(2 pi k x)
            int fails = 0;
            for (size_t j = 0; j < probes.size(); ++j) {
                double target = 0.0;
                for (int k = 1; k <= cfg.modes; ++k) target += 2.0 * std::cos(2 * M_PI * k * probes[j]);
                if (std::abs(table.value[j] - target) > 3.0 * table.stderr_[j]) ++fails;
            }
            rep.add("t0_kernel_outliers", fails, 0.0,
                    std::max(1.0, std::ceil(0.03 * static_cast<double>(probes.size()))));
            rep.record("t0_S_at_0", table.value[0]);
        }
    }
    // gnuplot companion for the three tables
    std::ofstream gp((dir / "diagnostics" / "correlation.gp").string());
    gp << "set datafile separator ','\n"
          "set key outside\n"
          "set xlabel 'x'\n"
          "set ylabel 'S(x,t)'\n"
          "plot 'S_t0.csv' using 2:3 every ::1 with lines title 't=0', \\\n"
          "     'S_t1.csv' using 2:3 every ::1 with lines title 't=T/5', \\\n"
          "     'S_t2.csv' using 2:3 every ::1 with lines title 't=T'\n";
    rep.notes.push_back("correlation tables and plot script under diagnostics/");
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    registry_entry(cfg.id); // validates the id
    if (cfg.n < 8 || cfg.n % 2 != 0) throw ConfigInvalid("grid size must be even and >= 8");
    if (cfg.m < 0) throw ConfigInvalid("m must be nonnegative");

    const fs::path dir = fs::path(cfg.outdir) / cfg.id / cfg.label;
    std::error_code ec;
    fs::create_directories(dir / "ensembles", ec);
    fs::create_directories(dir / "diagnostics", ec);
    if (ec) throw IoFailure("cannot create output directory " + dir.string());
    write_snapshot(cfg, dir / "config.snapshot");

    ExperimentResult result;
    result.report.name = cfg.id + " " + registry_entry(cfg.id).description;
    result.report.sample_count = cfg.m;
    result.output_dir = dir.string();

    if (cfg.id == "E1") run_e1(cfg, result.report, dir);
    else if (cfg.id == "E2") run_e2(cfg, result.report, dir);
    else if (cfg.id == "E3") run_e3(cfg, result.report, dir);
    else if (cfg.id == "E4") run_e4(cfg, result.report, dir);
    else if (cfg.id == "E5") run_e5(cfg, result.report, dir);
    else if (cfg.id == "E6") run_e6(cfg, result.report, dir);
    else if (cfg.id == "E7") run_e7(cfg, result.report, dir);
    else if (cfg.id == "E8") run_e8(cfg, result.report, dir);
    else if (cfg.id == "E9") run_e9(cfg, result.report, dir);
    else run_e10(cfg, result.report, dir);

    result.as_expected = cfg.id == "E9" ? e9_expected_failure(result.report)
                                        : result.report.overall_pass();

    result.report.notes.push_back(std::string("experiment expectation ") +
                                  (result.as_expected ? "met" : "NOT met"));
    result.report.save_text((dir / "report.txt").string());
    result.report.save_csv((dir / "report.csv").string());
    if (!cfg.quiet) std::fputs(result.report.to_text().c_str(), stdout);
    return result;
}

} // namespace kdvlab
