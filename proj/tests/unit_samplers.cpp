#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "kdvlab/functionals.hpp"
#include "kdvlab/samplers.hpp"
#include "kdvlab/stats.hpp"
#include "oracles.hpp"

using namespace kdvlab;

TEST_CASE("white noise respects the mode-count precondition") {
    RngStream rng(1, 0);
    CHECK_THROWS_AS(sample_white_noise(64, 0, true, rng), BadModeCount);
    CHECK_THROWS_AS(sample_white_noise(64, 22, true, rng), BadModeCount);
    CHECK_NOTHROW(sample_white_noise(64, 21, true, rng));
}

TEST_CASE("mean-zero white noise has zero mean") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        RngStream rng(42, s);
        const GridField f = sample_white_noise(64, 16, true, rng);
        CHECK(std::abs(quadrature_mean(f)) < 1e-14);
    }
}

TEST_CASE("fixed seed reproduces bit-identical fields") {
    RngStream a(123, 7), b(123, 7);
    const GridField fa = sample_white_noise(128, 16, true, a);
    const GridField fb = sample_white_noise(128, 16, true, b);
    CHECK(fa.v == fb.v);

    RngStream c(123, 8);
    const GridField fc = sample_white_noise(128, 16, true, c);
    CHECK(fa.v != fc.v);

    const WeightedEnsemble e1 = sample_white_noise_ensemble(100, 64, 8, true, 5);
    const WeightedEnsemble e2 = sample_white_noise_ensemble(100, 64, 8, true, 5);
    for (size_t i = 0; i < e1.size(); ++i) CHECK(e1.members[i].v == e2.members[i].v);
}

TEST_CASE("white-noise coefficient moments at m = 1e5") {
    const int m = 100000, modes = 8;
    const WeightedEnsemble e = sample_white_noise_ensemble(m, 64, modes, true, 11);
    for (int k = 1; k <= modes; ++k) {
        for (auto comp : {BasisComponent::Cos, BasisComponent::Sin}) {
            double mean = 0.0, var = 0.0;
            for (const auto& f : e.members) mean += basis_coefficient(f, k, comp);
            mean /= m;
            for (const auto& f : e.members) {
                const double c = basis_coefficient(f, k, comp) - mean;
                var += c * c;
            }
            var /= m;
            CHECK(std::abs(mean) < 0.02);
            CHECK(var > 0.98);
            CHECK(var < 1.02);
        }
    }
}

TEST_CASE("projections on unit test functions are standard normal (KS)") {
    const int m = 10000, n = 64;
    const WeightedEnsemble e = sample_white_noise_ensemble(m, n, 8, true, 99);
    const GridField lam = field_from(n, [](double x) {
        return std::cos(2 * M_PI * x) + std::sin(6 * M_PI * x); // unit L2 norm
    });
    std::vector<double> proj(e.size());
    for (size_t i = 0; i < e.size(); ++i) {
        double acc = 0.0;
        for (int g = 0; g < n; ++g) acc += lam[g] * e.members[i][g];
        proj[i] = acc / n;
    }
    const KsResult ks = ks_normal(proj);
    CHECK(!ks.critical_flag);
    CHECK(ks.statistic < 1.63 / std::sqrt(static_cast<double>(m)));
}

TEST_CASE("distinct coefficients are uncorrelated") {
    const int m = 20000;
    const WeightedEnsemble e = sample_white_noise_ensemble(m, 64, 8, true, 7);
    const double bound = 3.0 / std::sqrt(static_cast<double>(m));
    std::vector<std::pair<int, BasisComponent>> picks = {
        {1, BasisComponent::Cos}, {1, BasisComponent::Sin}, {3, BasisComponent::Cos},
        {5, BasisComponent::Sin}, {8, BasisComponent::Cos}};
    for (size_t a = 0; a < picks.size(); ++a)
        for (size_t b = a + 1; b < picks.size(); ++b) {
            double cov = 0.0;
            for (const auto& f : e.members)
                cov += basis_coefficient(f, picks[a].first, picks[a].second) *
                       basis_coefficient(f, picks[b].first, picks[b].second);
            CHECK(std::abs(cov / m) < bound);
        }
}

TEST_CASE("circular bridge: pointwise variance and exact zero mean") {
    const int m = 20000, n = 256;
    const WeightedEnsemble e = sample_bridge_ensemble(m, n, 13);
    double truncated = 0.0; // sum_{k<=n/3} 2/(2 pi k)^2, the band-limited target
    for (int k = 1; k <= n / 3; ++k) truncated += 2.0 / std::pow(2 * M_PI * k, 2);
    for (int probe : {0, n / 3, n / 2}) {
        double var = 0.0;
        for (const auto& f : e.members) var += f[probe] * f[probe];
        var /= m;
        CHECK(std::abs(var - truncated) < 0.002);
        CHECK(std::abs(var - 1.0 / 12.0) < 0.002); // continuum value, truncation included
    }
    for (const auto& f : e.members) {
        CHECK(std::abs(quadrature_mean(f)) < 1e-14);
        break;
    }
}

TEST_CASE("circular bridge covariance matches the Bernoulli kernel and the bridge oracle") {
    const int m = 20000, n = 256;
    const WeightedEnsemble e = sample_bridge_ensemble(m, n, 29);

    // independent time-domain construction: standard bridge minus its mean
    RngStream rng(5150, 0);
    std::vector<std::vector<double>> oracle_paths;
    for (int i = 0; i < m; ++i) oracle_paths.push_back(oracle::bridge_minus_mean(n, rng));

    for (int lag : {0, 16, 64, 128, 192}) {
        const double theta = static_cast<double>(lag) / n;
        const double target = 0.5 * (theta * theta - theta + 1.0 / 6.0);
        double cov = 0.0, cov_oracle = 0.0;
        for (int i = 0; i < m; ++i) {
            cov += e.members[static_cast<size_t>(i)][0] * e.members[static_cast<size_t>(i)][lag];
            cov_oracle += oracle_paths[static_cast<size_t>(i)][0] *
                          oracle_paths[static_cast<size_t>(i)][static_cast<size_t>(lag)];
        }
        cov /= m;
        cov_oracle /= m;
        CHECK(std::abs(cov - target) < 0.005);
        CHECK(std::abs(cov_oracle - target) < 0.005);
        CHECK(std::abs(cov - cov_oracle) < 0.005);
    }
}

TEST_CASE("P0^(4) target density at the zero field") {
    CHECK(log_p04_target(zero_field(64)) ==
          doctest::Approx(-0.5 * std::log(2 * M_PI)).epsilon(1e-13));
}

TEST_CASE("importance sampler: finite weights, healthy ESS") {
    const WeightedEnsemble e = sample_p04_importance(10000, 64, 3);
    for (double lw : e.log_weights) CHECK(std::isfinite(lw));
    CHECK(e.ess() > 1000.0);
    CHECK(e.meta.diagnostics.at("ess") == doctest::Approx(e.ess()));
    CHECK_THROWS_AS(sample_p04_importance(50, 64, 3), TooFewSamples);
}

TEST_CASE("importance and pCN samplers agree on E[int phi^2]") {
    const int n = 64;
    const WeightedEnsemble is = sample_p04_importance(5000, n, 21);
    const std::vector<double> p = is.normalized_weights();
    double mean_is = 0.0;
    for (size_t i = 0; i < is.size(); ++i) mean_is += p[i] * h1(is.members[i]);
    double var_is = 0.0;
    for (size_t i = 0; i < is.size(); ++i) {
        const double c = h1(is.members[i]) - mean_is;
        var_is += p[i] * c * c;
    }
    const double se_is = std::sqrt(var_is / is.ess());

    PcnOptions opt;
    opt.burn_in = 500;
    opt.thin = 5;
    const WeightedEnsemble chain = sample_p04_pcn(2000, n, opt, 77);
    double mean_pcn = 0.0;
    for (const auto& f : chain.members) mean_pcn += h1(f);
    mean_pcn /= static_cast<double>(chain.size());
    // batch means over 20 batches for the chain error
    const int nb = 20;
    const size_t bs = chain.size() / nb;
    double se_pcn = 0.0;
    std::vector<double> batch(nb, 0.0);
    for (int b = 0; b < nb; ++b) {
        for (size_t i = 0; i < bs; ++i) batch[b] += h1(chain.members[b * bs + i]);
        batch[b] = batch[b] / static_cast<double>(bs) - mean_pcn;
        se_pcn += batch[b] * batch[b];
    }
    se_pcn = std::sqrt(se_pcn / (nb - 1.0) / nb);

    CHECK(std::abs(mean_is - mean_pcn) < 3.0 * std::hypot(se_is, se_pcn));

    const double acc = chain.meta.diagnostics.at("acceptance_rate");
    CHECK(acc > 0.0);
    CHECK(acc <= 1.0);
    MESSAGE("pCN acceptance rate at beta=0.25: ", acc);
}

TEST_CASE("pCN with beta = 1 is an independence sampler with the same target") {
    PcnOptions opt;
    opt.beta = 1.0;
    opt.burn_in = 100;
    opt.thin = 2;
    const WeightedEnsemble chain = sample_p04_pcn(2000, 64, opt, 31);
    double mean = 0.0;
    for (const auto& f : chain.members) mean += h1(f);
    mean /= static_cast<double>(chain.size());

    const WeightedEnsemble is = sample_p04_importance(5000, 64, 32);
    const std::vector<double> p = is.normalized_weights();
    double mean_is = 0.0;
    for (size_t i = 0; i < is.size(); ++i) mean_is += p[i] * h1(is.members[i]);
    CHECK(std::abs(mean - mean_is) < 0.01);
}

TEST_CASE("four pCN chains from the zero field converge (Gelman-Rubin)") {
    PcnOptions opt;
    opt.burn_in = 500;
    opt.thin = 2;
    std::vector<std::vector<double>> chains;
    for (std::uint64_t c = 0; c < 4; ++c) {
        const WeightedEnsemble chain = sample_p04_pcn(1500, 64, opt, 555, c);
        std::vector<double> h;
        for (const auto& f : chain.members) h.push_back(hamiltonian_mkdv(f));
        chains.push_back(std::move(h));
    }
    const double rhat = gelman_rubin(chains);
    CHECK(rhat < 1.1);
    MESSAGE("Gelman-Rubin on H(phi): ", rhat);
}
