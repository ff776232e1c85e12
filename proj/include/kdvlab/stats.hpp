#pragma once

// Ensemble statistics with importance-weight support: one-sample and
// two-sample Kolmogorov-Smirnov tests, whiteness reports (per-mode marginals,
// cross-covariances, characteristic functional probes), equality-in-law
// reports, and the correlation function S(x,t).
//
// All statistics are self-normalized in the weights; with uniform weights
// they reduce exactly to the unweighted formulas. Where a marginal test runs
// at the 1% level, a report's overall verdict tolerates a small budget of
// marginal failures (3% of the bounded statistics, at least one), matching
// the expected false-positive rate of many simultaneous tests.

#include <string>
#include <vector>

#include "kdvlab/ensemble.hpp"

namespace kdvlab {

/// One-sample KS critical coefficient at the 1% level: D > 1.63 / sqrt(m).
inline constexpr double ks_critical_1pct = 1.63;

struct StatLine {
    std::string label;
    double value = 0.0;
    double lo = 0.0; // pass iff lo <= value <= hi
    double hi = 0.0;
    bool pass = true;
    bool bounded = true; // recorded-only lines carry no verdict weight
};

struct TestReport {
    std::string name;
    long sample_count = 0;
    std::vector<StatLine> stats;
    std::vector<std::string> notes;

    void add(const std::string& label, double value, double lo, double hi);
    /// Informational line; never affects the verdict.
    void record(const std::string& label, double value);

    int failures() const;
    int bounded_count() const;
    /// Marginal-failure budget: max(1, ceil(0.03 * bounded statistics)).
    int allowed_failures() const;
    bool overall_pass() const;

    void save_text(const std::string& path) const;
    void save_csv(const std::string& path) const;
    std::string to_text() const;
};

double normal_cdf(double x);

struct KsResult {
    double statistic = 0.0;
    bool critical_flag = false; // statistic above the 1% critical value
};

/// One-sample KS against the standard normal CDF; needs >= 50 samples.
KsResult ks_normal(const std::vector<double>& samples);

/// Weighted one-sample KS against the standard normal, critical value scaled
/// by the effective sample size of the weights.
KsResult ks_normal_weighted(std::vector<double> values, std::vector<double> norm_weights);

/// Weighted two-sample KS statistic between two weighted empirical CDFs.
double two_sample_ks(std::vector<double> a, std::vector<double> pa,
                     std::vector<double> b, std::vector<double> pb);

/// Gaussianity / independence / characteristic-functional report for a
/// (possibly weighted) ensemble against mean-zero white noise, on basis
/// coefficients up to k_max.
TestReport whiteness_report(const WeightedEnsemble& e, int k_max);

struct TwoSampleOptions {
    int k_max = 8;
    bool site_marginals = false; // additionally test every grid-site marginal
    bool energy_distance = true; // permutation test on low-mode joint vectors
    int energy_subsample = 600;
    int energy_permutations = 499;
};

/// Equality-in-law report between two ensembles on the same grid: per-mode
/// (and optionally per-site) two-sample KS at the 1% level plus an
/// energy-distance permutation test on the joint low-mode vectors.
TestReport two_sample_report(const WeightedEnsemble& e0, const WeightedEnsemble& e1,
                             const TwoSampleOptions& opt);

struct CorrelationTable {
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> value; // S(x,t) estimates
    std::vector<double> stderr_; // Monte Carlo standard errors

    void save_csv(const std::string& path) const;
};

/// S(x,t) = E[ f(0) (S_t f)(x) ] estimated over aligned (initial, evolved)
/// pairs; evolved fields are evaluated at the probe points by trigonometric
/// interpolation. Needs >= 100 pairs.
CorrelationTable correlation_function(const WeightedEnsemble& initial,
                                      const WeightedEnsemble& evolved, double t,
                                      const std::vector<double>& probe_x);

/// Gelman-Rubin potential scale reduction over >= 2 equal-length chains.
double gelman_rubin(const std::vector<std::vector<double>>& chains);

} // namespace kdvlab
