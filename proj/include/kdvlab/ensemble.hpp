#pragma once

// Weighted ensembles of fields: the common currency between samplers, flows
// and statistics. Uniform weights are represented as all-zero log-weights.
//
// Binary container layout (little-endian), one file per ensemble:
//   magic "KDVENS1\0"
//   u32 version, u32 reserved
//   u64 n, u64 count, u64 master_seed
//   u32 name_len, name bytes
//   count records of { n f64 values, f64 log_weight }

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kdvlab/grid.hpp"

namespace kdvlab {

struct EnsembleMeta {
    int n = 0;
    std::string measure;
    std::uint64_t master_seed = 0;
    /// Free-form sampler diagnostics (acceptance rate, ESS, ...).
    std::map<std::string, double> diagnostics;
};

struct WeightedEnsemble {
    std::vector<GridField> members;
    std::vector<double> log_weights;
    EnsembleMeta meta;

    std::size_t size() const { return members.size(); }

    /// Normalized weights p_i = w_i / sum w (stable under large log offsets).
    std::vector<double> normalized_weights() const;

    /// Effective sample size (sum w)^2 / sum w^2.
    double ess() const;
};

/// Ensemble with uniform weights over the given members.
WeightedEnsemble uniform_ensemble(std::vector<GridField> members, EnsembleMeta meta);

void save_ensemble(const WeightedEnsemble& e, const std::string& path);
WeightedEnsemble load_ensemble(const std::string& path);

/// One line per member: log_weight, v0, ..., v_{n-1}. For inspection only.
void export_ensemble_csv(const WeightedEnsemble& e, const std::string& path);

} // namespace kdvlab
