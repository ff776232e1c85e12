#pragma once

// Reproducible random streams. A stream is identified by (master_seed,
// stream_id); the same pair always reproduces the same draws, and distinct
// stream ids give statistically independent streams, so ensembles can be
// generated in any order (or in parallel) with identical results.
//
// Normal variates use Box-Muller on explicitly constructed uniforms rather
// than std::normal_distribution, whose output is implementation-defined.

#include <cmath>
#include <cstdint>
#include <random>

namespace kdvlab {

struct RngStream {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_id = 0;

    RngStream(std::uint64_t master, std::uint64_t stream)
        : master_seed(master), stream_id(stream), engine_(mix(master, stream)) {}

    /// Uniform in (0,1), never exactly 0 or 1.
    double uniform() {
        return (engine_() >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    /// Standard normal (Box-Muller, second value cached).
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * M_PI * u2);
        have_cached_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    /// Stream for substream `id` of the same master seed.
    RngStream substream(std::uint64_t id) const { return RngStream(master_seed, id); }

private:
    // splitmix64 of (master, stream) -> engine seed.
    static std::uint64_t mix(std::uint64_t master, std::uint64_t stream) {
        std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace kdvlab
