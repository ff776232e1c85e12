#include "kdvlab/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

namespace kdvlab {

std::vector<double> WeightedEnsemble::normalized_weights() const {
    std::vector<double> p(log_weights.size());
    if (p.empty()) return p;
    const double hi = *std::max_element(log_weights.begin(), log_weights.end());
    double total = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        p[i] = std::exp(log_weights[i] - hi);
        total += p[i];
    }
    for (double& x : p) x /= total;
    return p;
}

double WeightedEnsemble::ess() const {
    const std::vector<double> p = normalized_weights();
    double s2 = 0.0;
    for (double x : p) s2 += x * x;
    return s2 > 0.0 ? 1.0 / s2 : 0.0;
}

WeightedEnsemble uniform_ensemble(std::vector<GridField> members, EnsembleMeta meta) {
    WeightedEnsemble e;
    e.log_weights.assign(members.size(), 0.0);
    e.members = std::move(members);
    e.meta = std::move(meta);
    return e;
}

namespace {

constexpr char kMagic[8] = {'K', 'D', 'V', 'E', 'N', 'S', '1', '\0'};

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    return value;
}

} // namespace

void save_ensemble(const WeightedEnsemble& e, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(out, 1u);
    write_pod<std::uint32_t>(out, 0u);
    write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(e.meta.n));
    write_pod<std::uint64_t>(out, e.size());
    write_pod<std::uint64_t>(out, e.meta.master_seed);
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(e.meta.measure.size()));
    out.write(e.meta.measure.data(), static_cast<std::streamsize>(e.meta.measure.size()));
    for (size_t i = 0; i < e.size(); ++i) {
        const GridField& f = e.members[i];
        out.write(reinterpret_cast<const char*>(f.v.data()),
                  static_cast<std::streamsize>(f.v.size() * sizeof(double)));
        write_pod<double>(out, e.log_weights[i]);
    }
    if (!out) throw IoFailure("short write to " + path);
}

WeightedEnsemble load_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoFailure(path + " is not an ensemble container");
    const auto version = read_pod<std::uint32_t>(in);
    if (version != 1u) throw IoFailure("unsupported container version");
    read_pod<std::uint32_t>(in);
    const auto n = static_cast<int>(read_pod<std::uint64_t>(in));
    const auto count = read_pod<std::uint64_t>(in);
    const auto seed = read_pod<std::uint64_t>(in);
    const auto name_len = read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);

    WeightedEnsemble e;
    e.meta.n = n;
    e.meta.measure = name;
    e.meta.master_seed = seed;
    e.members.reserve(count);
    e.log_weights.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        GridField f = zero_field(n);
        in.read(reinterpret_cast<char*>(f.v.data()),
                static_cast<std::streamsize>(f.v.size() * sizeof(double)));
        const double lw = read_pod<double>(in);
        if (!in) throw IoFailure("truncated ensemble container " + path);
        if (!std::isfinite(lw)) throw IoFailure("non-finite log-weight in " + path);
        e.members.push_back(std::move(f));
        e.log_weights.push_back(lw);
    }
    return e;
}

void export_ensemble_csv(const WeightedEnsemble& e, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoFailure("cannot open " + path + " for writing");
    out << "# measure=" << e.meta.measure << " n=" << e.meta.n
        << " seed=" << e.meta.master_seed << " count=" << e.size() << "\n";
    char buf[32];
    for (size_t i = 0; i < e.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", e.log_weights[i]);
        out << buf;
        for (double x : e.members[i].v) {
            std::snprintf(buf, sizeof(buf), "%.17g", x);
            out << ',' << buf;
        }
        out << '\n';
    }
}

} // namespace kdvlab
