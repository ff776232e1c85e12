#include "kdvlab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

namespace kdvlab {

TorusGrid TorusGrid::make(int n) {
    if (n < 8 || n % 2 != 0)
        throw Error("grid size must be even and >= 8, got " + std::to_string(n));
    return TorusGrid{n, 1.0 / n};
}

GridField zero_field(int n) {
    return GridField{TorusGrid::make(n), std::vector<double>(static_cast<size_t>(n), 0.0)};
}

GridField field_from(int n, const std::function<double(double)>& f) {
    GridField out = zero_field(n);
    for (int i = 0; i < n; ++i) out[i] = f(out.grid.x(i));
    return out;
}

namespace detail {

namespace {

struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan inv = nullptr;
};

// One plan pair per grid size. FFTW_ESTIMATE keeps plan selection
// deterministic; FFTW_UNALIGNED lets the new-array interface run on
// whatever buffers callers hand us.
PlanPair& plans_for(int n) {
    static std::mutex mu;
    static std::map<int, PlanPair> table;
    std::lock_guard<std::mutex> lock(mu);
    auto it = table.find(n);
    if (it == table.end()) {
        std::vector<double> r(static_cast<size_t>(n));
        std::vector<std::complex<double>> c(static_cast<size_t>(n / 2 + 1));
        PlanPair p;
        p.fwd = fftw_plan_dft_r2c_1d(n, r.data(), reinterpret_cast<fftw_complex*>(c.data()),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
        p.inv = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(c.data()), r.data(),
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
        it = table.emplace(n, p).first;
    }
    return it->second;
}

} // namespace

void fft_forward(int n, const double* in, std::complex<double>* out) {
    PlanPair& p = plans_for(n);
    // r2c preserves its input for 1-d out-of-place transforms.
    fftw_execute_dft_r2c(p.fwd, const_cast<double*>(in), reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / n;
    for (int k = 0; k <= n / 2; ++k) out[k] *= scale;
}

void fft_inverse(int n, const std::complex<double>* in, double* out) {
    PlanPair& p = plans_for(n);
    // c2r clobbers its input, so run on a scratch copy.
    std::vector<std::complex<double>> scratch(in, in + n / 2 + 1);
    fftw_execute_dft_c2r(p.inv, reinterpret_cast<fftw_complex*>(scratch.data()), out);
}

} // namespace detail

SpectrumField to_spectrum(const GridField& f) {
    const int n = f.n();
    SpectrumField s;
    s.n = n;
    s.coeffs.resize(static_cast<size_t>(n / 2 + 1));
    detail::fft_forward(n, f.v.data(), s.coeffs.data());
    // Mathematically real entries; pin the representation.
    s.coeffs.front() = s.coeffs.front().real();
    s.coeffs.back() = s.coeffs.back().real();
    return s;
}

GridField to_grid(const SpectrumField& s) {
    GridField f = zero_field(s.n);
    detail::fft_inverse(s.n, s.coeffs.data(), f.v.data());
    return f;
}

double quadrature_mean(const GridField& f) {
    return std::accumulate(f.v.begin(), f.v.end(), 0.0) / f.n();
}

double l2_norm(const GridField& f) {
    double s = 0.0;
    for (double x : f.v) s += x * x;
    return std::sqrt(s / f.n());
}

GridField spectral_derivative(const GridField& f) {
    const int n = f.n();
    SpectrumField s = to_spectrum(f);
    s.coeffs[0] = 0.0;
    for (int k = 1; k < n / 2; ++k)
        s.coeffs[static_cast<size_t>(k)] *= std::complex<double>(0.0, 2.0 * M_PI * k);
    s.coeffs[static_cast<size_t>(n / 2)] = 0.0; // unpaired Nyquist mode
    GridField out = to_grid(s);
    // Enforce the structural identity int_T f_x = 0 exactly, not to round-off.
    const double m = quadrature_mean(out);
    for (double& x : out.v) x -= m;
    return out;
}

GridField antiderivative_meanzero(const GridField& phi) {
    const int n = phi.n();
    SpectrumField s = to_spectrum(phi);
    s.coeffs[0] = 0.0;
    for (int k = 1; k < n / 2; ++k)
        s.coeffs[static_cast<size_t>(k)] /= std::complex<double>(0.0, 2.0 * M_PI * k);
    s.coeffs[static_cast<size_t>(n / 2)] = 0.0;
    return to_grid(s);
}

GridField antiderivative_from_zero(const GridField& phi) {
    const double m = quadrature_mean(phi);
    if (std::abs(m) >= mean_zero_tol) throw NonZeroMean(m);
    GridField out = antiderivative_meanzero(phi);
    const double first = out[0];
    for (double& x : out.v) x -= first;
    return out;
}

SpectrumField dealias_23(const SpectrumField& s) {
    SpectrumField out = s;
    const int cut = s.n / 3;
    for (int k = cut + 1; k <= s.n / 2; ++k) out.coeffs[static_cast<size_t>(k)] = 0.0;
    return out;
}

GridField dealias_23(const GridField& f) {
    return to_grid(dealias_23(to_spectrum(f)));
}

double evaluate_at(const GridField& f, double x) {
    const int n = f.n();
    SpectrumField s = to_spectrum(f);
    double acc = s.coeffs[0].real();
    for (int k = 1; k < n / 2; ++k) {
        const double th = 2.0 * M_PI * k * x;
        acc += 2.0 * (s.coeffs[static_cast<size_t>(k)].real() * std::cos(th) -
                      s.coeffs[static_cast<size_t>(k)].imag() * std::sin(th));
    }
    acc += s.coeffs[static_cast<size_t>(n / 2)].real() * std::cos(M_PI * n * x);
    return acc;
}

GridField shift(const GridField& f, double s) {
    const int n = f.n();
    SpectrumField sp = to_spectrum(f);
    for (int k = 1; k < n / 2; ++k) {
        const double th = 2.0 * M_PI * k * s;
        sp.coeffs[static_cast<size_t>(k)] *= std::complex<double>(std::cos(th), std::sin(th));
    }
    sp.coeffs[static_cast<size_t>(n / 2)] *= std::cos(M_PI * n * s);
    return to_grid(sp);
}

} // namespace kdvlab
