#pragma once

// Uniform grids on the unit torus T = R/Z, real fields and their Fourier
// spectra, and the discrete calculus (derivative, antiderivative, quadrature,
// dealiasing) everything else is built on.
//
// Conventions, fixed project-wide:
//   * the torus has unit length, so wavenumber k carries frequency 2*pi*k;
//   * coeff[k] approximates the line integral  int_0^1 f(x) e^{-2 pi i k x} dx
//     (i.e. the DFT divided by n), stored for k = 0 .. n/2 with negative
//     modes implied by conjugate symmetry;
//   * odd spectral operators (derivative, antiderivative) annihilate the
//     unpaired Nyquist mode k = n/2.

#include <complex>
#include <functional>
#include <vector>

#include "kdvlab/errors.hpp"

namespace kdvlab {

/// An n-point uniform periodic grid on the unit torus; h*n == 1 exactly.
struct TorusGrid {
    int n = 0;
    double h = 0.0;

    /// Validates n >= 8 and n even (real-FFT layout and the 2/3 rule need both).
    static TorusGrid make(int n);

    /// Coordinate of grid point i.
    double x(int i) const { return static_cast<double>(i) / n; }

    bool operator==(const TorusGrid&) const = default;
};

/// Real values sampled at the grid points x_i = i*h.
struct GridField {
    TorusGrid grid;
    std::vector<double> v;

    int n() const { return grid.n; }
    double& operator[](int i) { return v[static_cast<size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<size_t>(i)]; }
};

/// Fourier coefficients of a real field, nonnegative wavenumbers only.
/// coeffs[0] and coeffs[n/2] are real for any real field.
struct SpectrumField {
    int n = 0;
    std::vector<std::complex<double>> coeffs; // size n/2 + 1
};

/// Zero field on an n-point grid.
GridField zero_field(int n);

/// Field with values f(x_i).
GridField field_from(int n, const std::function<double(double)>& f);

SpectrumField to_spectrum(const GridField& f);
GridField to_grid(const SpectrumField& s);

/// (1/n) sum_i f(x_i); the periodic trapezoid rule for int_T f, spectrally
/// accurate for smooth integrands.
double quadrature_mean(const GridField& f);

/// Discrete L2(T) norm, sqrt(int f^2).
double l2_norm(const GridField& f);

/// Spectral derivative: multiplication by 2*pi*i*k. The result is exactly
/// mean-zero (an exact derivative integrates to zero on the torus).
GridField spectral_derivative(const GridField& f);

/// Phi(x) = int_0^x phi, computed spectrally and shifted so Phi(x_0) = 0.
/// Requires |mean(phi)| < mean_zero_tol, else the antiderivative is not
/// periodic; throws NonZeroMean.
GridField antiderivative_from_zero(const GridField& phi);

/// Spectral antiderivative with zero mean (division by 2*pi*i*k, mode 0
/// mapped to 0). This is D^{-1} on the mean-zero subspace.
GridField antiderivative_meanzero(const GridField& phi);

/// Zeroes every coefficient with k > floor(n/3); idempotent.
SpectrumField dealias_23(const SpectrumField& s);

/// Convenience: dealias a grid field in place of its spectrum.
GridField dealias_23(const GridField& f);

/// Band-limited point evaluation at arbitrary x (trigonometric interpolation).
double evaluate_at(const GridField& f, double x);

/// f(. + s) via spectral phase rotation; exact for band-limited fields.
/// The Nyquist coefficient is scaled by cos(pi*n*s), the representable part
/// of its true shift.
GridField shift(const GridField& f, double s);

/// Tolerance below which a field counts as mean-zero (round-off scale at the
/// grid sizes this library targets).
inline constexpr double mean_zero_tol = 1e-10;

namespace detail {
/// Registered-plan FFT front ends. Thread-safe; deterministic plans.
void fft_forward(int n, const double* in, std::complex<double>* out);
void fft_inverse(int n, const std::complex<double>* in, double* out);
} // namespace detail

} // namespace kdvlab
