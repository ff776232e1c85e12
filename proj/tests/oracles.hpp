#pragma once

// Test-only oracles, deliberately independent of the library's numerics:
// an O(n^2) direct DFT (checks the FFT path), adaptive Simpson quadrature
// (checks the K and J functionals against closed-form integrands), and a
// time-domain Brownian-bridge construction (checks the spectral P0 sampler).

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "kdvlab/rng.hpp"

namespace oracle {

/// Direct DFT: out[k] = (1/n) sum_j f[j] e^{-2 pi i j k / n}, k = 0..n/2.
inline std::vector<std::complex<double>> direct_dft(const std::vector<double>& f) {
    const int n = static_cast<int>(f.size());
    std::vector<std::complex<double>> out(static_cast<size_t>(n / 2 + 1));
    for (int k = 0; k <= n / 2; ++k) {
        std::complex<double> acc{0.0, 0.0};
        for (int j = 0; j < n; ++j) {
            const double th = -2.0 * M_PI * j * k / n;
            acc += f[static_cast<size_t>(j)] * std::complex<double>(std::cos(th), std::sin(th));
        }
        out[static_cast<size_t>(k)] = acc / static_cast<double>(n);
    }
    return out;
}

namespace detail {
inline double simpson(double a, double b, double fa, double fm, double fb) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

inline double adapt(const std::function<double(double)>& f, double a, double b, double fa,
                    double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(a, m, fa, flm, fm);
    const double right = simpson(m, b, fm, frm, fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}
} // namespace detail

/// Adaptive Simpson on [a, b] to absolute tolerance `tol`.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-12) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    return detail::adapt(f, a, b, fa, fm, fb, detail::simpson(a, b, fa, fm, fb), tol, 40);
}

/// Standard Brownian bridge on n+1 points minus its mean: an exact
/// time-domain construction of the circular measure P0 (no spectral step).
inline std::vector<double> bridge_minus_mean(int n, kdvlab::RngStream& rng) {
    std::vector<double> w(static_cast<size_t>(n) + 1, 0.0);
    const double sd = 1.0 / std::sqrt(static_cast<double>(n));
    for (int i = 1; i <= n; ++i) w[static_cast<size_t>(i)] = w[static_cast<size_t>(i - 1)] + sd * rng.normal();
    std::vector<double> path(static_cast<size_t>(n));
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        path[static_cast<size_t>(i)] =
            w[static_cast<size_t>(i)] - (static_cast<double>(i) / n) * w[static_cast<size_t>(n)];
        mean += path[static_cast<size_t>(i)];
    }
    mean /= n;
    for (double& x : path) x -= mean;
    return path;
}

} // namespace oracle
