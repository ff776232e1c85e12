#include "kdvlab/functionals.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace kdvlab {

double log_k_functional(const GridField& phi, int sign) {
    const GridField Phi = antiderivative_from_zero(phi);
    // log mean exp(2 s Phi) = logsumexp(2 s Phi) - log n
    double hi = -std::numeric_limits<double>::infinity();
    for (double x : Phi.v) hi = std::max(hi, 2.0 * sign * x);
    double acc = 0.0;
    for (double x : Phi.v) acc += std::exp(2.0 * sign * x - hi);
    return hi + std::log(acc) - std::log(static_cast<double>(phi.n()));
}

double k_functional(const GridField& phi, int sign) {
    return std::exp(log_k_functional(phi, sign));
}

double log_j_weight(const GridField& phi) {
    GridField sq = phi;
    for (double& x : sq.v) x *= x;
    const double i2 = quadrature_mean(sq);
    return -0.5 * std::log(2.0 * M_PI) + log_k_functional(phi, +1) +
           log_k_functional(phi, -1) + 0.5 * i2 * i2;
}

double j_weight(const GridField& phi) {
    const double lj = log_j_weight(phi);
    if (lj > 700.0) throw Overflow("j_weight exponent " + std::to_string(lj));
    return std::exp(lj);
}

GridField miura(const GridField& phi) {
    const double m = quadrature_mean(phi);
    if (std::abs(m) >= mean_zero_tol) throw NonZeroMean(m);
    GridField out = spectral_derivative(phi);
    GridField sq = phi;
    for (double& x : sq.v) x *= x;
    const double i2 = quadrature_mean(sq);
    for (int i = 0; i < out.n(); ++i) out[i] += sq[i] - i2;
    return out;
}

double hamiltonian_mkdv(const GridField& phi) {
    const GridField dx = spectral_derivative(phi);
    double acc = 0.0;
    for (int i = 0; i < phi.n(); ++i) {
        const double p2 = phi[i] * phi[i];
        acc += p2 * p2 + dx[i] * dx[i];
    }
    return 0.5 * acc / phi.n();
}

double h1(const GridField& u) {
    double acc = 0.0;
    for (double x : u.v) acc += x * x;
    return acc / u.n();
}

double e3(const GridField& u) {
    const GridField dx = spectral_derivative(u);
    double acc = 0.0;
    for (int i = 0; i < u.n(); ++i) acc += u[i] * u[i] * u[i] + 0.5 * dx[i] * dx[i];
    return acc / u.n();
}

double lattice_q(std::span<const double> u) {
    const size_t n = u.size();
    if (n < 3) throw TooShort("lattice_q needs length >= 3");
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += u[i] * u[i] + 2.0 * u[i] * u[(i + 1) % n];
    return acc;
}

namespace {

// Real orthonormal basis of the mean-zero subspace: sqrt(2) cos(2 pi k x),
// sqrt(2) sin(2 pi k x) for k = 1..n/2-1, then cos(pi n x) (Nyquist).
std::vector<GridField> meanzero_basis(int n) {
    std::vector<GridField> basis;
    basis.reserve(static_cast<size_t>(n - 1));
    for (int k = 1; k < n / 2; ++k) {
        basis.push_back(field_from(n, [k](double x) { return std::sqrt(2.0) * std::cos(2.0 * M_PI * k * x); }));
        basis.push_back(field_from(n, [k](double x) { return std::sqrt(2.0) * std::sin(2.0 * M_PI * k * x); }));
    }
    basis.push_back(field_from(n, [n](double x) { return std::cos(M_PI * n * x); }));
    return basis;
}

} // namespace

double miura_jacobian_det(const GridField& phi) {
    const double m = quadrature_mean(phi);
    if (std::abs(m) >= mean_zero_tol) throw NonZeroMean(m);
    const int n = phi.n();
    const int dim = n - 1;
    const std::vector<GridField> basis = meanzero_basis(n);

    Eigen::MatrixXd T(dim, dim);
    for (int j = 0; j < dim; ++j) {
        // column j: (I + 2 P M_phi P D^{-1}) e_j in grid space
        const GridField a = antiderivative_meanzero(basis[static_cast<size_t>(j)]);
        GridField w = a;
        for (int i = 0; i < n; ++i) w[i] *= phi[i];
        const double wm = quadrature_mean(w);
        GridField col = basis[static_cast<size_t>(j)];
        for (int i = 0; i < n; ++i) col[i] += 2.0 * (w[i] - wm);
        for (int i = 0; i < dim; ++i) {
            double dot = 0.0;
            const GridField& e = basis[static_cast<size_t>(i)];
            for (int g = 0; g < n; ++g) dot += col[g] * e[g];
            T(i, j) = dot / n;
        }
    }

    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(T);
    const double det = lu.determinant();
    if (!std::isfinite(det))
        throw IllConditioned("miura_jacobian_det: non-finite determinant");
    // rcond estimate from the LU factors; all digits gone -> refuse to answer
    const double rcond = lu.rcond();
    if (rcond < 1e-15)
        throw IllConditioned("miura_jacobian_det: rcond " + std::to_string(rcond));
    return det;
}

} // namespace kdvlab
