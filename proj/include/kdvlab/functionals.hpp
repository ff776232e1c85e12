#pragma once

// Scalar functionals and transforms on torus fields:
//
//   K(phi)    = int_0^1 exp(2 Phi(x)) dx,  Phi(x) = int_0^x phi
//   J(phi)    = (2 pi)^{-1/2} K(phi) K(-phi) exp( (int phi^2)^2 / 2 )
//   H(phi)    = (1/2) int (phi^4 + phi_x^2)          [mKdV energy]
//   H1(u)     = int u^2
//   E3(u)     = int u^3 + (1/2) int u_x^2            [conserved by KdV]
//   Q(u)      = sum_i u_i^2 + 2 u_i u_{i+1}          [lattice, periodic]
//   mu(phi)   = phi_x + phi^2 - int phi^2            [corrected Miura]
//
// plus the dense determinant of the Miura linearization relative to the
// derivative, det(I + 2 P M_phi P D^{-1}) on the mean-zero Fourier subspace.
//
// Note on E3's sign: the conserved combination for u_t = 6 u u_x - u_xxx is
// int u^3 + (1/2) int u_x^2; E3 stores that combination.

#include <span>
#include <vector>

#include "kdvlab/grid.hpp"

namespace kdvlab {

/// log K(phi) (or log K(-phi) for sign = -1), evaluated via log-sum-exp so
/// large antiderivatives cannot overflow. Throws NonZeroMean.
double log_k_functional(const GridField& phi, int sign = 1);

/// K(phi) = int_0^1 exp(2*sign*Phi). Always >= exp(2*sign*mean(Phi)) > 0.
double k_functional(const GridField& phi, int sign = 1);

/// log J(phi); throws NonZeroMean.
double log_j_weight(const GridField& phi);

/// J(phi); throws Overflow if the value leaves double range (a field far
/// outside the realistic support of P0).
double j_weight(const GridField& phi);

/// Corrected Miura transform; output is mean-zero to round-off.
GridField miura(const GridField& phi);

/// (1/2) int (phi^4 + phi_x^2); nonnegative.
double hamiltonian_mkdv(const GridField& phi);

double h1(const GridField& u);
double e3(const GridField& u);

/// Quadratic form sum u_i^2 + 2 u_i u_{i+1}, periodic indexing. Indefinite.
double lattice_q(std::span<const double> u);

/// det(I + 2 P M_phi P D^{-1}) as a dense (n-1)x(n-1) determinant over the
/// mean-zero Fourier modes (cos/sin pairs k = 1..n/2-1 plus the Nyquist
/// mode). Throws NonZeroMean, and IllConditioned if the LU factorization
/// degenerates. Intended for n <= 512.
double miura_jacobian_det(const GridField& phi);

} // namespace kdvlab
