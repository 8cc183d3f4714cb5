#pragma once

#include <vector>

#include "koopcert/bounds.hpp"
#include "koopcert/estimation.hpp"

namespace koopcert {

/// Closed-form quantities for dX = -X dt + dW, invariant law mu = N(0, 1/2),
/// with the monomial dictionary x^1..x^N.

/// H_l(x) by the three-term recurrence.
double hermite_value(int degree, double x);

/// <H_l, H_l>_mu = 2^l l!
double hermite_norm_squared(int degree);

/// Coefficients c_k of x^n = sum_k c_k H_{n-2k}, k = 0..floor(n/2).
std::vector<double> hermite_expand(int n);

/// E_mu[x^n]
double ou_moment(int n);

Matrix ou_mass_matrix(int n);
Matrix ou_stiffness_matrix(int n);
/// Analytical (C, A) for monomials x^1..x^n.
GalerkinPair ou_galerkin(int n);

/// Autocovariance series of phi_ij = psi_i psi_j - C_ij (quantity C) or
/// phi_ij = -(ij/2) x^{i+j-2} - A_ij (quantity A) as a geometric mixture in the lag.
GeometricAutocovariance ou_autocovariance_model(int i, int j, Quantity quantity, double dt);

/// <phi_ij, K^{lag dt} phi_ij>_mu
double ou_autocovariance(int i, int j, Quantity quantity, std::size_t lag, double dt);

/// sigma^2_{phi_ij}
double ou_variance(int i, int j, Quantity quantity);

/// sigma^2_{phi_ij, infinity}
double ou_asymptotic_variance(int i, int j, Quantity quantity, double dt);

/// Sigma_Phi and Sigma_Phi,inf (entrywise standard deviations) for an n-term dictionary.
VarianceMatrices ou_variance_matrices(int n, Quantity quantity, double dt);

/// M = 1, omega = 1, reversible.
MixingParams ou_mixing(double dt);

}  // namespace koopcert
