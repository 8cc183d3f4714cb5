#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "koopcert/dictionary.hpp"
#include "koopcert/dynamics.hpp"
#include "koopcert/estimation.hpp"

namespace koopcert {

/// Exponential stability envelope ||K^t f|| <= M e^{-omega t} ||f|| on mean-zero observables.
struct MixingParams {
    double M = 1.0;
    double omega = 1.0;  // 1/seconds
    double dt = 1.0;     // snapshot spacing, seconds
    bool reversible = false;

    double q() const;
    void validate() const;
};

enum class Quantity { C, A };

std::string to_string(Quantity q);

/// How the A matrix is estimated from data, which fixes the summand phi_ij.
enum class AEstimator {
    Standard,      // phi_ij = psi_i L psi_j
    DirichletForm  // phi_ij = -1/2 (grad psi_i sigma) . (grad psi_j sigma)
};

/// Entrywise standard deviations of phi_ij and their asymptotic counterparts.
struct VarianceMatrices {
    Matrix sigma;      // sigma_{phi_ij}
    Matrix sigma_inf;  // sigma_{phi_ij, infinity}
    Quantity quantity = Quantity::C;
    std::string source;  // "oracle" or "empirical(window=L)"
    std::size_t window = 0;
};

enum class BoundMode { Iid, Ergodic, Reversible };

std::string to_string(BoundMode mode);

/// An (i, j) entry, or the whole matrix in Frobenius norm when absent.
using BoundScope = std::optional<std::pair<int, int>>;

/// Lag-l estimates (1/(m-l)) sum_k phi_k phi_{k+l} of the centered series, l = 0..max_lag.
std::vector<double> autocovariance_series(const Vector& values, std::size_t max_lag);

/// Autocovariance window L = ceil(ln(1e3 M) / (omega dt)).
std::size_t autocovariance_window(const MixingParams& mixing);

/// Sigma_Phi from lag-0 variances; Sigma_Phi,inf from windowed autocovariance sums
/// (ergodic data) or equal to Sigma_Phi (iid data).
VarianceMatrices empirical_variance_matrices(const DataSet& data, const Dictionary& dict,
                                             const ControlAffineSystem& system, Quantity quantity,
                                             const MixingParams& mixing,
                                             AEstimator estimator = AEstimator::Standard);

/// 2 sigma^2 q / (m (1 - q)^2)
double remainder_bound(double variance, double q, std::size_t m);

/// Chebyshev concentration radius epsilon(m, delta).
double concentration_bound(const VarianceMatrices& var, int n, std::size_t m, double delta,
                           const std::optional<MixingParams>& mixing, BoundMode mode, BoundScope scope = {});

/// (epsilon, delta) required of C and A to certify ||C^{-1}A - C~^{-1}A~|| <= eps_tilde
/// with probability 1 - delta_tilde.
std::pair<double, double> epsilon_delta_transform(double eps_tilde, double delta_tilde, double norm_A,
                                                  double norm_C_inv);

/// Samples needed so that concentration_bound(m) <= epsilon at tolerance delta.
std::size_t samples_for_epsilon(double epsilon, double delta, const VarianceMatrices& var, int n,
                                const std::optional<MixingParams>& mixing, BoundMode mode);

enum class CertificateTarget { C, A, Generator, Operator, ControlGenerator };

std::string to_string(CertificateTarget t);

/// Self-describing bound record.
struct ErrorCertificate {
    CertificateTarget target = CertificateTarget::Generator;
    double epsilon = 0.0;  // bound on the target quantity
    double delta = 0.0;    // failure probability
    std::size_t m = 0;
    bool m_is_requirement = false;  // m is a required minimum rather than the m used
    BoundMode mode = BoundMode::Iid;
    double norm_A = 0.0;      // Frobenius
    double norm_C_inv = 0.0;  // Frobenius
    bool plug_in = false;     // norms estimated from data rather than known
    double sub_epsilon = 0.0;  // epsilon demanded of C and A
    double sub_delta = 0.0;    // delta demanded of C and A
    std::string variance_source;
    std::optional<MixingParams> mixing;
};

/// Smallest m for which the generator estimate is within eps_tilde w.p. 1 - delta_tilde.
struct SampleRequirement {
    std::size_t m = 0;
    std::size_t m_C = 0;
    std::size_t m_A = 0;
    ErrorCertificate certificate;
};

SampleRequirement required_samples(double eps_tilde, double delta_tilde, double norm_A, double norm_C_inv,
                                   const VarianceMatrices& sigma_C, const VarianceMatrices& sigma_A, int n,
                                   const std::optional<MixingParams>& mixing, BoundMode mode);

/// Single-quantity variant with one variance bundle used for both C and A.
SampleRequirement required_samples(double eps_tilde, double delta_tilde, double norm_A, double norm_C_inv,
                                   const VarianceMatrices& sigma, int n, const std::optional<MixingParams>& mixing,
                                   BoundMode mode);

/// Inflation applied to empirical ||A||, ||C^{-1}|| when the true values are unknown.
inline constexpr double kPlugInInflation = 1.5;

/// Smallest eps_tilde (bisection, 1e-12 relative) whose sample requirement is met by m.
ErrorCertificate generator_error_certificate(const GalerkinPair& pair, const VarianceMatrices& sigma_C,
                                             const VarianceMatrices& sigma_A, std::size_t m, double delta_tilde,
                                             const std::optional<MixingParams>& mixing, BoundMode mode,
                                             bool plug_in = false);

/// ||Delta L||_2 ||z~||_{L1(0,t)} e^{t ||L||_2}
double gronwall_bound(double norm_L, double norm_delta, double z_l1_norm, double t);

/// t ||Delta L|| e^{t (||L|| + ||L~||)} ||z0||
double gronwall_bound_initial(double norm_L, double norm_L_tilde, double norm_delta, double z0_norm, double t);

/// ||e^{tL}||_2 <= M e^{-omega t}; omega = 0 is the bounded (non-decaying) case.
struct SemigroupEnvelope {
    double M = 1.0;
    double omega = 0.0;
};

/// (p' omega)^{-1/p'} with p' the conjugate exponent; 1 for p = 1, 1/omega for p = inf.
double holder_constant(double p, double omega);

/// M c(p, omega) ||Delta L|| ||z~||_{Lp(0,t)}. The envelope is checked against ||e^{sL}||_2
/// on `grid_points` points of [0, t]; a violation throws HypothesisViolated.
double refined_trajectory_bound(const Matrix& L, const SemigroupEnvelope& envelope, double norm_delta,
                                double z_lp_norm, double p, double t, int grid_points = 201);

/// max(0, 1 - sum (1 - p_i))
double union_bound_floor(const std::vector<double>& probabilities);

/// (sqrt(lmin/lmax), sqrt(lmax/lmin)) of a symmetric positive definite C.
std::pair<double, double> norm_equivalence_factors(const Matrix& C);

/// Operator norm of B in the norm ||c||_C = sqrt(c^T C c).
double mass_operator_norm(const Matrix& C, const Matrix& B);

/// Inputs of the single-system certificate for one constant control e_i.
struct SystemBoundInputs {
    double norm_A = 0.0;
    double norm_C_inv = 0.0;
    VarianceMatrices sigma_C;
    VarianceMatrices sigma_A;
    int n = 0;
    std::optional<MixingParams> mixing;
    BoundMode mode = BoundMode::Iid;
};

struct ControlSamplePlan {
    double epsilon = 0.0;  // per-system generator error
    double delta = 0.0;    // per-system failure probability
    std::vector<std::size_t> m_per_system;
    std::size_t m = 0;
};

ControlSamplePlan control_sample_plan(double eps_tilde, double delta_tilde, int n_controls,
                                      const std::vector<double>& sup_norms,
                                      const std::vector<SystemBoundInputs>& systems);

/// |1 - sum alpha_i| e_0 + sum |alpha_i| e_i, the triangle-inequality bound on the assembled
/// generator error given per-system errors e_0..e_{n_c}.
double assembled_error_bound(const std::vector<double>& system_errors, const Vector& alpha);

/// Autocovariances of the form gamma_l = sum_k w_k q_k^l.
struct GeometricAutocovariance {
    std::vector<double> weights;
    std::vector<double> ratios;  // in [0, 1)

    double at(std::size_t lag) const;
    /// gamma_0 + 2 sum_{l >= 1} gamma_l
    double asymptotic_variance() const;
    /// R^m = 2 sum_{l >= m} gamma_l + (2/m) sum_{l=1}^{m-1} l gamma_l, so that
    /// Var(mean of m samples) = (sigma^2_inf - R^m) / m.
    double remainder(std::size_t m) const;
};

struct VarianceDecomposition {
    double direct = 0.0;         // Var of the m-sample mean from the double sum
    double reconstructed = 0.0;  // (sigma^2_inf - R^m) / m from the closed forms
};

VarianceDecomposition variance_decomposition_check(const GeometricAutocovariance& series, std::size_t m);

}  // namespace koopcert
