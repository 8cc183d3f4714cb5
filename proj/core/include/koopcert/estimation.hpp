#pragma once

#include <cstddef>
#include <string>

#include "koopcert/dictionary.hpp"
#include "koopcert/dynamics.hpp"

namespace koopcert {

enum class PairSource { Empirical, Analytical };

/// Mass matrix C = <psi_i, psi_j> and stiffness matrix A = <psi_i, L psi_j>
/// (or <psi_i, K^t psi_j> for the operator case).
struct GalerkinPair {
    Matrix C;
    Matrix A;
    PairSource source = PairSource::Analytical;
    LiftKind kind = LiftKind::Generator;
    std::size_t m = 0;      // samples used (empirical only)
    double lag_time = 0.0;  // operator case
    int control_label = 0;
    std::string estimator = "standard";
    std::string dictionary;
    std::string id;

    int size() const noexcept { return static_cast<int>(C.rows()); }
};

/// L = C^{-1} A, so that L psi_j = sum_i L_ij psi_i on the span. Values of the
/// observables along a trajectory therefore evolve with L^T.
struct GeneratorEstimate {
    Matrix L;
    double condition = 0.0;  // lambda_max(C) / lambda_min(C)
    double residual = 0.0;   // ||C L - A||_F
    std::string source;
    std::string dictionary;
    int control_label = 0;

    int size() const noexcept { return static_cast<int>(L.rows()); }
};

struct KoopmanEstimate {
    Matrix K;
    double lag_time = 0.0;
    std::size_t lag = 0;
    double condition = 0.0;
    double residual = 0.0;
    std::string source;
    std::string dictionary;
    int control_label = 0;
};

/// Reject mass matrices above this condition number.
inline constexpr double kMaxMassCondition = 1e12;
/// Reject ||h L||_1 above this in discretize_generator.
inline constexpr double kMaxExponentNorm = 50.0;

/// C = (1/m) Psi(X) Psi(X)^T, A = (1/m) Psi(X) Image^T.
GalerkinPair empirical_galerkin(const LiftedData& lifted);

/// Empirical pair whose A uses the integrated-by-parts (Dirichlet form) estimator
/// A = -(1/(2m)) sum_k (grad Psi(x_k) sigma(x_k)) (grad Psi(x_k) sigma(x_k))^T.
/// Valid for reversible systems sampled from their invariant law; C as in empirical_galerkin.
GalerkinPair empirical_galerkin_reversible(const Dictionary& dict, const DataSet& data,
                                           const ControlAffineSystem& system);

GalerkinPair analytical_pair(Matrix C, Matrix A, std::string id = "analytical");

/// Solves C L = A by symmetric eigendecomposition of C plus one refinement step.
/// Throws SingularMassMatrix if cond(C) > kMaxMassCondition or C is not positive definite.
GeneratorEstimate solve_generator(const GalerkinPair& pair);

/// K = C^{-1} A from operator-lifted data.
KoopmanEstimate estimate_koopman_operator(const LiftedData& lifted);

/// K = exp(h L) by scaling and squaring with a Pade approximant.
KoopmanEstimate discretize_generator(const GeneratorEstimate& gen, double h);

/// (K - I) / t, the generator whose explicit Euler step of size t reproduces K.
GeneratorEstimate finite_lag_generator(const KoopmanEstimate& op);

/// Eigenvalue-based solve shared by the estimators; returns cond(C).
Matrix solve_mass_system(const Matrix& C, const Matrix& A, double& condition, double& residual);

}  // namespace koopcert
