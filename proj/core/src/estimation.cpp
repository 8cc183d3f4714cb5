#include "koopcert/estimation.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

#include "koopcert/errors.hpp"

namespace koopcert {

namespace {

std::string empirical_id(const LiftedData& lifted) {
    std::ostringstream s;
    s << "empirical(m=" << lifted.size() << "," << lifted.dictionary << "," << lifted.dataset << ",e"
      << lifted.control_label << ")";
    return s.str();
}

}  // namespace

GalerkinPair empirical_galerkin(const LiftedData& lifted) {
    const auto m = lifted.psi_x.cols();
    if (m < 1) throw InvalidArgument("empirical_galerkin needs m >= 1");
    if (lifted.image.rows() != lifted.psi_x.rows() || lifted.image.cols() != m)
        throw InvalidArgument("lifted matrices have inconsistent shapes");
    GalerkinPair pair;
    const double inv_m = 1.0 / static_cast<double>(m);
    pair.C.noalias() = inv_m * (lifted.psi_x * lifted.psi_x.transpose());
    pair.A.noalias() = inv_m * (lifted.psi_x * lifted.image.transpose());
    pair.source = PairSource::Empirical;
    pair.kind = lifted.kind;
    pair.m = static_cast<std::size_t>(m);
    pair.lag_time = lifted.lag_time;
    pair.control_label = lifted.control_label;
    pair.dictionary = lifted.dictionary;
    pair.id = empirical_id(lifted);
    return pair;
}

GalerkinPair empirical_galerkin_reversible(const Dictionary& dict, const DataSet& data,
                                           const ControlAffineSystem& system) {
    if (data.size() < 1) throw InvalidArgument("empirical_galerkin needs m >= 1");
    if (data.dim() != dict.dim() || system.dim() != dict.dim())
        throw InvalidArgument("dictionary, data and system dimensions differ");
    if (system.deterministic()) throw InvalidArgument("the Dirichlet-form estimator needs a diffusion term");
    const int n = dict.size();
    const int d = dict.dim();
    const auto m = static_cast<Eigen::Index>(data.size());

    Matrix psi(n, m);
    Matrix grad(n, d), sigma(d, d), b(n, d);
    Matrix A = Matrix::Zero(n, n);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto x = data.points.col(k);
        dict.values(x, psi.col(k));
        dict.gradients(x, grad);
        system.diffusion(x, sigma);
        b.noalias() = grad * sigma;
        A.selfadjointView<Eigen::Lower>().rankUpdate(b, -0.5 * inv_m);
    }
    A.triangularView<Eigen::StrictlyUpper>() = A.transpose();

    GalerkinPair pair;
    pair.C.noalias() = inv_m * (psi * psi.transpose());
    pair.A = std::move(A);
    pair.source = PairSource::Empirical;
    pair.kind = LiftKind::Generator;
    pair.m = data.size();
    pair.control_label = data.control_label;
    pair.estimator = "dirichlet-form";
    pair.dictionary = dict.name();
    std::ostringstream s;
    s << "empirical-dirichlet(m=" << data.size() << "," << dict.name() << ")";
    pair.id = s.str();
    if (!pair.C.allFinite() || !pair.A.allFinite()) throw NumericalFailure("Galerkin matrices are not finite");
    return pair;
}

GalerkinPair analytical_pair(Matrix C, Matrix A, std::string id) {
    if (C.rows() != C.cols() || A.rows() != C.rows() || A.cols() != C.cols())
        throw InvalidArgument("Galerkin matrices must be square and of equal size");
    GalerkinPair pair;
    pair.C = std::move(C);
    pair.A = std::move(A);
    pair.source = PairSource::Analytical;
    pair.id = std::move(id);
    return pair;
}

Matrix solve_mass_system(const Matrix& C, const Matrix& A, double& condition, double& residual) {
    if (C.rows() != C.cols() || A.rows() != C.rows()) throw InvalidArgument("mass system has inconsistent shapes");
    if (C.size() == 0) throw InvalidArgument("empty mass matrix");
    if (!C.allFinite() || !A.allFinite()) throw NumericalFailure("mass system contains non-finite entries");
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
    if (eig.info() != Eigen::Success) throw NumericalFailure("eigendecomposition of C failed");
    const double lmin = eig.eigenvalues().minCoeff();
    const double lmax = eig.eigenvalues().maxCoeff();
    condition = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
    if (!(condition <= kMaxMassCondition)) {
        std::ostringstream msg;
        msg << "mass matrix is singular to working precision (condition " << condition << ")";
        throw SingularMassMatrix(msg.str(), condition);
    }
    const Matrix& V = eig.eigenvectors();
    const Vector inv = eig.eigenvalues().cwiseInverse();
    auto apply_inverse = [&](const Matrix& rhs) -> Matrix {
        return V * (inv.asDiagonal() * (V.transpose() * rhs));
    };
    Matrix L = apply_inverse(A);
    const Matrix r = A - C * L;
    L += apply_inverse(r);
    residual = (C * L - A).norm();
    return L;
}

GeneratorEstimate solve_generator(const GalerkinPair& pair) {
    GeneratorEstimate gen;
    gen.L = solve_mass_system(pair.C, pair.A, gen.condition, gen.residual);
    gen.source = pair.id;
    gen.dictionary = pair.dictionary;
    gen.control_label = pair.control_label;
    return gen;
}

KoopmanEstimate estimate_koopman_operator(const LiftedData& lifted) {
    if (lifted.kind != LiftKind::Operator) throw InvalidArgument("operator estimation needs operator-lifted data");
    const GalerkinPair pair = empirical_galerkin(lifted);
    KoopmanEstimate est;
    est.K = solve_mass_system(pair.C, pair.A, est.condition, est.residual);
    est.lag = lifted.lag;
    est.lag_time = lifted.lag_time;
    est.source = pair.id;
    est.dictionary = lifted.dictionary;
    est.control_label = lifted.control_label;
    return est;
}

KoopmanEstimate discretize_generator(const GeneratorEstimate& gen, double h) {
    if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("discretization step must be positive");
    const Matrix hL = h * gen.L;
    if (!hL.allFinite()) throw NumericalFailure("generator matrix is not finite");
    const double norm1 = hL.cwiseAbs().colwise().sum().maxCoeff();
    if (norm1 > kMaxExponentNorm) {
        std::ostringstream msg;
        msg << "||h L||_1 = " << norm1 << " is too large for an accurate matrix exponential";
        throw NumericalFailure(msg.str());
    }
    KoopmanEstimate est;
    est.K = hL.exp();
    est.lag_time = h;
    est.lag = 1;
    est.condition = gen.condition;
    est.source = "exp(h L) of " + gen.source;
    est.dictionary = gen.dictionary;
    est.control_label = gen.control_label;
    return est;
}

GeneratorEstimate finite_lag_generator(const KoopmanEstimate& op) {
    if (!(op.lag_time > 0.0)) throw InvalidArgument("finite-lag generator needs a positive lag time");
    GeneratorEstimate gen;
    gen.L = (op.K - Matrix::Identity(op.K.rows(), op.K.cols())) / op.lag_time;
    gen.condition = op.condition;
    gen.residual = op.residual / op.lag_time;
    gen.source = "finite-lag(" + op.source + ")";
    gen.dictionary = op.dictionary;
    gen.control_label = op.control_label;
    return gen;
}

}  // namespace koopcert
