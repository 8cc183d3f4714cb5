#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "koopcert/errors.hpp"
#include "koopcert/estimation.hpp"
#include "koopcert/ou_oracle.hpp"
#include "oracles.hpp"

using namespace koopcert;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

std::vector<double> sorted_real_eigenvalues(const Matrix& M) {
    Eigen::EigenSolver<Matrix> es(M);
    std::vector<double> ev;
    for (Eigen::Index i = 0; i < M.rows(); ++i) ev.push_back(es.eigenvalues()[i].real());
    std::sort(ev.begin(), ev.end());
    return ev;
}

DataSet ergodic_ou(std::size_t m, double dt, int substeps, std::uint64_t seed) {
    const auto sys = make_system("ou");
    ErgodicOptions opt;
    opt.burn_in = 0;
    opt.substeps = substeps;
    opt.initial_sampler = invariant_sampler(sys);
    return sample_ergodic(sys, 0, dt, m, opt, seed);
}

}  // namespace

TEST(EmpiricalGalerkin, SinglePoint) {
    DataSet data;
    data.points = Matrix::Constant(1, 1, 2.0);
    const auto pair = empirical_galerkin(lift_generator(*make_dictionary("monomials", 1, 1), data, make_system("ou")));
    EXPECT_EQ(pair.C(0, 0), 4.0);
    EXPECT_EQ(pair.A(0, 0), -4.0);
    EXPECT_EQ(pair.m, 1u);
    EXPECT_EQ(pair.source, PairSource::Empirical);
}

TEST(EmpiricalGalerkin, ZeroDataGivesZeroMatrices) {
    LiftedData lifted;
    lifted.psi_x = Matrix::Zero(3, 5);
    lifted.image = Matrix::Zero(3, 5);
    const auto pair = empirical_galerkin(lifted);
    EXPECT_EQ(pair.C.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(pair.A.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(solve_generator(pair), SingularMassMatrix);
}

TEST(EmpiricalGalerkin, MassMatrixIsSymmetricPsd) {
    const DataSet data = sample_iid(Box{vec({-1, -1}), vec({1, 1})}, 200, 3);
    const auto dict = make_dictionary("monomials", 2, 3);
    const auto sys = make_system("duffing", {{"alpha", -1.0}, {"beta", 1.0}, {"delta", 0.0}});
    const auto pair = empirical_galerkin(lift_generator(*dict, data, sys));
    EXPECT_EQ(pair.C, Matrix(pair.C.transpose()));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(pair.C);
    EXPECT_GE(eig.eigenvalues().minCoeff(), 0.0);
}

TEST(EmpiricalGalerkin, ErgodicOuWithinOracleBound) {
    const std::size_t m = 1000000;
    const double dt = 1e-3;
    const DataSet data = ergodic_ou(m, dt, 1, 21);
    const auto pair = empirical_galerkin(lift_generator(*make_dictionary("monomials", 1, 4), data, make_system("ou")));
    const auto exact = ou_galerkin(4);
    const auto var = ou_variance_matrices(4, Quantity::C, dt);
    const double delta = 0.01;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const double eps = concentration_bound(var, 4, m, delta, ou_mixing(dt), BoundMode::Reversible,
                                                   std::make_pair(i, j));
            EXPECT_LE(std::abs(pair.C(i, j) - exact.C(i, j)), eps) << i << "," << j;
        }
}

TEST(EmpiricalGalerkin, ErrorDecaysAtTheSquareRootRate) {
    const auto sys = make_system("ou");
    const auto dict = make_dictionary("monomials", 1, 4);
    const auto exact = ou_galerkin(4);
    const auto sampler = *invariant_sampler(sys);
    std::vector<double> logm, logc, loga;
    for (std::size_t m : {1000u, 10000u, 100000u}) {
        double ec = 0.0, ea = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const auto pair = empirical_galerkin(lift_generator(*dict, sample_iid(sampler, m, 100 + seed), sys));
            ec += (pair.C - exact.C).norm() / 20.0;
            ea += (pair.A - exact.A).norm() / 20.0;
        }
        logm.push_back(std::log(static_cast<double>(m)));
        logc.push_back(std::log(ec));
        loga.push_back(std::log(ea));
    }
    auto slope = [&](const std::vector<double>& y) {
        const double mx = (logm[0] + logm[1] + logm[2]) / 3, my = (y[0] + y[1] + y[2]) / 3;
        double num = 0, den = 0;
        for (int k = 0; k < 3; ++k) {
            num += (logm[k] - mx) * (y[k] - my);
            den += (logm[k] - mx) * (logm[k] - mx);
        }
        return num / den;
    };
    EXPECT_GE(slope(logc), -0.6);
    EXPECT_LE(slope(logc), -0.4);
    EXPECT_GE(slope(loga), -0.6);
    EXPECT_LE(slope(loga), -0.4);
}

TEST(EmpiricalGalerkin, DirichletFormMatchesStandardEstimatorInExpectation) {
    const auto sys = make_system("ou");
    const auto dict = make_dictionary("monomials", 1, 3);
    const DataSet data = sample_iid(*invariant_sampler(sys), 200000, 17);
    const auto dirichlet = empirical_galerkin_reversible(*dict, data, sys);
    EXPECT_EQ(dirichlet.A, Matrix(dirichlet.A.transpose()));
    EXPECT_LT((dirichlet.A - ou_galerkin(3).A).cwiseAbs().maxCoeff(), 0.1);
}

TEST(SolveGenerator, Examples) {
    const auto l = solve_generator(analytical_pair(Matrix::Constant(1, 1, 4.0), Matrix::Constant(1, 1, -4.0)));
    EXPECT_DOUBLE_EQ(l.L(0, 0), -1.0);
    const Matrix A = (Matrix(2, 2) << 1.0, -2.0, 0.5, 3.0).finished();
    const auto id = solve_generator(analytical_pair(Matrix::Identity(2, 2), A));
    EXPECT_LT((id.L - A).norm(), 1e-15);
    EXPECT_DOUBLE_EQ(id.condition, 1.0);
}

TEST(SolveGenerator, ResidualContract) {
    const auto pair = ou_galerkin(6);
    const auto gen = solve_generator(pair);
    EXPECT_LE((pair.C * gen.L - pair.A).norm(), 1e-10 * pair.A.norm());
    EXPECT_LE(gen.residual, 1e-10 * pair.A.norm());
}

TEST(SolveGenerator, AnalyticalOuPairEigenvaluesMatchQuadrature) {
    const oracle::GaussHermite gh(20);
    Matrix C(4, 4), A(4, 4);
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j) {
            C(i - 1, j - 1) = gh.expect([&](double x) { return std::pow(x, i + j); });
            // L x^j = -j x^j + j (j - 1)/2 x^{j-2}
            A(i - 1, j - 1) = gh.expect([&](double x) {
                return std::pow(x, i) * (-j * std::pow(x, j) + 0.5 * j * (j - 1) * std::pow(x, j - 2));
            });
        }
    const Matrix reference = C.ldlt().solve(A);
    const auto ev = sorted_real_eigenvalues(solve_generator(ou_galerkin(4)).L);
    const auto ev_ref = sorted_real_eigenvalues(reference);
    for (int k = 0; k < 4; ++k) EXPECT_NEAR(ev[k], ev_ref[k], 1e-8);
}

TEST(SolveGenerator, RejectsIllConditionedMass) {
    Matrix C = Matrix::Identity(2, 2);
    C(1, 1) = 1e-13;
    try {
        solve_generator(analytical_pair(C, Matrix::Identity(2, 2)));
        FAIL() << "expected SingularMassMatrix";
    } catch (const SingularMassMatrix& e) {
        EXPECT_GT(e.condition(), kMaxMassCondition);
    }
}

TEST(EstimateKoopman, ExactLinearRegression) {
    const double t = 0.3;
    DataSet data;
    data.mode = SamplingMode::IidLebesgue;
    data.points = (Matrix(1, 4) << -1.0, 0.5, 2.0, 3.0).finished();
    data.partners = data.points * std::exp(-t);
    data.dt = t;
    const auto k = estimate_koopman_operator(lift_operator(*make_dictionary("monomials", 1, 1), data));
    EXPECT_NEAR(k.K(0, 0), std::exp(-t), 1e-15);
    EXPECT_DOUBLE_EQ(k.lag_time, t);
}

TEST(EstimateKoopman, DeterministicPartnersFromSimulation) {
    const auto sys = make_system("ou").without_noise();
    DataSet data = sample_iid(Box{vec({-2}), vec({2})}, 10, 1);
    attach_partners(data, sys, 0, 0.01, 10, 0);
    const auto k = estimate_koopman_operator(lift_operator(*make_dictionary("monomials", 1, 1), data));
    EXPECT_NEAR(k.K(0, 0), std::exp(-0.1), 1e-10);
}

TEST(EstimateKoopman, LagZeroIsIdentity) {
    const DataSet data = ergodic_ou(1000, 1e-2, 1, 2);
    const auto k = estimate_koopman_operator(lift_operator(HermiteDictionary(3), data, 0));
    EXPECT_LT((k.K - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EstimateKoopman, HermiteRoutesAgree) {
    // H_4 products grow like x^8, so the lag estimator is only stable enough up to degree 3 at this length
    const double dt = 0.01, t = 0.05;
    const DataSet data = ergodic_ou(1000000, dt, 10, 33);
    const HermiteDictionary dict(3);
    const auto gen = solve_generator(empirical_galerkin(lift_generator(dict, data, make_system("ou"))));
    const auto op = estimate_koopman_operator(lift_operator(dict, data, 5));
    EXPECT_DOUBLE_EQ(op.lag_time, t);
    const auto from_gen = discretize_generator(gen, t);
    // compare in the orthonormal basis H_l / ||H_l||
    Vector scale(3);
    for (int l = 1; l <= 3; ++l) scale[l - 1] = std::sqrt(hermite_norm_squared(l));
    const Matrix diff = scale.asDiagonal().inverse() * (from_gen.K - op.K) * scale.asDiagonal();
    EXPECT_LT(diff.cwiseAbs().maxCoeff(), 0.1);
    for (int l = 1; l <= 3; ++l) {
        EXPECT_NEAR(op.K(l - 1, l - 1), std::exp(-t * l), 0.02);
        EXPECT_NEAR(gen.L(l - 1, l - 1), -l, 1e-9);
    }
}

TEST(DiscretizeGenerator, Examples) {
    GeneratorEstimate g;
    g.L = Matrix::Constant(1, 1, -1.0);
    EXPECT_NEAR(discretize_generator(g, 0.05).K(0, 0), std::exp(-0.05), 1e-15);
    g.L = Matrix::Zero(3, 3);
    EXPECT_EQ(discretize_generator(g, 0.7).K, Matrix(Matrix::Identity(3, 3)));
    g.L = (Matrix(2, 2) << 0.0, 1.0, 0.0, 0.0).finished();
    EXPECT_LT((discretize_generator(g, 1.0).K - (Matrix(2, 2) << 1.0, 1.0, 0.0, 1.0).finished()).norm(), 1e-15);
    EXPECT_THROW(discretize_generator(g, 0.0), InvalidArgument);
    g.L = Matrix::Constant(2, 2, 100.0);
    EXPECT_THROW(discretize_generator(g, 1.0), NumericalFailure);
}

TEST(DiscretizeGenerator, MatchesRichardsonIntegration) {
    RandomStream rng(8);
    Matrix L(4, 4);
    for (Eigen::Index i = 0; i < L.size(); ++i) L.data()[i] = rng.normal();
    GeneratorEstimate g;
    g.L = L;
    const Matrix K = discretize_generator(g, 0.5).K;
    for (int c = 0; c < 4; ++c) {
        double agreement = 0.0;
        const Vector ref = oracle::richardson_linear(L, Vector::Unit(4, c), 0.5, 400, &agreement);
        EXPECT_LT(agreement, 1e-12);
        EXPECT_LT((K.col(c) - ref).norm(), 1e-11 * (1 + ref.norm()));
    }
}

TEST(FiniteLagGenerator, EulerStepReproducesOperator) {
    KoopmanEstimate k;
    k.K = (Matrix(2, 2) << 0.9, 0.1, -0.05, 0.8).finished();
    k.lag_time = 0.5;
    const auto g = finite_lag_generator(k);
    EXPECT_LT((Matrix::Identity(2, 2) + 0.5 * g.L - k.K).norm(), 1e-15);
}
