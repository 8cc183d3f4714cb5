#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "koopcert/bounds.hpp"
#include "koopcert/errors.hpp"
#include "koopcert/ou_oracle.hpp"
#include "oracles.hpp"

using namespace koopcert;

namespace {

VarianceMatrices uniform_variance(int n, double frob, double frob_inf) {
    VarianceMatrices v;
    v.sigma = Matrix::Constant(n, n, frob / n);
    v.sigma_inf = Matrix::Constant(n, n, frob_inf / n);
    v.source = "synthetic";
    return v;
}

Matrix random_matrix(int n, RandomStream& rng) {
    Matrix M(n, n);
    for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = rng.normal();
    return M;
}

Matrix random_spd(int n, RandomStream& rng) {
    const Matrix G = random_matrix(n, rng);
    return G * G.transpose() + 0.1 * Matrix::Identity(n, n);
}

double spectral_norm(const Matrix& M) { return Eigen::JacobiSVD<Matrix>(M).singularValues()[0]; }

}  // namespace

TEST(MixingParams, QFromRateAndSpacing) {
    const MixingParams p{1.0, 2.0, 0.5, true};
    EXPECT_DOUBLE_EQ(p.q(), std::exp(-1.0));
    EXPECT_THROW((MixingParams{0.5, 1.0, 1.0}.validate()), InvalidArgument);
    EXPECT_THROW((MixingParams{1.0, 0.0, 1.0}.validate()), InvalidArgument);
}

TEST(AutocovarianceSeries, ZeroAndLagZero) {
    const auto zeros = autocovariance_series(Vector::Zero(50), 10);
    for (double g : zeros) EXPECT_EQ(g, 0.0);
    RandomStream rng(1);
    Vector v(500);
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    const auto series = autocovariance_series(v, 3);
    const double var = (v.array() - v.mean()).square().mean();
    EXPECT_NEAR(series[0], var, 1e-14);
    EXPECT_THROW(autocovariance_series(v, 500), InvalidArgument);
}

TEST(AutocovarianceSeries, FftRouteMatchesDirectSums) {
    RandomStream rng(2);
    Vector v(3000);
    double prev = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = prev = 0.9 * prev + rng.normal();
    const auto series = autocovariance_series(v, 200);
    const Vector c = v.array() - v.mean();
    for (std::size_t l : {0u, 1u, 63u, 64u, 150u, 200u}) {
        double s = 0.0;
        for (Eigen::Index k = 0; k + static_cast<Eigen::Index>(l) < c.size(); ++k) s += c[k] * c[k + static_cast<Eigen::Index>(l)];
        s /= static_cast<double>(c.size() - static_cast<Eigen::Index>(l));
        EXPECT_NEAR(series[l], s, 1e-10 * (1 + std::abs(s))) << "lag " << l;
    }
}

TEST(AutocovarianceSeries, OuSquareDecaysAtTwiceTheRate) {
    const double dt = 0.01;
    const auto sys = make_system("ou");
    ErgodicOptions opt;
    opt.burn_in = 0;
    opt.substeps = 10;
    opt.initial_sampler = invariant_sampler(sys);
    const DataSet data = sample_ergodic(sys, 0, dt, 1000000, opt, 4);
    const Vector phi = data.points.row(0).transpose().array().square() - 0.5;
    const auto series = autocovariance_series(phi, 100);
    for (std::size_t l : {0u, 10u, 50u, 100u}) EXPECT_NEAR(series[l], 0.5 * std::exp(-2.0 * l * dt), 0.03) << l;
}

TEST(EmpiricalVariance, IidModeCopiesSigma) {
    const auto sys = make_system("ou");
    const DataSet data = sample_iid(*invariant_sampler(sys), 1000, 3);
    const auto dict = make_dictionary("monomials", 1, 3);
    const auto v = empirical_variance_matrices(data, *dict, sys, Quantity::A, ou_mixing(1e-3));
    EXPECT_EQ(v.sigma, v.sigma_inf);
    EXPECT_EQ(v.sigma.rows(), 3);
}

TEST(EmpiricalVariance, WindowMustFitTheData) {
    const auto sys = make_system("ou");
    ErgodicOptions opt;
    opt.burn_in = 0;
    const DataSet data = sample_ergodic(sys, 0, 1e-3, 5000, opt, 1);
    EXPECT_EQ(autocovariance_window(ou_mixing(1e-3)), 6908u);
    EXPECT_THROW(empirical_variance_matrices(data, *make_dictionary("monomials", 1, 1), sys, Quantity::C, ou_mixing(1e-3)),
                 InvalidArgument);
}

TEST(EmpiricalVariance, OuAsymptoticVarianceOfXSquared) {
    const double dt = 1e-3;
    const auto sys = make_system("ou");
    const auto dict = make_dictionary("monomials", 1, 1);
    const double oracle = ou_asymptotic_variance(1, 1, Quantity::C, dt);
    const double q = std::exp(-2 * dt);
    EXPECT_NEAR(oracle, 0.5 * (1 + q) / (1 - q), 1e-9 * oracle);
    double mean = 0.0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        ErgodicOptions opt;
        opt.burn_in = 0;
        opt.initial_sampler = invariant_sampler(sys);
        const DataSet data = sample_ergodic(sys, 0, dt, 1000000, opt, 500 + seed);
        const auto v = empirical_variance_matrices(data, *dict, sys, Quantity::C, ou_mixing(dt));
        mean += v.sigma_inf(0, 0) * v.sigma_inf(0, 0) / 20.0;
    }
    EXPECT_NEAR(mean, oracle, 0.1 * oracle);
}

TEST(RemainderBound, Examples) {
    EXPECT_DOUBLE_EQ(remainder_bound(1.0, 0.5, 10), 0.4);
    EXPECT_EQ(remainder_bound(1.0, 0.0, 10), 0.0);
    const double q = std::exp(-0.002);
    const double b = remainder_bound(0.5, q, 100000);
    EXPECT_NEAR(b, 2 * 0.5 * q / (1e5 * (1 - q) * (1 - q)), 1e-12 * b);
    EXPECT_NEAR(b, 2.50, 0.01);
    EXPECT_THROW(remainder_bound(1.0, 1.0, 10), InvalidArgument);
}

TEST(RemainderBound, DominatesExactOuRemainders) {
    for (double dt : {1e-3, 1e-2, 0.1, 1.0})
        for (std::size_t m : {1u, 10u, 1000u, 100000u})
            for (int i = 1; i <= 4; ++i)
                for (int j = 1; j <= 4; ++j)
                    for (Quantity qty : {Quantity::C, Quantity::A}) {
                        if (qty == Quantity::A && i + j == 2) continue;
                        const auto model = ou_autocovariance_model(i, j, qty, dt);
                        const double r = model.remainder(m);
                        EXPECT_GE(r, 0.0);
                        EXPECT_LE(r, remainder_bound(ou_variance(i, j, qty), std::exp(-dt), m) * (1 + 1e-12));
                    }
}

TEST(ConcentrationBound, Examples) {
    const auto v = uniform_variance(4, 1.0, 2.0);
    EXPECT_NEAR(concentration_bound(v, 4, 10000, 0.1, {}, BoundMode::Iid), 4 / std::sqrt(1000.0), 1e-15);
    EXPECT_NEAR(concentration_bound(v, 4, 10000, 0.1, {}, BoundMode::Reversible), 0.252982, 1e-6);
    const MixingParams no_memory{1.0, 1.0, 1e6};
    EXPECT_NEAR(concentration_bound(v, 4, 10000, 0.1, no_memory, BoundMode::Ergodic),
                concentration_bound(v, 4, 10000, 0.1, {}, BoundMode::Reversible), 1e-15);
    EXPECT_THROW(concentration_bound(v, 4, 100, 0.1, {}, BoundMode::Ergodic), InvalidArgument);
    EXPECT_THROW(concentration_bound(v, 4, 100, 1.0, {}, BoundMode::Iid), InvalidArgument);
}

TEST(ConcentrationBound, EntrywiseUsesSingleEntry) {
    VarianceMatrices v = uniform_variance(3, 3.0, 3.0);
    v.sigma(1, 2) = 0.7;
    EXPECT_NEAR(concentration_bound(v, 3, 100, 0.5, {}, BoundMode::Iid, std::make_pair(1, 2)), 0.7 / std::sqrt(50.0),
                1e-15);
}

TEST(ConcentrationBound, MonotoneAndReversibleDominance) {
    const double dt = 1e-3;
    const auto var = ou_variance_matrices(4, Quantity::C, dt);
    const auto mix = ou_mixing(dt);
    double prev = INFINITY;
    for (std::size_t m : {10u, 100u, 1000u, 10000u}) {
        const double e = concentration_bound(var, 4, m, 0.1, mix, BoundMode::Ergodic);
        EXPECT_LT(e, prev);
        prev = e;
        EXPECT_LE(concentration_bound(var, 4, m, 0.1, mix, BoundMode::Reversible), e);
    }
    EXPECT_LT(concentration_bound(var, 4, 100, 0.2, mix, BoundMode::Ergodic),
              concentration_bound(var, 4, 100, 0.1, mix, BoundMode::Ergodic));
}

TEST(EpsilonDeltaTransform, Examples) {
    auto [e1, d1] = epsilon_delta_transform(1.0, 0.3, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(e1, 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(d1, 0.1);
    auto [e2, d2] = epsilon_delta_transform(0.8, 0.3, 2.0, 4.0);
    EXPECT_NEAR(e2, 0.125 * 1.6 / 16.8, 1e-15);
    EXPECT_NEAR(e2, 0.0119048, 1e-7);
    (void)d2;
    double prev = INFINITY;
    for (double et : {1.0, 0.1, 0.01, 1e-4}) {
        const double e = epsilon_delta_transform(et, 0.3, 2.0, 4.0).first;
        EXPECT_LT(e, prev);
        prev = e;
    }
}

TEST(RequiredSamples, Examples) {
    const auto v = uniform_variance(4, 1.0, 1.0);
    EXPECT_EQ(samples_for_epsilon(0.1, 0.1, v, 4, {}, BoundMode::Iid), 16000u);
    const auto w = uniform_variance(4, 1.0, 2.5);
    const MixingParams no_memory{1.0, 1.0, 1e6};
    EXPECT_EQ(samples_for_epsilon(0.1, 0.1, w, 4, no_memory, BoundMode::Ergodic),
              samples_for_epsilon(0.1, 0.1, w, 4, {}, BoundMode::Reversible));
}

TEST(RequiredSamples, RoundTripAndMonotone) {
    const double dt = 1e-2;
    const auto vc = ou_variance_matrices(3, Quantity::C, dt);
    const auto va = ou_variance_matrices(3, Quantity::A, dt);
    const auto mix = ou_mixing(dt);
    const auto pair = ou_galerkin(3);
    const double na = pair.A.norm();
    const double nci = pair.C.inverse().norm();
    for (BoundMode mode : {BoundMode::Iid, BoundMode::Reversible, BoundMode::Ergodic}) {
        std::size_t prev = 0;
        for (double et : {1.0, 0.5, 0.1}) {
            const auto req = required_samples(et, 0.3, na, nci, vc, va, 3, mix, mode);
            EXPECT_GT(req.m, prev);
            prev = req.m;
            const double eps = req.certificate.sub_epsilon;
            EXPECT_LE(concentration_bound(vc, 3, req.m, 0.1, mix, mode), eps * (1 + 1e-12));
            EXPECT_LE(concentration_bound(va, 3, req.m, 0.1, mix, mode), eps * (1 + 1e-12));
        }
        EXPECT_LT(required_samples(0.5, 0.3, na, nci, vc, va, 3, mix, mode).m,
                  required_samples(0.5, 0.1, na, nci, vc, va, 3, mix, mode).m);
    }
}

TEST(GeneratorCertificate, SubDeltaAndScaling) {
    const double dt = 1e-2;
    const auto pair = ou_galerkin(3);
    const auto vc = ou_variance_matrices(3, Quantity::C, dt);
    const auto va = ou_variance_matrices(3, Quantity::A, dt);
    const auto mix = ou_mixing(dt);
    const auto c1 = generator_error_certificate(pair, vc, va, 1000000000000, 0.3, mix, BoundMode::Reversible);
    const auto c2 = generator_error_certificate(pair, vc, va, 2000000000000, 0.3, mix, BoundMode::Reversible);
    EXPECT_DOUBLE_EQ(c1.sub_delta, 0.1);
    EXPECT_NEAR(c2.sub_epsilon / c1.sub_epsilon, 1 / std::sqrt(2.0), 1e-9);
    // once sub_epsilon ||C^-1|| is small the transform is nearly linear
    EXPECT_NEAR(c2.epsilon / c1.epsilon, 1 / std::sqrt(2.0), 0.05 / std::sqrt(2.0));
    // the certified m satisfies the requirement at the certified epsilon
    const auto req = required_samples(c1.epsilon, 0.3, c1.norm_A, c1.norm_C_inv, vc, va, 3, mix, BoundMode::Reversible);
    EXPECT_LE(req.m, c1.m);
    const auto req_tighter =
        required_samples(c1.epsilon * (1 - 1e-6), 0.3, c1.norm_A, c1.norm_C_inv, vc, va, 3, mix, BoundMode::Reversible);
    EXPECT_GT(req_tighter.m, c1.m);
    EXPECT_THROW(generator_error_certificate(pair, vc, va, 10, 0.3, mix, BoundMode::Reversible), InvalidArgument);
}

TEST(GeneratorCertificate, PlugInInflatesNorms) {
    const auto pair = ou_galerkin(2);
    const auto vc = ou_variance_matrices(2, Quantity::C, 0.1);
    const auto va = ou_variance_matrices(2, Quantity::A, 0.1);
    const auto exact = generator_error_certificate(pair, vc, va, 100000000, 0.3, ou_mixing(0.1), BoundMode::Reversible);
    const auto plug = generator_error_certificate(pair, vc, va, 100000000, 0.3, ou_mixing(0.1), BoundMode::Reversible, true);
    EXPECT_TRUE(plug.plug_in);
    EXPECT_DOUBLE_EQ(plug.norm_A, 1.5 * exact.norm_A);
    EXPECT_GT(plug.epsilon, exact.epsilon);
}

TEST(GronwallBound, Examples) {
    EXPECT_DOUBLE_EQ(gronwall_bound(0.0, 0.2, 3.0 * 1.5, 1.5), 0.2 * 3.0 * 1.5);
    EXPECT_EQ(gronwall_bound(2.0, 0.2, 0.0, 0.0), 0.0);
    EXPECT_EQ(gronwall_bound_initial(2.0, 2.0, 0.2, 1.0, 0.0), 0.0);
}

TEST(GronwallBound, DominatesRandomPerturbations) {
    RandomStream rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix L = random_matrix(4, rng);
        Matrix E = random_matrix(4, rng);
        E *= 1e-3 / spectral_norm(E);
        const Matrix Lt = L + E;
        Vector z0(4);
        for (int i = 0; i < 4; ++i) z0[i] = rng.normal();
        for (double t : {0.5, 1.0, 2.0}) {
            const int steps = 400;
            const Vector z = oracle::richardson_linear(L, z0, t, steps);
            const Vector zt = oracle::richardson_linear(Lt, z0, t, steps);
            // ||z~||_L1 by the trapezoid rule on a fine grid, rounded up by one grid cell of the maximum
            double l1 = 0.0, zmax = 0.0, prev = z0.norm();
            const int grid = 400;
            Vector zz = z0;
            for (int k = 1; k <= grid; ++k) {
                zz = oracle::rk4_linear(Lt, zz, t / grid, 4);
                const double cur = zz.norm();
                l1 += 0.5 * (prev + cur) * t / grid;
                zmax = std::max(zmax, cur);
                prev = cur;
            }
            l1 += zmax * t / grid;
            const double err = (z - zt).norm();
            EXPECT_LE(err, gronwall_bound(spectral_norm(L), 1e-3, l1, t));
            EXPECT_LE(err, gronwall_bound_initial(spectral_norm(L), spectral_norm(Lt), 1e-3, z0.norm(), t));
        }
    }
}

TEST(HolderConstant, Values) {
    EXPECT_EQ(holder_constant(1.0, 3.0), 1.0);
    EXPECT_DOUBLE_EQ(holder_constant(INFINITY, 2.0), 0.5);
    EXPECT_DOUBLE_EQ(holder_constant(2.0, 1.0), 1 / std::sqrt(2.0));
}

TEST(RefinedTrajectoryBound, Examples) {
    const Matrix L = Matrix::Constant(1, 1, -1.0);
    EXPECT_DOUBLE_EQ(refined_trajectory_bound(L, {1.0, 1.0}, 0.01, 1.0, INFINITY, 5.0), 0.01);
    EXPECT_EQ(refined_trajectory_bound(L, {1.0, 1.0}, 0.0, 1.0, INFINITY, 5.0), 0.0);
    EXPECT_THROW(refined_trajectory_bound(Matrix::Constant(1, 1, 0.5), {1.0, 1.0}, 0.01, 1.0, INFINITY, 5.0),
                 HypothesisViolated);
}

TEST(RefinedTrajectoryBound, DominatesScalarFlows) {
    const Matrix L = Matrix::Constant(1, 1, -1.0);
    double worst = 0.0;
    for (int k = 0; k <= 10000; ++k) {
        const double t = 10.0 * k / 10000;
        worst = std::max(worst, std::exp(-t) - std::exp(-1.1 * t));
    }
    EXPECT_NEAR(worst, std::pow(1.1, -10.0) * (1 - 1 / 1.1), 1e-6);
    const double T = 10.0;
    const double lp_inf = 1.0;
    const double lp_1 = (1 - std::exp(-1.1 * T)) / 1.1;
    const double lp_2 = std::sqrt((1 - std::exp(-2.2 * T)) / 2.2);
    EXPECT_GE(refined_trajectory_bound(L, {1.0, 1.0}, 0.1, lp_inf, INFINITY, T), worst);
    EXPECT_GE(refined_trajectory_bound(L, {1.0, 1.0}, 0.1, lp_1, 1.0, T), worst);
    EXPECT_GE(refined_trajectory_bound(L, {1.0, 1.0}, 0.1, lp_2, 2.0, T), worst);
}

TEST(UnionBoundFloor, Examples) {
    EXPECT_NEAR(union_bound_floor({0.9, 0.9, 0.9}), 0.7, 1e-15);
    EXPECT_DOUBLE_EQ(union_bound_floor({0.95}), 0.95);
    EXPECT_EQ(union_bound_floor({0.1, 0.1}), 0.0);
}

TEST(UnionBoundFloor, ExhaustiveEnumeration) {
    RandomStream rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> atom(6);
        double total = 0.0;
        for (double& a : atom) total += a = rng.uniform();
        for (double& a : atom) a /= total;
        std::vector<std::array<bool, 6>> events(3);
        std::vector<double> probs;
        for (auto& ev : events) {
            double p = 0.0;
            for (int k = 0; k < 6; ++k) {
                ev[k] = rng.uniform() < 0.7;
                if (ev[k]) p += atom[k];
            }
            probs.push_back(std::min(1.0, p));
        }
        double inter = 0.0;
        for (int k = 0; k < 6; ++k)
            if (events[0][k] && events[1][k] && events[2][k]) inter += atom[k];
        EXPECT_GE(inter + 1e-12, union_bound_floor(probs));
    }
}

TEST(NormEquivalence, Examples) {
    auto [lo, hi] = norm_equivalence_factors(Matrix::Identity(3, 3));
    EXPECT_DOUBLE_EQ(lo, 1.0);
    EXPECT_DOUBLE_EQ(hi, 1.0);
    Matrix D = Matrix::Zero(2, 2);
    D(0, 0) = 4;
    D(1, 1) = 1;
    auto [lo2, hi2] = norm_equivalence_factors(D);
    EXPECT_DOUBLE_EQ(lo2, 0.5);
    EXPECT_DOUBLE_EQ(hi2, 2.0);
    EXPECT_THROW(norm_equivalence_factors(-Matrix::Identity(2, 2)), InvalidArgument);
}

TEST(NormEquivalence, BracketsSampledOperatorNorms) {
    RandomStream rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix C = random_spd(4, rng);
        const Matrix B = random_matrix(4, rng);
        double sampled = 0.0;
        for (int s = 0; s < 20000; ++s) {
            Vector c(4);
            for (int i = 0; i < 4; ++i) c[i] = rng.normal();
            const Vector bc = B * c;
            sampled = std::max(sampled, std::sqrt(bc.dot(C * bc) / c.dot(C * c)));
        }
        const double op = mass_operator_norm(C, B);
        const auto [lo, hi] = norm_equivalence_factors(C);
        const double b2 = spectral_norm(B);
        // max over c of c'B'CBc / c'Cc is the top generalized eigenvalue of (B'CB, C)
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(B.transpose() * C * B, C);
        EXPECT_NEAR(op, std::sqrt(ges.eigenvalues().maxCoeff()), 1e-10 * op);
        EXPECT_LE(sampled, op * (1 + 1e-12));
        EXPECT_GE(op, lo * b2 * (1 - 1e-12));
        EXPECT_LE(op, hi * b2 * (1 + 1e-12));
    }
}

TEST(ControlSamplePlan, Examples) {
    const auto plan = control_sample_plan(0.4, 0.2, 1, {1.0}, {});
    EXPECT_DOUBLE_EQ(plan.epsilon, 0.1);
    EXPECT_DOUBLE_EQ(plan.delta, 0.1);
    SystemBoundInputs sys;
    sys.norm_A = 1.0;
    sys.norm_C_inv = 1.0;
    sys.sigma_C = uniform_variance(2, 1.0, 1.0);
    sys.sigma_A = uniform_variance(2, 2.0, 2.0);
    sys.n = 2;
    SystemBoundInputs sys2 = sys;
    sys2.sigma_A = uniform_variance(2, 3.0, 3.0);
    const auto full = control_sample_plan(0.4, 0.2, 1, {1.0}, {sys, sys2});
    ASSERT_EQ(full.m_per_system.size(), 2u);
    EXPECT_LT(full.m_per_system[0], full.m_per_system[1]);
    EXPECT_EQ(full.m, full.m_per_system[1]);
}

TEST(ControlSamplePlan, AssembledErrorStaysWithinBudget) {
    const double eps_tilde = 0.4;
    const auto plan = control_sample_plan(eps_tilde, 0.2, 2, {1.0, 0.5}, {});
    RandomStream rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Matrix> exact, est;
        for (int i = 0; i < 3; ++i) {
            exact.push_back(random_matrix(3, rng));
            Matrix E = random_matrix(3, rng);
            est.push_back(exact.back() + plan.epsilon * E / E.norm());
        }
        Vector alpha(2);
        alpha[0] = 2 * rng.uniform() - 1;
        alpha[1] = 0.5 * (2 * rng.uniform() - 1);
        if (trial == 0) alpha << 1.0, 0.5;
        auto assemble = [&](const std::vector<Matrix>& Ls) {
            return Matrix(Ls[0] + alpha[0] * (Ls[1] - Ls[0]) + alpha[1] * (Ls[2] - Ls[0]));
        };
        const double err = (assemble(est) - assemble(exact)).norm();
        EXPECT_LE(err, assembled_error_bound({plan.epsilon, plan.epsilon, plan.epsilon}, alpha) * (1 + 1e-12));
        EXPECT_LE(err, eps_tilde);
    }
}

TEST(VarianceDecomposition, OuSquareAndDegenerateCases) {
    const auto model = ou_autocovariance_model(1, 1, Quantity::C, 1e-3);
    const auto d = variance_decomposition_check(model, 100);
    EXPECT_NEAR(d.direct, d.reconstructed, 1e-12 * d.direct);
    GeometricAutocovariance white{{2.0}, {0.0}};
    const auto w = variance_decomposition_check(white, 50);
    EXPECT_DOUBLE_EQ(w.direct, 2.0 / 50);
    EXPECT_DOUBLE_EQ(w.reconstructed, 2.0 / 50);
    const auto one = variance_decomposition_check(model, 1);
    EXPECT_NEAR(one.direct, 0.5, 1e-15);
    EXPECT_NEAR(one.reconstructed, 0.5, 1e-12);
}
