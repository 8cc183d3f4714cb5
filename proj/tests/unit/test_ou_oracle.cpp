#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "koopcert/ou_oracle.hpp"
#include "oracles.hpp"

using namespace koopcert;

namespace {

const oracle::GaussHermite& quadrature() {
    static const oracle::GaussHermite gh(40);
    return gh;
}

// phi_ij evaluated pointwise, mean-zero under the invariant law
double phi(int i, int j, Quantity q, double x) {
    const auto pair = ou_galerkin(std::max(i, j));
    if (q == Quantity::C) return std::pow(x, i + j) - pair.C(i - 1, j - 1);
    return -0.5 * i * j * std::pow(x, i + j - 2) - pair.A(i - 1, j - 1);
}

}  // namespace

TEST(Hermite, RecurrenceMatchesExplicitSum) {
    for (int l = 0; l <= 8; ++l)
        for (double x : {-2.5, -1.0, 0.0, 0.3, 1.7}) {
            const double ref = oracle::hermite_explicit(l, x);
            EXPECT_NEAR(hermite_value(l, x), ref, 1e-12 * std::max(1.0, std::abs(ref)));
        }
}

TEST(Hermite, OrthogonalUnderInvariantLaw) {
    for (int a = 0; a <= 8; ++a)
        for (int b = 0; b <= 8; ++b) {
            const double g = quadrature().expect([&](double x) { return hermite_value(a, x) * hermite_value(b, x); });
            const double expected = a == b ? hermite_norm_squared(a) : 0.0;
            const double scale = std::sqrt(hermite_norm_squared(a) * hermite_norm_squared(b));
            EXPECT_NEAR(g, expected, 1e-12 * scale) << a << "," << b;
        }
    EXPECT_DOUBLE_EQ(hermite_norm_squared(3), 48.0);
}

TEST(HermiteExpand, LowDegrees) {
    EXPECT_EQ(hermite_expand(1), (std::vector<double>{0.5}));
    EXPECT_EQ(hermite_expand(2), (std::vector<double>{0.25, 0.5}));
    EXPECT_EQ(hermite_expand(3), (std::vector<double>{0.125, 0.75}));
    for (int n = 0; n <= 8; ++n) {
        const auto c = hermite_expand(n);
        for (double x : {-1.3, 0.4, 2.0}) {
            double s = 0.0;
            for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * hermite_value(n - 2 * static_cast<int>(k), x);
            EXPECT_NEAR(s, std::pow(x, n), 1e-12 * std::max(1.0, std::pow(std::abs(x), n)));
        }
    }
}

TEST(OuGalerkin, ClosedFormEntries) {
    const auto pair = ou_galerkin(4);
    EXPECT_DOUBLE_EQ(pair.C(0, 0), 0.5);
    EXPECT_DOUBLE_EQ(pair.C(1, 1), 0.75);
    EXPECT_DOUBLE_EQ(pair.C(3, 3), 105.0 / 16.0);
    EXPECT_DOUBLE_EQ(pair.A(0, 0), -0.5);
    EXPECT_DOUBLE_EQ(pair.A(1, 1), -1.0);
    EXPECT_DOUBLE_EQ(pair.A(3, 3), -15.0);
    EXPECT_EQ(pair.C(0, 1), 0.0);
    EXPECT_EQ(pair.A(1, 2), 0.0);
    EXPECT_EQ(pair.source, PairSource::Analytical);
}

TEST(OuGalerkin, MatchesQuadrature) {
    const int n = 8;
    const auto pair = ou_galerkin(n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) {
            const double c = quadrature().expect([&](double x) { return std::pow(x, i + j); });
            const double a = quadrature().expect([&](double x) {
                const double lpsi = -j * std::pow(x, j) + 0.5 * j * (j - 1) * (j >= 2 ? std::pow(x, j - 2) : 0.0);
                return std::pow(x, i) * lpsi;
            });
            // quadrature round-off is relative to the size of the integrand
            const double scale = std::sqrt(quadrature().expect([&](double x) { return std::pow(x, 2 * i); }) *
                                           quadrature().expect([&](double x) { return std::pow(x, 2 * j); }));
            EXPECT_NEAR(pair.C(i - 1, j - 1), c, 1e-13 * scale * j * j);
            EXPECT_NEAR(pair.A(i - 1, j - 1), a, 1e-13 * scale * j * j);
        }
}

TEST(OuAutocovariance, LagZeroMatchesQuadrature) {
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j)
            for (Quantity q : {Quantity::C, Quantity::A}) {
                const double var = quadrature().expect([&](double x) { return std::pow(phi(i, j, q, x), 2); });
                const double oracle = ou_autocovariance(i, j, q, 0, 1e-3);
                EXPECT_NEAR(oracle, var, 1e-10 * std::max(1.0, var)) << i << "," << j;
                EXPECT_NEAR(ou_variance(i, j, q), var, 1e-10 * std::max(1.0, var));
            }
    EXPECT_DOUBLE_EQ(ou_autocovariance(1, 1, Quantity::C, 0, 1e-3), 0.5);
}

TEST(OuAutocovariance, SquareDecay) {
    EXPECT_NEAR(ou_autocovariance(1, 1, Quantity::C, 1, 1e-3), 0.5 * std::exp(-2e-3), 1e-15);
    EXPECT_NEAR(ou_autocovariance(1, 1, Quantity::C, 1, 1e-3), 0.499001, 1e-6);
}

TEST(OuAutocovariance, LaggedValuesMatchHermiteQuadrature) {
    // <phi, K^t phi> = sum_l c_l^2 ||H_l||^2 e^{-l t} with c_l the Hermite coefficients of phi
    const double t = 0.37;
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j)
            for (Quantity q : {Quantity::C, Quantity::A}) {
                double s = 0.0;
                for (int l = 1; l <= 8; ++l) {
                    const double c = quadrature().expect([&](double x) { return phi(i, j, q, x) * hermite_value(l, x); }) /
                                     hermite_norm_squared(l);
                    s += c * c * hermite_norm_squared(l) * std::exp(-l * t);
                }
                const double oracle = ou_autocovariance(i, j, q, 37, 0.01);
                EXPECT_NEAR(oracle, s, 1e-10 * std::max(1.0, s)) << i << "," << j;
            }
}

// Asymptotic variance of the time average of a polynomial f under the OU chain sampled
// at spacing dt, from the Hermite expansion of f.
double polynomial_asymptotic_variance(const std::function<double(double)>& f, double dt) {
    double s = 0.0;
    for (int l = 1; l <= 16; ++l) {
        const double c = quadrature().expect([&](double x) { return f(x) * hermite_value(l, x); }) / hermite_norm_squared(l);
        const double q = std::exp(-l * dt);
        s += c * c * hermite_norm_squared(l) * (1 + q) / (1 - q);
    }
    return s;
}

TEST(OuAutocovariance, MonteCarloConsistency) {
    const double dt = 0.01;
    const auto sys = make_system("ou");
    ErgodicOptions opt;
    opt.burn_in = 0;
    opt.substeps = 10;
    opt.initial_sampler = invariant_sampler(sys);
    const DataSet data = sample_ergodic(sys, 0, dt, 1000000, opt, 77);
    const Eigen::ArrayXd x = data.points.row(0).transpose().array();
    for (auto [i, j] : std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 2}}) {
        const double c = ou_galerkin(2).C(i - 1, j - 1);
        const Eigen::ArrayXd p = x.pow(i + j) - c;
        const double est = p.square().mean();
        const double se = std::sqrt(
            polynomial_asymptotic_variance([&](double y) { return std::pow(std::pow(y, i + j) - c, 2); }, dt) /
            static_cast<double>(p.size()));
        EXPECT_NEAR(est, ou_autocovariance(i, j, Quantity::C, 0, dt), 4.0 * se) << i << "," << j;
        // lagged products: batch-means standard error
        const Eigen::Index lag = 20, n = p.size() - lag;
        const Eigen::ArrayXd prod = p.head(n) * p.tail(n);
        const Eigen::Index batches = 100, len = n / batches;
        Eigen::ArrayXd means(batches);
        for (Eigen::Index b = 0; b < batches; ++b) means[b] = prod.segment(b * len, len).mean();
        const double se_lag = std::sqrt((means - means.mean()).square().sum() / (batches - 1) / batches);
        EXPECT_NEAR(prod.mean(), ou_autocovariance(i, j, Quantity::C, lag, dt), 4.0 * se_lag) << i << "," << j;
    }
}

TEST(OuAsymptoticVariance, Values) {
    // x^2 - 1/2 has variance 1/2 and lag correlation e^{-2 dt}: sigma^2 = coth(dt) / 2
    EXPECT_NEAR(ou_asymptotic_variance(1, 1, Quantity::C, 1e-3), 0.5 / std::tanh(1e-3), 1e-9);
    EXPECT_NEAR(ou_asymptotic_variance(1, 1, Quantity::C, 50.0), 0.5, 1e-12);
    // truncated series with the geometric closed form
    const double dt = 1e-2;
    double s = ou_autocovariance(1, 3, Quantity::A, 0, dt);
    for (std::size_t l = 1; l < 5000; ++l) s += 2.0 * ou_autocovariance(1, 3, Quantity::A, l, dt);
    EXPECT_NEAR(ou_asymptotic_variance(1, 3, Quantity::A, dt), s, 1e-8 * s);
    for (int i = 1; i <= 4; ++i)
        for (int j = 1; j <= 4; ++j)
            for (Quantity q : {Quantity::C, Quantity::A})
                EXPECT_GE(ou_asymptotic_variance(i, j, q, 1e-2), ou_variance(i, j, q));
}

TEST(OuVarianceMatrices, ShapesAndReversibleDominance) {
    const auto v = ou_variance_matrices(4, Quantity::A, 1e-3);
    EXPECT_EQ(v.sigma.rows(), 4);
    EXPECT_EQ(v.source, "oracle");
    EXPECT_TRUE((v.sigma_inf.array() >= v.sigma.array()).all());
    EXPECT_DOUBLE_EQ(v.sigma(1, 2), std::sqrt(ou_variance(2, 3, Quantity::A)));
    const auto mix = ou_mixing(0.5);
    EXPECT_EQ(mix.M, 1.0);
    EXPECT_EQ(mix.omega, 1.0);
    EXPECT_TRUE(mix.reversible);
}

TEST(OuOracle, CovarianceIdentityForOracleSeries) {
    for (std::size_t m : {1u, 10u, 100u, 1000u})
        for (int i = 1; i <= 4; ++i)
            for (int j = i; j <= 4; ++j) {
                const auto model = ou_autocovariance_model(i, j, Quantity::C, 1e-3);
                const auto d = variance_decomposition_check(model, m);
                EXPECT_NEAR(d.direct, d.reconstructed, 1e-12 * d.direct) << m << " " << i << "," << j;
            }
}
