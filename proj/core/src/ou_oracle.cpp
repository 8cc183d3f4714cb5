#include "koopcert/ou_oracle.hpp"

#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

#include "koopcert/errors.hpp"

namespace koopcert {

namespace {

using Rational = boost::multiprecision::cpp_rational;
using Integer = boost::multiprecision::cpp_int;

Integer factorial(int n) {
    Integer f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return f;
}

Integer pow2(int n) { return Integer(1) << n; }

// E_mu[x^n] = n! / (2^n (n/2)!) for even n, 0 for odd n.
Rational moment_exact(int n) {
    if (n < 0) throw InvalidArgument("moment order must be >= 0");
    if (n % 2 != 0) return Rational(0);
    return Rational(factorial(n), pow2(n) * factorial(n / 2));
}

// Weights w_k = (n!)^2 / 2^{2n} * 2^{n-2k} / ((k!)^2 (n-2k)!) for n - 2k >= 1,
// i.e. the squared H_{n-2k} coefficients of x^n times their norms.
std::vector<Rational> centered_weights(int n) {
    std::vector<Rational> w;
    const Integer nf = factorial(n);
    for (int k = 0; n - 2 * k >= 1; ++k) {
        const Integer kf = factorial(k);
        w.emplace_back(nf * nf * pow2(n - 2 * k), pow2(2 * n) * kf * kf * factorial(n - 2 * k));
    }
    return w;
}

void require_indices(int i, int j) {
    if (i < 1 || j < 1) throw InvalidArgument("monomial indices start at 1");
}

// Degree of the monomial inside phi_ij and the squared prefactor.
std::pair<int, Rational> phi_shape(int i, int j, Quantity quantity) {
    require_indices(i, j);
    if (quantity == Quantity::C) return {i + j, Rational(1)};
    return {i + j - 2, Rational(i * i * j * j, 4)};
}

}  // namespace

double hermite_value(int degree, double x) {
    if (degree < 0) throw InvalidArgument("Hermite degree must be >= 0");
    double prev = 1.0;
    if (degree == 0) return prev;
    double cur = 2.0 * x;
    for (int n = 1; n < degree; ++n) {
        const double next = 2.0 * x * cur - 2.0 * n * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

double hermite_norm_squared(int degree) {
    if (degree < 0) throw InvalidArgument("Hermite degree must be >= 0");
    return static_cast<double>(pow2(degree) * factorial(degree));
}

std::vector<double> hermite_expand(int n) {
    if (n < 0) throw InvalidArgument("monomial degree must be >= 0");
    std::vector<double> c;
    const Integer nf = factorial(n);
    for (int k = 0; 2 * k <= n; ++k)
        c.push_back(static_cast<double>(Rational(nf, pow2(n) * factorial(k) * factorial(n - 2 * k))));
    return c;
}

double ou_moment(int n) { return static_cast<double>(moment_exact(n)); }

Matrix ou_mass_matrix(int n) {
    if (n < 1) throw InvalidArgument("dictionary size must be >= 1");
    Matrix C(n, n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j) C(i - 1, j - 1) = static_cast<double>(moment_exact(i + j));
    return C;
}

Matrix ou_stiffness_matrix(int n) {
    if (n < 1) throw InvalidArgument("dictionary size must be >= 1");
    Matrix A(n, n);
    for (int i = 1; i <= n; ++i)
        for (int j = 1; j <= n; ++j)
            A(i - 1, j - 1) = static_cast<double>(-Rational(i * j, 2) * moment_exact(i + j - 2));
    return A;
}

GalerkinPair ou_galerkin(int n) {
    GalerkinPair pair = analytical_pair(ou_mass_matrix(n), ou_stiffness_matrix(n), "ou-analytical");
    pair.kind = LiftKind::Generator;
    return pair;
}

GeometricAutocovariance ou_autocovariance_model(int i, int j, Quantity quantity, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    const auto [n, scale] = phi_shape(i, j, quantity);
    GeometricAutocovariance model;
    const auto w = centered_weights(n);
    for (std::size_t k = 0; k < w.size(); ++k) {
        model.weights.push_back(static_cast<double>(scale * w[k]));
        model.ratios.push_back(std::exp(-static_cast<double>(n - 2 * static_cast<int>(k)) * dt));
    }
    return model;
}

double ou_autocovariance(int i, int j, Quantity quantity, std::size_t lag, double dt) {
    const auto [n, scale] = phi_shape(i, j, quantity);
    const auto w = centered_weights(n);
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double rate = static_cast<double>(n - 2 * static_cast<int>(k));
        total += static_cast<double>(scale * w[k]) * std::exp(-rate * static_cast<double>(lag) * dt);
    }
    return total;
}

double ou_variance(int i, int j, Quantity quantity) {
    const auto [n, scale] = phi_shape(i, j, quantity);
    Rational total = 0;
    for (const auto& w : centered_weights(n)) total += w;
    return static_cast<double>(scale * total);
}

double ou_asymptotic_variance(int i, int j, Quantity quantity, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("dt must be positive");
    const auto [n, scale] = phi_shape(i, j, quantity);
    const auto w = centered_weights(n);
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double a = static_cast<double>(n - 2 * static_cast<int>(k)) * dt;
        const double one_minus_q = -std::expm1(-a);
        total += static_cast<double>(scale * w[k]) * (2.0 - one_minus_q) / one_minus_q;
    }
    return total;
}

VarianceMatrices ou_variance_matrices(int n, Quantity quantity, double dt) {
    if (n < 1) throw InvalidArgument("dictionary size must be >= 1");
    VarianceMatrices v;
    v.quantity = quantity;
    v.source = "oracle";
    v.sigma.resize(n, n);
    v.sigma_inf.resize(n, n);
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            v.sigma(i - 1, j - 1) = std::sqrt(ou_variance(i, j, quantity));
            v.sigma_inf(i - 1, j - 1) = std::sqrt(ou_asymptotic_variance(i, j, quantity, dt));
        }
    }
    return v;
}

MixingParams ou_mixing(double dt) {
    MixingParams mixing;
    mixing.M = 1.0;
    mixing.omega = 1.0;
    mixing.dt = dt;
    mixing.reversible = true;
    return mixing;
}

}  // namespace koopcert
