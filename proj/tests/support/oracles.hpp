#pragma once

// Independent reference computations used only by the tests.

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace koopcert::oracle {

/// Gauss-Hermite rule for the probability law N(0, 1/2) (weight e^{-x^2}/sqrt(pi)),
/// built with the Golub-Welsch eigenvalue method. Exact for polynomials of degree < 2n.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;  // sum to 1

    explicit GaussHermite(int n) {
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
        for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(J);
        for (int i = 0; i < n; ++i) {
            nodes.push_back(eig.eigenvalues()[i]);
            const double v = eig.eigenvectors()(0, i);
            weights.push_back(v * v);
        }
    }

    double expect(const std::function<double(double)>& f) const {
        double s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
        return s;
    }
};

/// Power-series polynomial evaluation, coefficients lowest degree first.
inline double poly_eval(const std::vector<double>& c, double x) {
    double r = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
    return r;
}

/// Physicists' Hermite polynomial from its explicit sum
/// H_n(x) = n! sum_k (-1)^k (2x)^{n-2k} / (k! (n-2k)!).
inline double hermite_explicit(int n, double x) {
    double s = 0.0;
    for (int k = 0; 2 * k <= n; ++k)
        s += std::pow(-1.0, k) * std::pow(2.0 * x, n - 2 * k) / (std::tgamma(k + 1.0) * std::tgamma(n - 2 * k + 1.0));
    return std::tgamma(n + 1.0) * s;
}

/// Classical RK4 for z' = M z with step t/steps.
inline Eigen::VectorXd rk4_linear(const Eigen::MatrixXd& M, const Eigen::VectorXd& z0, double t, int steps) {
    const double h = t / steps;
    Eigen::VectorXd z = z0;
    for (int k = 0; k < steps; ++k) {
        const Eigen::VectorXd k1 = M * z;
        const Eigen::VectorXd k2 = M * (z + 0.5 * h * k1);
        const Eigen::VectorXd k3 = M * (z + 0.5 * h * k2);
        const Eigen::VectorXd k4 = M * (z + h * k3);
        z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return z;
}

/// Richardson-extrapolated RK4 solution; `agreement` is the difference between the two
/// resolutions after extrapolation, an a-posteriori accuracy estimate.
inline Eigen::VectorXd richardson_linear(const Eigen::MatrixXd& M, const Eigen::VectorXd& z0, double t, int steps,
                                         double* agreement = nullptr) {
    const Eigen::VectorXd coarse = rk4_linear(M, z0, t, steps);
    const Eigen::VectorXd fine = rk4_linear(M, z0, t, 2 * steps);
    const Eigen::VectorXd extrap = fine + (fine - coarse) / 15.0;
    if (agreement) *agreement = (fine - coarse).norm() / 15.0;
    return extrap;
}

/// Zero-order-hold discretization of x' = a x + b u over a step tau.
inline std::pair<double, double> zoh(double a, double b, double tau) {
    const double ad = std::exp(a * tau);
    const double bd = a == 0.0 ? b * tau : b * std::expm1(a * tau) / a;
    return {ad, bd};
}

}  // namespace koopcert::oracle
