#include "koopcert/bounds.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

#include "koopcert/errors.hpp"

namespace koopcert {

namespace {

void require_delta(double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidArgument("delta must lie in (0, 1)");
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be positive and finite");
}

void require_nonnegative(double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be nonnegative and finite");
}

// Variance inputs (s for lag-0, s_inf asymptotic) and the dimension factor for a scope.
struct ScopedVariance {
    double s;
    double s_inf;
    double factor;
};

ScopedVariance scoped(const VarianceMatrices& var, int n, const BoundScope& scope) {
    if (var.sigma.rows() != var.sigma.cols() || var.sigma_inf.rows() != var.sigma.rows() ||
        var.sigma_inf.cols() != var.sigma.cols())
        throw InvalidArgument("variance matrices have inconsistent shapes");
    if (scope) {
        const auto [i, j] = *scope;
        if (i < 0 || j < 0 || i >= var.sigma.rows() || j >= var.sigma.cols())
            throw InvalidArgument("bound scope entry out of range");
        return {var.sigma(i, j), var.sigma_inf(i, j), 1.0};
    }
    if (n < 1) throw InvalidArgument("dictionary size must be >= 1");
    return {var.sigma.norm(), var.sigma_inf.norm(), static_cast<double>(n)};
}

double q_of(const std::optional<MixingParams>& mixing, BoundMode mode) {
    if (mode != BoundMode::Ergodic) return 0.0;
    if (!mixing) throw InvalidArgument("ergodic bounds need mixing parameters");
    mixing->validate();
    return mixing->q();
}

// Real-valued sample requirement; +inf if epsilon == 0.
double required_m_real(double epsilon, double delta, const VarianceMatrices& var, int n,
                       const std::optional<MixingParams>& mixing, BoundMode mode) {
    require_delta(delta);
    if (!(epsilon >= 0.0)) throw InvalidArgument("epsilon must be nonnegative");
    const ScopedVariance v = scoped(var, n, {});
    const double scale = v.factor * v.factor / (delta * epsilon * epsilon);
    switch (mode) {
        case BoundMode::Iid: return scale * v.s * v.s;
        case BoundMode::Reversible: return scale * v.s_inf * v.s_inf;
        case BoundMode::Ergodic: {
            const double q = q_of(mixing, mode);
            const double a = scale * v.s_inf * v.s_inf;
            const double b = scale * v.s * v.s * 2.0 * q / ((1.0 - q) * (1.0 - q));
            return 0.5 * (a + std::sqrt(a * a + 4.0 * b));
        }
    }
    return std::numeric_limits<double>::infinity();
}

std::size_t to_count(double m_real) {
    const double m = std::max(1.0, std::ceil(m_real));
    if (!(m < 1.8e19)) throw InvalidArgument("required sample count overflows");
    return static_cast<std::size_t>(m);
}

// Centered autocovariances via zero-padded FFT.
std::vector<double> autocov_fft(const Vector& centered, std::size_t max_lag) {
    const std::size_t m = static_cast<std::size_t>(centered.size());
    std::size_t size = 1;
    while (size < m + max_lag + 1) size <<= 1;
    std::vector<double> padded(size, 0.0);
    for (std::size_t k = 0; k < m; ++k) padded[k] = centered[static_cast<Eigen::Index>(k)];
    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, padded);
    for (auto& c : spectrum) c = std::norm(c);
    std::vector<double> raw;
    fft.inv(raw, spectrum);
    std::vector<double> out(max_lag + 1);
    for (std::size_t l = 0; l <= max_lag; ++l) out[l] = raw[l] / static_cast<double>(m - l);
    return out;
}

}  // namespace

double MixingParams::q() const { return std::exp(-omega * dt); }

void MixingParams::validate() const {
    if (!(M >= 1.0) || !std::isfinite(M)) throw InvalidArgument("mixing constant M must be >= 1");
    require_positive(omega, "mixing rate omega");
    require_positive(dt, "snapshot spacing dt");
}

std::string to_string(Quantity q) { return q == Quantity::C ? "C" : "A"; }

std::string to_string(BoundMode mode) {
    switch (mode) {
        case BoundMode::Iid: return "iid";
        case BoundMode::Ergodic: return "ergodic";
        case BoundMode::Reversible: return "ergodic-reversible";
    }
    return "unknown";
}

std::string to_string(CertificateTarget t) {
    switch (t) {
        case CertificateTarget::C: return "C";
        case CertificateTarget::A: return "A";
        case CertificateTarget::Generator: return "generator";
        case CertificateTarget::Operator: return "operator";
        case CertificateTarget::ControlGenerator: return "control-generator";
    }
    return "unknown";
}

std::vector<double> autocovariance_series(const Vector& values, std::size_t max_lag) {
    const auto m = static_cast<std::size_t>(values.size());
    if (max_lag >= m) throw InvalidArgument("autocovariance lag must be smaller than the series length");
    const Vector centered = values.array() - values.mean();
    if (max_lag < 64) {
        std::vector<double> out(max_lag + 1);
        for (std::size_t l = 0; l <= max_lag; ++l) {
            const auto len = static_cast<Eigen::Index>(m - l);
            out[l] = centered.head(len).dot(centered.segment(static_cast<Eigen::Index>(l), len)) /
                     static_cast<double>(len);
        }
        return out;
    }
    return autocov_fft(centered, max_lag);
}

std::size_t autocovariance_window(const MixingParams& mixing) {
    mixing.validate();
    return static_cast<std::size_t>(std::ceil(std::log(1e3 * mixing.M) / (mixing.omega * mixing.dt)));
}

VarianceMatrices empirical_variance_matrices(const DataSet& data, const Dictionary& dict,
                                             const ControlAffineSystem& system, Quantity quantity,
                                             const MixingParams& mixing, AEstimator estimator) {
    const auto m = static_cast<Eigen::Index>(data.size());
    if (m < 2) throw InvalidArgument("variance estimation needs at least two samples");
    if (data.dim() != dict.dim() || system.dim() != dict.dim())
        throw InvalidArgument("dictionary, data and system dimensions differ");
    const int n = dict.size();
    const int d = dict.dim();
    const bool ergodic = data.mode == SamplingMode::Ergodic;
    std::size_t window = 0;
    if (ergodic) {
        window = autocovariance_window(mixing);
        if (window >= data.size()) {
            std::ostringstream msg;
            msg << "autocovariance window " << window << " exceeds the data length " << data.size()
                << "; collect more data";
            throw InvalidArgument(msg.str());
        }
    }

    Matrix psi(n, m);
    Matrix second;                // L Psi for the standard A estimator
    std::vector<Matrix> factors;  // columns of grad Psi sigma for the Dirichlet form
    const bool dirichlet = quantity == Quantity::A && estimator == AEstimator::DirichletForm;
    if (quantity == Quantity::A && !dirichlet) {
        const LiftedData lifted = lift_generator(dict, data, system);
        psi = lifted.psi_x;
        second = lifted.image;
    } else {
        for (Eigen::Index k = 0; k < m; ++k) dict.values(data.points.col(k), psi.col(k));
    }
    if (dirichlet) {
        if (system.deterministic()) throw InvalidArgument("the Dirichlet-form estimator needs a diffusion term");
        factors.assign(static_cast<std::size_t>(d), Matrix(n, m));
        Matrix grad(n, d), sigma(d, d);
        for (Eigen::Index k = 0; k < m; ++k) {
            dict.gradients(data.points.col(k), grad);
            system.diffusion(data.points.col(k), sigma);
            const Matrix b = grad * sigma;
            for (int r = 0; r < d; ++r) factors[static_cast<std::size_t>(r)].col(k) = b.col(r);
        }
    }

    VarianceMatrices out;
    out.quantity = quantity;
    out.sigma.resize(n, n);
    out.sigma_inf.resize(n, n);
    out.window = window;
    std::ostringstream src;
    if (ergodic)
        src << "empirical(window=" << window << ")";
    else
        src << "empirical(iid)";
    out.source = src.str();

    const bool symmetric = quantity == Quantity::C || dirichlet;
    Vector series(m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (symmetric && j < i) {
                out.sigma(i, j) = out.sigma(j, i);
                out.sigma_inf(i, j) = out.sigma_inf(j, i);
                continue;
            }
            if (quantity == Quantity::C) {
                series = psi.row(i).cwiseProduct(psi.row(j)).transpose();
            } else if (dirichlet) {
                series.setZero();
                for (const auto& f : factors) series -= 0.5 * f.row(i).cwiseProduct(f.row(j)).transpose();
            } else {
                series = psi.row(i).cwiseProduct(second.row(j)).transpose();
            }
            double var = 0.0;
            double var_inf = 0.0;
            if (ergodic) {
                const std::vector<double> gamma = autocovariance_series(series, window);
                var = gamma[0];
                var_inf = gamma[0] + 2.0 * std::accumulate(gamma.begin() + 1, gamma.end(), 0.0);
                var_inf = mixing.reversible ? std::max(var_inf, var) : std::max(var_inf, 0.0);
            } else {
                var = (series.array() - series.mean()).square().mean();
                var_inf = var;
            }
            out.sigma(i, j) = std::sqrt(std::max(var, 0.0));
            out.sigma_inf(i, j) = std::sqrt(var_inf);
        }
    }
    return out;
}

double remainder_bound(double variance, double q, std::size_t m) {
    require_nonnegative(variance, "variance");
    if (!(q >= 0.0 && q < 1.0)) throw InvalidArgument("q must lie in [0, 1)");
    if (m < 1) throw InvalidArgument("m must be >= 1");
    return 2.0 * variance * q / (static_cast<double>(m) * (1.0 - q) * (1.0 - q));
}

double concentration_bound(const VarianceMatrices& var, int n, std::size_t m, double delta,
                           const std::optional<MixingParams>& mixing, BoundMode mode, BoundScope scope) {
    if (m < 1) throw InvalidArgument("m must be >= 1");
    require_delta(delta);
    const ScopedVariance v = scoped(var, n, scope);
    const double md = static_cast<double>(m);
    const double pre = v.factor / std::sqrt(md * delta);
    switch (mode) {
        case BoundMode::Iid: return pre * v.s;
        case BoundMode::Reversible: return pre * v.s_inf;
        case BoundMode::Ergodic: {
            const double q = q_of(mixing, mode);
            const double tail = 2.0 * q / (md * (1.0 - q) * (1.0 - q));
            return pre * std::sqrt(v.s_inf * v.s_inf + tail * v.s * v.s);
        }
    }
    return std::numeric_limits<double>::infinity();
}

std::pair<double, double> epsilon_delta_transform(double eps_tilde, double delta_tilde, double norm_A,
                                                  double norm_C_inv) {
    require_positive(eps_tilde, "eps_tilde");
    require_delta(delta_tilde);
    require_positive(norm_A, "||A||");
    require_positive(norm_C_inv, "||C^-1||");
    const double ac = norm_A * norm_C_inv;
    const double eps = std::min(1.0, 1.0 / ac) * norm_A * eps_tilde / (2.0 * ac + eps_tilde);
    return {eps, delta_tilde / 3.0};
}

std::size_t samples_for_epsilon(double epsilon, double delta, const VarianceMatrices& var, int n,
                                const std::optional<MixingParams>& mixing, BoundMode mode) {
    require_positive(epsilon, "epsilon");
    return to_count(required_m_real(epsilon, delta, var, n, mixing, mode));
}

SampleRequirement required_samples(double eps_tilde, double delta_tilde, double norm_A, double norm_C_inv,
                                   const VarianceMatrices& sigma_C, const VarianceMatrices& sigma_A, int n,
                                   const std::optional<MixingParams>& mixing, BoundMode mode) {
    const auto [eps, delta] = epsilon_delta_transform(eps_tilde, delta_tilde, norm_A, norm_C_inv);
    SampleRequirement req;
    req.m_C = samples_for_epsilon(eps, delta, sigma_C, n, mixing, mode);
    req.m_A = samples_for_epsilon(eps, delta, sigma_A, n, mixing, mode);
    req.m = std::max(req.m_C, req.m_A);
    ErrorCertificate& cert = req.certificate;
    cert.target = CertificateTarget::Generator;
    cert.epsilon = eps_tilde;
    cert.delta = delta_tilde;
    cert.m = req.m;
    cert.m_is_requirement = true;
    cert.mode = mode;
    cert.norm_A = norm_A;
    cert.norm_C_inv = norm_C_inv;
    cert.sub_epsilon = eps;
    cert.sub_delta = delta;
    cert.variance_source = sigma_C.source;
    cert.mixing = mixing;
    return req;
}

SampleRequirement required_samples(double eps_tilde, double delta_tilde, double norm_A, double norm_C_inv,
                                   const VarianceMatrices& sigma, int n, const std::optional<MixingParams>& mixing,
                                   BoundMode mode) {
    return required_samples(eps_tilde, delta_tilde, norm_A, norm_C_inv, sigma, sigma, n, mixing, mode);
}

ErrorCertificate generator_error_certificate(const GalerkinPair& pair, const VarianceMatrices& sigma_C,
                                             const VarianceMatrices& sigma_A, std::size_t m, double delta_tilde,
                                             const std::optional<MixingParams>& mixing, BoundMode mode,
                                             bool plug_in) {
    if (m < 1) throw InvalidArgument("m must be >= 1");
    require_delta(delta_tilde);
    const int n = pair.size();
    double cond = 0.0;
    double residual = 0.0;
    const Matrix C_inv = solve_mass_system(pair.C, Matrix::Identity(n, n), cond, residual);
    const double inflate = plug_in ? kPlugInInflation : 1.0;
    const double norm_A = inflate * pair.A.norm();
    const double norm_C_inv = inflate * C_inv.norm();
    require_positive(norm_A, "||A||");

    const double md = static_cast<double>(m);
    auto satisfied = [&](double eps_tilde) {
        const auto [eps, delta] = epsilon_delta_transform(eps_tilde, delta_tilde, norm_A, norm_C_inv);
        return md >= std::ceil(required_m_real(eps, delta, sigma_C, n, mixing, mode)) &&
               md >= std::ceil(required_m_real(eps, delta, sigma_A, n, mixing, mode));
    };

    const double ac = norm_A * norm_C_inv;
    const double eps_sup = std::min(1.0, 1.0 / ac) * norm_A;
    const double delta = delta_tilde / 3.0;
    const double needed = std::max(concentration_bound(sigma_C, n, m, delta, mixing, mode),
                                   concentration_bound(sigma_A, n, m, delta, mixing, mode));
    if (!(needed < eps_sup)) {
        std::ostringstream msg;
        msg << "m = " << m << " is too small for a generator certificate (needs concentration radius " << needed
            << " below " << eps_sup << ")";
        throw InvalidArgument(msg.str());
    }

    double hi = 1.0;
    int guard = 0;
    while (!satisfied(hi)) {
        hi *= 2.0;
        if (++guard > 2000) throw NumericalFailure("certificate bracket search did not terminate");
    }
    double lo = 0.0;
    while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (satisfied(mid))
            hi = mid;
        else
            lo = mid;
    }

    const auto [eps, sub_delta] = epsilon_delta_transform(hi, delta_tilde, norm_A, norm_C_inv);
    ErrorCertificate cert;
    cert.target = CertificateTarget::Generator;
    cert.epsilon = hi;
    cert.delta = delta_tilde;
    cert.m = m;
    cert.m_is_requirement = false;
    cert.mode = mode;
    cert.norm_A = norm_A;
    cert.norm_C_inv = norm_C_inv;
    cert.plug_in = plug_in;
    cert.sub_epsilon = eps;
    cert.sub_delta = sub_delta;
    cert.variance_source = sigma_C.source;
    cert.mixing = mixing;
    return cert;
}

double gronwall_bound(double norm_L, double norm_delta, double z_l1_norm, double t) {
    require_nonnegative(norm_L, "||L||");
    require_nonnegative(norm_delta, "||Delta L||");
    require_nonnegative(z_l1_norm, "||z||_L1");
    require_nonnegative(t, "t");
    return norm_delta * z_l1_norm * std::exp(t * norm_L);
}

double gronwall_bound_initial(double norm_L, double norm_L_tilde, double norm_delta, double z0_norm, double t) {
    require_nonnegative(norm_L, "||L||");
    require_nonnegative(norm_L_tilde, "||L~||");
    require_nonnegative(norm_delta, "||Delta L||");
    require_nonnegative(z0_norm, "||z0||");
    require_nonnegative(t, "t");
    return t * norm_delta * std::exp(t * (norm_L + norm_L_tilde)) * z0_norm;
}

double holder_constant(double p, double omega) {
    if (!(p >= 1.0)) throw InvalidArgument("p must be >= 1");
    if (p == 1.0) return 1.0;
    require_positive(omega, "omega");
    if (std::isinf(p)) return 1.0 / omega;
    const double conj = p / (p - 1.0);
    return std::pow(conj * omega, -1.0 / conj);
}

double refined_trajectory_bound(const Matrix& L, const SemigroupEnvelope& envelope, double norm_delta,
                                double z_lp_norm, double p, double t, int grid_points) {
    if (L.rows() != L.cols() || L.size() == 0) throw InvalidArgument("L must be a nonempty square matrix");
    if (!(envelope.M >= 1.0)) throw InvalidArgument("envelope constant M must be >= 1");
    if (!(envelope.omega >= 0.0)) throw InvalidArgument("envelope rate must be nonnegative");
    require_nonnegative(norm_delta, "||Delta L||");
    require_nonnegative(z_lp_norm, "||z||_Lp");
    require_nonnegative(t, "t");
    if (grid_points < 2) throw InvalidArgument("grid needs at least two points");
    const double c = holder_constant(p, envelope.omega);

    for (int k = 0; k < grid_points; ++k) {
        const double s = t * static_cast<double>(k) / static_cast<double>(grid_points - 1);
        const Matrix E = (s * L).exp();
        const double norm = Eigen::JacobiSVD<Matrix>(E).singularValues()(0);
        const double cap = envelope.M * std::exp(-envelope.omega * s);
        if (norm > cap * (1.0 + 1e-12)) {
            std::ostringstream msg;
            msg << "||exp(sL)|| = " << norm << " exceeds the envelope " << cap << " at s = " << s;
            throw HypothesisViolated(msg.str());
        }
    }
    return envelope.M * c * norm_delta * z_lp_norm;
}

double union_bound_floor(const std::vector<double>& probabilities) {
    double missing = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("probabilities must lie in [0, 1]");
        missing += 1.0 - p;
    }
    return std::max(0.0, 1.0 - missing);
}

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> spd_eigen(const Matrix& C) {
    if (C.rows() != C.cols() || C.size() == 0) throw InvalidArgument("C must be a nonempty square matrix");
    if ((C - C.transpose()).norm() > 1e-12 * C.norm()) throw InvalidArgument("C must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(C);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues().minCoeff() > 0.0))
        throw InvalidArgument("C must be positive definite");
    return eig;
}

}  // namespace

std::pair<double, double> norm_equivalence_factors(const Matrix& C) {
    const auto eig = spd_eigen(C);
    const double ratio = eig.eigenvalues().minCoeff() / eig.eigenvalues().maxCoeff();
    return {std::sqrt(ratio), std::sqrt(1.0 / ratio)};
}

double mass_operator_norm(const Matrix& C, const Matrix& B) {
    if (B.rows() != C.rows() || B.cols() != C.cols()) throw InvalidArgument("B and C must have equal shapes");
    const auto eig = spd_eigen(C);
    const Vector root = eig.eigenvalues().cwiseSqrt();
    const Matrix& V = eig.eigenvectors();
    const Matrix half = V * root.asDiagonal() * V.transpose();
    const Matrix inv_half = V * root.cwiseInverse().asDiagonal() * V.transpose();
    return Eigen::JacobiSVD<Matrix>(half * B * inv_half).singularValues()(0);
}

ControlSamplePlan control_sample_plan(double eps_tilde, double delta_tilde, int n_controls,
                                      const std::vector<double>& sup_norms,
                                      const std::vector<SystemBoundInputs>& systems) {
    require_positive(eps_tilde, "eps_tilde");
    require_delta(delta_tilde);
    if (n_controls < 0) throw InvalidArgument("n_controls must be >= 0");
    if (static_cast<int>(sup_norms.size()) != n_controls)
        throw InvalidArgument("need one sup norm per control channel");
    if (!systems.empty() && static_cast<int>(systems.size()) != n_controls + 1)
        throw InvalidArgument("need bound inputs for e_0..e_{n_c}");
    double total = 0.0;
    for (double s : sup_norms) {
        require_nonnegative(s, "sup norm");
        total += s;
    }
    ControlSamplePlan plan;
    const double k = static_cast<double>(n_controls + 1);
    plan.epsilon = eps_tilde / (k * (1.0 + total));
    plan.delta = delta_tilde / k;
    for (const auto& sys : systems) {
        const auto req = required_samples(plan.epsilon, plan.delta, sys.norm_A, sys.norm_C_inv, sys.sigma_C,
                                          sys.sigma_A, sys.n, sys.mixing, sys.mode);
        plan.m_per_system.push_back(req.m);
        plan.m = std::max(plan.m, req.m);
    }
    return plan;
}

double assembled_error_bound(const std::vector<double>& system_errors, const Vector& alpha) {
    if (static_cast<Eigen::Index>(system_errors.size()) != alpha.size() + 1)
        throw InvalidArgument("need errors for e_0..e_{n_c}");
    double bound = std::abs(1.0 - alpha.sum()) * system_errors[0];
    for (Eigen::Index i = 0; i < alpha.size(); ++i)
        bound += std::abs(alpha[i]) * system_errors[static_cast<std::size_t>(i) + 1];
    return bound;
}

double GeometricAutocovariance::at(std::size_t lag) const {
    double g = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) g += weights[k] * std::pow(ratios[k], static_cast<double>(lag));
    return g;
}

double GeometricAutocovariance::asymptotic_variance() const {
    double s = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double q = ratios[k];
        if (!(q >= 0.0 && q < 1.0)) throw InvalidArgument("autocovariance ratios must lie in [0, 1)");
        s += weights[k] * (1.0 + q) / (1.0 - q);
    }
    return s;
}

double GeometricAutocovariance::remainder(std::size_t m) const {
    if (m < 1) throw InvalidArgument("m must be >= 1");
    const double md = static_cast<double>(m);
    double r = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        const double q = ratios[k];
        if (!(q >= 0.0 && q < 1.0)) throw InvalidArgument("autocovariance ratios must lie in [0, 1)");
        if (q == 0.0) continue;
        const double log_q = std::log(q);
        const double qm1 = std::exp((md - 1.0) * log_q);
        // sum_{l=0}^{m-2} q^l
        const double head = -std::expm1((md - 1.0) * log_q) / (1.0 - q);
        const double tail = qm1 * q / (1.0 - q);                        // sum_{l>=m} q^l
        const double weighted = q / (1.0 - q) * (head - (md - 1.0) * qm1);  // sum_{l=1}^{m-1} l q^l
        r += weights[k] * (2.0 * tail + 2.0 / md * weighted);
    }
    return r;
}

VarianceDecomposition variance_decomposition_check(const GeometricAutocovariance& series, std::size_t m) {
    if (m < 1) throw InvalidArgument("m must be >= 1");
    if (series.weights.size() != series.ratios.size()) throw InvalidArgument("weights and ratios differ in length");
    const double md = static_cast<double>(m);
    double cross = 0.0;
    for (std::size_t l = 1; l < m; ++l) cross += (1.0 - static_cast<double>(l) / md) * series.at(l);
    VarianceDecomposition out;
    out.direct = (series.at(0) + 2.0 * cross) / md;
    out.reconstructed = (series.asymptotic_variance() - series.remainder(m)) / md;
    return out;
}

}  // namespace koopcert
