#include "koopcert/control.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/SVD>
#include <unsupported/Eigen/MatrixFunctions>

#include "koopcert/errors.hpp"

namespace koopcert {

namespace {

bool has_identity(const Dictionary& dict) {
    for (int idx : dict.identity_map())
        if (idx < 0) return false;
    return true;
}

bool out_of_range(const Vector& z) { return !z.allFinite() || z.cwiseAbs().maxCoeff() > kOverflowGuard; }

void check_horizon(const ControlSignal& control, double h, std::size_t n_steps) {
    const double horizon = h * static_cast<double>(n_steps);
    if (control.start() > 0.0 || control.end() < horizon * (1.0 - 1e-12))
        throw InvalidArgument("control signal does not cover the prediction horizon");
}

Rollout start_rollout(const Vector& z0, std::size_t n_steps, double h, const Dictionary& dict) {
    Rollout r;
    r.times.resize(n_steps + 1);
    for (std::size_t k = 0; k <= n_steps; ++k) r.times[k] = static_cast<double>(k) * h;
    r.lifted = Matrix::Constant(z0.size(), static_cast<Eigen::Index>(n_steps + 1),
                                std::numeric_limits<double>::quiet_NaN());
    r.lifted.col(0) = z0;
    if (has_identity(dict))
        r.states = Matrix::Constant(dict.dim(), static_cast<Eigen::Index>(n_steps + 1),
                                    std::numeric_limits<double>::quiet_NaN());
    return r;
}

void finish_rollout(Rollout& r, const Dictionary& dict) {
    if (r.states.size() == 0) return;
    for (std::size_t k = 0; k <= r.steps_completed; ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        r.states.col(col) = project_state(dict, r.lifted.col(col));
    }
}

void lift_projected(const Dictionary& dict, const std::vector<int>& map, const Vector& z, Vector& x,
                    Vector& out) {
    for (std::size_t i = 0; i < map.size(); ++i) x[static_cast<Eigen::Index>(i)] = z[map[i]];
    dict.values(x, out);
}

}  // namespace

// ---------------------------------------------------------------------------
// BilinearSurrogate

BilinearSurrogate::BilinearSurrogate(std::vector<GeneratorEstimate> generators, DictionaryPtr dict,
                                     SteppingPolicy stepping)
    : generators_(std::move(generators)), dict_(std::move(dict)), stepping_(stepping) {
    if (!dict_) throw InvalidArgument("bilinear surrogate needs a dictionary");
    if (generators_.empty()) throw InvalidArgument("bilinear surrogate needs at least L^0");
    if (!(stepping_.h > 0.0)) throw InvalidArgument("surrogate step must be positive");
    const auto n = static_cast<Eigen::Index>(dict_->size());
    for (std::size_t i = 0; i < generators_.size(); ++i) {
        const auto& g = generators_[i];
        if (g.L.rows() != n || g.L.cols() != n)
            throw InvalidArgument("generator matrix size does not match the dictionary");
        if (!g.dictionary.empty() && g.dictionary != dict_->name())
            throw InvalidArgument("generator was estimated with dictionary " + g.dictionary + ", not " +
                                  dict_->name());
        if (g.control_label != static_cast<int>(i))
            throw InvalidArgument("generators must be ordered by control label e_0..e_{n_c}");
    }
    for (std::size_t i = 1; i < generators_.size(); ++i) differences_.push_back(generators_[i].L - generators_[0].L);
    certificates.resize(generators_.size());
}

Matrix BilinearSurrogate::assemble(const Vector& alpha) const {
    if (alpha.size() != n_controls()) throw InvalidArgument("control vector has the wrong dimension");
    if (!alpha.allFinite()) throw InvalidArgument("control vector must be finite");
    int unit = -1;
    bool zero = true;
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        if (alpha[i] == 0.0) continue;
        zero = false;
        if (alpha[i] == 1.0 && unit < 0)
            unit = static_cast<int>(i);
        else
            unit = -2;
    }
    if (zero) return generators_[0].L;
    if (unit >= 0) return generators_[static_cast<std::size_t>(unit) + 1].L;
    Matrix S = Matrix::Zero(size(), size());
    for (Eigen::Index i = 0; i < alpha.size(); ++i) S += alpha[i] * differences_[static_cast<std::size_t>(i)];
    return generators_[0].L + S;
}

BilinearSurrogate build_bilinear(std::vector<GeneratorEstimate> generators, DictionaryPtr dict,
                                 SteppingPolicy stepping) {
    return BilinearSurrogate(std::move(generators), std::move(dict), stepping);
}

Rollout predict_bilinear(const BilinearSurrogate& surrogate, const Vector& z0, const ControlSignal& control,
                         std::size_t n_steps, bool project_and_lift) {
    const Dictionary& dict = surrogate.dictionary();
    if (z0.size() != surrogate.size()) throw InvalidArgument("initial lifted state has the wrong length");
    if (control.n_controls() != surrogate.n_controls()) throw InvalidArgument("control dimension mismatch");
    if (project_and_lift && !has_identity(dict))
        throw InvalidArgument("project-and-lift needs every coordinate function in the dictionary");
    const double h = surrogate.stepping().h;
    check_horizon(control, h, n_steps);

    Rollout r = start_rollout(z0, n_steps, h, dict);
    const auto map = dict.identity_map();
    Vector z = z0, zh(z0.size()), x(dict.dim());
    Vector alpha, last_alpha;
    Matrix step_matrix;  // transpose of L^u, or exp(h (L^u)^T)
    for (std::size_t k = 0; k < n_steps; ++k) {
        alpha = control.value_at(static_cast<double>(k) * h);
        if (k == 0 || alpha != last_alpha) {
            const Matrix Lt = surrogate.assemble(alpha).transpose();
            step_matrix = surrogate.stepping().kind == Stepping::Exponential ? Matrix((h * Lt).exp()) : Lt;
            last_alpha = alpha;
        }
        if (project_and_lift)
            lift_projected(dict, map, z, x, zh);
        else
            zh = z;
        if (surrogate.stepping().kind == Stepping::Euler)
            z = zh + h * (step_matrix * zh);
        else
            z = step_matrix * zh;
        if (out_of_range(z)) {
            r.diverged = true;
            break;
        }
        r.lifted.col(static_cast<Eigen::Index>(k + 1)) = z;
        r.steps_completed = k + 1;
    }
    finish_rollout(r, dict);
    return r;
}

// ---------------------------------------------------------------------------
// eDMDc

LinearSurrogate fit_edmdc(const ControlledSamples& samples, DictionaryPtr dict) {
    if (!dict) throw InvalidArgument("eDMDc needs a dictionary");
    const auto m = samples.X.cols();
    if (m < 1) throw InvalidArgument("eDMDc needs at least one sample");
    if (samples.Y.cols() != m || samples.U.cols() != m) throw InvalidArgument("sample matrices differ in length");
    if (samples.X.rows() != dict->dim() || samples.Y.rows() != dict->dim())
        throw InvalidArgument("sample dimension does not match the dictionary");
    if (!(samples.lag > 0.0)) throw InvalidArgument("eDMDc needs a positive lag");
    const int n = dict->size();
    const auto nc = samples.U.rows();

    Matrix regressors(n + nc, m);
    Matrix targets(n, m);
    for (Eigen::Index k = 0; k < m; ++k) {
        dict->values(samples.X.col(k), regressors.col(k).head(n));
        dict->values(samples.Y.col(k), targets.col(k));
    }
    regressors.bottomRows(nc) = samples.U;
    if (!regressors.allFinite() || !targets.allFinite()) throw NumericalFailure("eDMDc data are not finite");

    Eigen::BDCSVD<Matrix> svd(regressors.transpose(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(1e-10);
    const Matrix W = svd.solve(targets.transpose()).transpose();  // n x (n + nc)

    LinearSurrogate s;
    s.A = W.leftCols(n);
    s.B = W.rightCols(nc);
    s.h = samples.lag;
    s.dict = std::move(dict);
    s.rank = static_cast<int>(svd.rank());
    s.rank_deficient = s.rank < n + nc;
    return s;
}

Rollout predict_edmdc(const LinearSurrogate& surrogate, const Vector& z0, const ControlSignal& control,
                      std::size_t n_steps, bool project_and_lift) {
    if (!surrogate.dict) throw InvalidArgument("eDMDc surrogate has no dictionary");
    const Dictionary& dict = *surrogate.dict;
    if (z0.size() != surrogate.A.rows()) throw InvalidArgument("initial lifted state has the wrong length");
    if (control.n_controls() != surrogate.B.cols()) throw InvalidArgument("control dimension mismatch");
    if (project_and_lift && !has_identity(dict))
        throw InvalidArgument("project-and-lift needs every coordinate function in the dictionary");
    const double h = surrogate.h;
    check_horizon(control, h, n_steps);

    Rollout r = start_rollout(z0, n_steps, h, dict);
    const auto map = dict.identity_map();
    Vector z = z0, zh(z0.size()), x(dict.dim());
    for (std::size_t k = 0; k < n_steps; ++k) {
        const Vector u = control.value_at(static_cast<double>(k) * h);
        zh.noalias() = surrogate.A * z + surrogate.B * u;
        if (out_of_range(zh)) {
            r.diverged = true;
            break;
        }
        if (project_and_lift)
            lift_projected(dict, map, zh, x, z);
        else
            z = zh;
        if (out_of_range(z)) {
            r.diverged = true;
            break;
        }
        r.lifted.col(static_cast<Eigen::Index>(k + 1)) = z;
        r.steps_completed = k + 1;
    }
    finish_rollout(r, dict);
    return r;
}

}  // namespace koopcert
