#include "koopcert/dictionary.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "koopcert/errors.hpp"

namespace koopcert {

namespace {

void exponents_of_degree(int dim, int degree, int pos, std::vector<int>& current,
                         std::vector<std::vector<int>>& out) {
    if (pos == dim - 1) {
        current[static_cast<std::size_t>(pos)] = degree;
        out.push_back(current);
        return;
    }
    for (int e = degree; e >= 0; --e) {
        current[static_cast<std::size_t>(pos)] = e;
        exponents_of_degree(dim, degree - e, pos + 1, current, out);
    }
}

// powers(i, e) = x_i^e for e = 0..degree
void fill_powers(const ConstVectorRef& x, int degree, Matrix& powers) {
    powers.resize(x.size(), degree + 1);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        powers(i, 0) = 1.0;
        for (int e = 1; e <= degree; ++e) powers(i, e) = powers(i, e - 1) * x[i];
    }
}

// coefficient * prod_i x_i^{a_i - reduce_i}, zero if any reduced exponent is negative.
double reduced_monomial(const std::vector<int>& a, const Matrix& powers, int k, int l) {
    double coeff = 1.0;
    double prod = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        int e = a[i];
        const int ii = static_cast<int>(i);
        if (ii == k) {
            coeff *= e;
            --e;
        }
        if (ii == l) {
            coeff *= e;
            --e;
        }
        if (e < 0) return 0.0;
        prod *= powers(static_cast<Eigen::Index>(i), e);
    }
    return coeff * prod;
}

void require_dim(const Dictionary& dict, Eigen::Index n) {
    if (n != dict.dim()) throw InvalidArgument("point dimension does not match the dictionary");
}

std::string describe(const DataSet& data) {
    std::ostringstream s;
    s << to_string(data.mode) << ":m=" << data.size() << ":seed=" << data.seed;
    return s.str();
}

// Scratch space for evaluating L psi at many points.
struct GeneratorWorkspace {
    GeneratorWorkspace(int n, int d) : grad(n, d), hess(n, d * d), drift(d), sigma(d, d), diff(d, d) {}
    Matrix grad, hess;
    Vector drift;
    Matrix sigma, diff;
};

void generator_column(const Dictionary& dict, const ControlAffineSystem& system, const ConstVectorRef& x,
                      const Vector& u, GeneratorWorkspace& ws, VectorRef out) {
    dict.gradients(x, ws.grad);
    system.effective_drift(x, u, ws.drift);
    out.noalias() = ws.grad * ws.drift;
    if (!system.deterministic()) {
        dict.hessians(x, ws.hess);
        system.diffusion(x, ws.sigma);
        ws.diff.noalias() = ws.sigma * ws.sigma.transpose();
        const Eigen::Map<const Vector> vec_diff(ws.diff.data(), ws.diff.size());
        out.noalias() += 0.5 * (ws.hess * vec_diff);
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// MonomialDictionary

MonomialDictionary::MonomialDictionary(MonomialSpec spec) : spec_(spec) {
    if (spec_.dim < 1) throw InvalidArgument("monomial dictionary needs dim >= 1");
    if (spec_.degree < 1) throw InvalidArgument("monomial dictionary needs degree >= 1");
    std::vector<int> current(static_cast<std::size_t>(spec_.dim), 0);
    if (spec_.include_constant) exponents_.push_back(current);
    for (int k = 1; k <= spec_.degree; ++k) exponents_of_degree(spec_.dim, k, 0, current, exponents_);
}

std::string MonomialDictionary::name() const {
    std::ostringstream s;
    s << "monomials(d=" << spec_.dim << ",p=" << spec_.degree << (spec_.include_constant ? ",const" : "")
      << ")";
    return s.str();
}

void MonomialDictionary::values(const ConstVectorRef& x, VectorRef out) const {
    thread_local Matrix powers;
    fill_powers(x, spec_.degree, powers);
    for (std::size_t j = 0; j < exponents_.size(); ++j)
        out[static_cast<Eigen::Index>(j)] = reduced_monomial(exponents_[j], powers, -1, -1);
}

void MonomialDictionary::gradients(const ConstVectorRef& x, MatrixRef out) const {
    thread_local Matrix powers;
    fill_powers(x, spec_.degree, powers);
    for (std::size_t j = 0; j < exponents_.size(); ++j)
        for (int k = 0; k < spec_.dim; ++k)
            out(static_cast<Eigen::Index>(j), k) = reduced_monomial(exponents_[j], powers, k, -1);
}

void MonomialDictionary::hessians(const ConstVectorRef& x, MatrixRef out) const {
    thread_local Matrix powers;
    fill_powers(x, spec_.degree, powers);
    const int d = spec_.dim;
    for (std::size_t j = 0; j < exponents_.size(); ++j)
        for (int l = 0; l < d; ++l)
            for (int k = 0; k < d; ++k)
                out(static_cast<Eigen::Index>(j), l * d + k) = reduced_monomial(exponents_[j], powers, k, l);
}

std::vector<int> MonomialDictionary::identity_map() const {
    std::vector<int> map(static_cast<std::size_t>(spec_.dim), -1);
    for (std::size_t j = 0; j < exponents_.size(); ++j) {
        int total = 0;
        int which = -1;
        for (int i = 0; i < spec_.dim; ++i) {
            total += exponents_[j][static_cast<std::size_t>(i)];
            if (exponents_[j][static_cast<std::size_t>(i)] == 1) which = i;
        }
        if (total == 1) map[static_cast<std::size_t>(which)] = static_cast<int>(j);
    }
    return map;
}

// ---------------------------------------------------------------------------
// HermiteDictionary

HermiteDictionary::HermiteDictionary(int max_degree, bool normalized, bool include_constant)
    : lo_(include_constant ? 0 : 1), hi_(max_degree), normalized_(normalized) {
    if (max_degree < 1) throw InvalidArgument("Hermite dictionary needs degree >= 1");
}

std::string HermiteDictionary::name() const {
    std::ostringstream s;
    s << "hermite(" << lo_ << ".." << hi_ << (normalized_ ? ",normalized" : "") << ")";
    return s.str();
}

double HermiteDictionary::scale(int degree) const {
    if (!normalized_) return 1.0;
    return std::sqrt(std::ldexp(std::tgamma(degree + 1.0), degree));
}

void HermiteDictionary::raw(double x, std::vector<double>& h) const {
    h.assign(static_cast<std::size_t>(hi_) + 1, 0.0);
    h[0] = 1.0;
    if (hi_ >= 1) h[1] = 2.0 * x;
    for (int n = 1; n < hi_; ++n)
        h[static_cast<std::size_t>(n) + 1] = 2.0 * x * h[static_cast<std::size_t>(n)] -
                                             2.0 * n * h[static_cast<std::size_t>(n) - 1];
}

void HermiteDictionary::values(const ConstVectorRef& x, VectorRef out) const {
    thread_local std::vector<double> h;
    raw(x[0], h);
    for (int l = lo_; l <= hi_; ++l) out[l - lo_] = h[static_cast<std::size_t>(l)] / scale(l);
}

void HermiteDictionary::gradients(const ConstVectorRef& x, MatrixRef out) const {
    thread_local std::vector<double> h;
    raw(x[0], h);
    for (int l = lo_; l <= hi_; ++l)
        out(l - lo_, 0) = l == 0 ? 0.0 : 2.0 * l * h[static_cast<std::size_t>(l) - 1] / scale(l);
}

void HermiteDictionary::hessians(const ConstVectorRef& x, MatrixRef out) const {
    thread_local std::vector<double> h;
    raw(x[0], h);
    for (int l = lo_; l <= hi_; ++l)
        out(l - lo_, 0) = l < 2 ? 0.0 : 4.0 * l * (l - 1) * h[static_cast<std::size_t>(l) - 2] / scale(l);
}

// ---------------------------------------------------------------------------
// RootDictionary

namespace {

constexpr std::array<double, 2> kRootExponents{0.5, 1.0 / 3.0};

double signed_power(double x, double a) { return std::copysign(std::pow(std::abs(x), a), x); }

}  // namespace

RootDictionary::RootDictionary(int dim) : dim_(dim) {
    if (dim < 1) throw InvalidArgument("root dictionary needs dim >= 1");
}

std::string RootDictionary::name() const {
    std::ostringstream s;
    s << "roots(d=" << dim_ << ")";
    return s.str();
}

void RootDictionary::values(const ConstVectorRef& x, VectorRef out) const {
    for (int r = 0; r < 2; ++r)
        for (int i = 0; i < dim_; ++i) out[r * dim_ + i] = signed_power(x[i], kRootExponents[r]);
}

void RootDictionary::gradients(const ConstVectorRef& x, MatrixRef out) const {
    out.setZero();
    for (int r = 0; r < 2; ++r) {
        const double a = kRootExponents[static_cast<std::size_t>(r)];
        for (int i = 0; i < dim_; ++i) out(r * dim_ + i, i) = a * std::pow(std::abs(x[i]), a - 1.0);
    }
}

void RootDictionary::hessians(const ConstVectorRef& x, MatrixRef out) const {
    out.setZero();
    for (int r = 0; r < 2; ++r) {
        const double a = kRootExponents[static_cast<std::size_t>(r)];
        for (int i = 0; i < dim_; ++i)
            out(r * dim_ + i, i * dim_ + i) = a * (a - 1.0) * signed_power(x[i], a - 2.0);
    }
}

// ---------------------------------------------------------------------------
// StackedDictionary

StackedDictionary::StackedDictionary(std::vector<DictionaryPtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw InvalidArgument("stacked dictionary needs at least one part");
    dim_ = parts_.front()->dim();
    for (const auto& p : parts_) {
        if (!p) throw InvalidArgument("stacked dictionary part is null");
        if (p->dim() != dim_) throw InvalidArgument("stacked dictionary parts have different dimensions");
        offsets_.push_back(size_);
        size_ += p->size();
    }
}

std::string StackedDictionary::name() const {
    std::string s;
    for (const auto& p : parts_) s += (s.empty() ? "" : "+") + p->name();
    return s;
}

void StackedDictionary::values(const ConstVectorRef& x, VectorRef out) const {
    for (std::size_t k = 0; k < parts_.size(); ++k)
        parts_[k]->values(x, out.segment(offsets_[k], parts_[k]->size()));
}

void StackedDictionary::gradients(const ConstVectorRef& x, MatrixRef out) const {
    for (std::size_t k = 0; k < parts_.size(); ++k)
        parts_[k]->gradients(x, out.middleRows(offsets_[k], parts_[k]->size()));
}

void StackedDictionary::hessians(const ConstVectorRef& x, MatrixRef out) const {
    for (std::size_t k = 0; k < parts_.size(); ++k)
        parts_[k]->hessians(x, out.middleRows(offsets_[k], parts_[k]->size()));
}

std::vector<int> StackedDictionary::identity_map() const {
    std::vector<int> map(static_cast<std::size_t>(dim_), -1);
    for (std::size_t k = 0; k < parts_.size(); ++k) {
        const auto part = parts_[k]->identity_map();
        for (std::size_t i = 0; i < map.size(); ++i)
            if (map[i] < 0 && part[i] >= 0) map[i] = offsets_[k] + part[i];
    }
    return map;
}

double StackedDictionary::sampling_exclusion() const {
    double r = 0.0;
    for (const auto& p : parts_) r = std::max(r, p->sampling_exclusion());
    return r;
}

// ---------------------------------------------------------------------------
// FunctionDictionary

FunctionDictionary::FunctionDictionary(int dim, std::vector<Observable> observables, std::vector<int> identity)
    : dim_(dim), observables_(std::move(observables)), identity_(std::move(identity)) {
    if (dim < 1) throw InvalidArgument("function dictionary needs dim >= 1");
    if (observables_.empty()) throw InvalidArgument("function dictionary needs at least one observable");
    for (const auto& o : observables_)
        if (!o.value || !o.gradient || !o.hessian) throw InvalidArgument("observable '" + o.name + "' is incomplete");
    if (identity_.empty()) identity_.assign(static_cast<std::size_t>(dim), -1);
    if (static_cast<int>(identity_.size()) != dim) throw InvalidArgument("identity map has the wrong length");
}

void FunctionDictionary::values(const ConstVectorRef& x, VectorRef out) const {
    for (std::size_t j = 0; j < observables_.size(); ++j) out[static_cast<Eigen::Index>(j)] = observables_[j].value(x);
}

void FunctionDictionary::gradients(const ConstVectorRef& x, MatrixRef out) const {
    Vector g(dim_);
    for (std::size_t j = 0; j < observables_.size(); ++j) {
        observables_[j].gradient(x, g);
        out.row(static_cast<Eigen::Index>(j)) = g.transpose();
    }
}

void FunctionDictionary::hessians(const ConstVectorRef& x, MatrixRef out) const {
    Matrix h(dim_, dim_);
    for (std::size_t j = 0; j < observables_.size(); ++j) {
        observables_[j].hessian(x, h);
        out.row(static_cast<Eigen::Index>(j)) = Eigen::Map<const Vector>(h.data(), h.size()).transpose();
    }
}

// ---------------------------------------------------------------------------

DictionaryPtr make_dictionary(const std::string& kind, int dim, int degree, bool include_constant,
                              bool normalized) {
    if (kind == "monomials") return std::make_shared<MonomialDictionary>(MonomialSpec{dim, degree, include_constant});
    if (kind == "hermite") {
        if (dim != 1) throw InvalidArgument("Hermite dictionary is one-dimensional");
        return std::make_shared<HermiteDictionary>(degree, normalized, include_constant);
    }
    if (kind == "roots") return std::make_shared<RootDictionary>(dim);
    if (kind == "monomials+roots") {
        return std::make_shared<StackedDictionary>(std::vector<DictionaryPtr>{
            std::make_shared<MonomialDictionary>(MonomialSpec{dim, degree, include_constant}),
            std::make_shared<RootDictionary>(dim)});
    }
    throw InvalidArgument("unknown dictionary kind '" + kind + "'");
}

Vector eval_psi(const Dictionary& dict, const Vector& x) {
    require_dim(dict, x.size());
    if (!x.allFinite()) throw InvalidArgument("eval_psi needs a finite point");
    Vector out(dict.size());
    dict.values(x, out);
    return out;
}

Vector eval_generator_psi(const Dictionary& dict, const ControlAffineSystem& system, const Vector& x,
                          const Vector& u) {
    require_dim(dict, x.size());
    if (system.dim() != dict.dim()) throw InvalidArgument("system and dictionary dimensions differ");
    if (!x.allFinite() || !u.allFinite()) throw InvalidArgument("eval_generator_psi needs finite inputs");
    GeneratorWorkspace ws(dict.size(), dict.dim());
    Vector out(dict.size());
    generator_column(dict, system, x, u, ws, out);
    if (!out.allFinite()) throw NumericalFailure("generator evaluation produced non-finite values");
    return out;
}

LiftedData lift_generator(const Dictionary& dict, const DataSet& data, const ControlAffineSystem& system) {
    require_dim(dict, data.dim());
    if (system.dim() != dict.dim()) throw InvalidArgument("system and dictionary dimensions differ");
    if (data.size() == 0) throw InvalidArgument("cannot lift an empty data set");
    const Vector u = unit_control(system.n_controls(), data.control_label);
    const auto m = static_cast<Eigen::Index>(data.size());

    LiftedData lifted;
    lifted.kind = LiftKind::Generator;
    lifted.dictionary = dict.name();
    lifted.dataset = describe(data);
    lifted.control_label = data.control_label;
    lifted.psi_x.resize(dict.size(), m);
    lifted.image.resize(dict.size(), m);

    GeneratorWorkspace ws(dict.size(), dict.dim());
    for (Eigen::Index k = 0; k < m; ++k) {
        const auto x = data.points.col(k);
        dict.values(x, lifted.psi_x.col(k));
        generator_column(dict, system, x, u, ws, lifted.image.col(k));
    }
    if (!lifted.psi_x.allFinite() || !lifted.image.allFinite())
        throw NumericalFailure("lifted data contains non-finite values");
    return lifted;
}

LiftedData lift_operator(const Dictionary& dict, const DataSet& data, std::size_t lag) {
    require_dim(dict, data.dim());
    LiftedData lifted;
    lifted.kind = LiftKind::Operator;
    lifted.dictionary = dict.name();
    lifted.dataset = describe(data);
    lifted.control_label = data.control_label;

    const Matrix* xs = &data.points;
    Eigen::Index first_y = 0;
    Eigen::Index width = 0;
    const Matrix* ys = nullptr;
    if (data.mode == SamplingMode::Ergodic) {
        if (data.size() <= lag) throw InvalidArgument("operator lifting needs more snapshots than the lag");
        width = static_cast<Eigen::Index>(data.size() - lag);
        ys = &data.points;
        first_y = static_cast<Eigen::Index>(lag);
        lifted.lag = lag;
        lifted.lag_time = static_cast<double>(lag) * data.dt;
    } else {
        if (!data.partners) throw InvalidArgument("operator lifting of iid data needs lagged partners");
        width = static_cast<Eigen::Index>(data.size());
        ys = &*data.partners;
        lifted.lag = 1;
        lifted.lag_time = data.dt;
    }

    lifted.psi_x.resize(dict.size(), width);
    lifted.image.resize(dict.size(), width);
    for (Eigen::Index k = 0; k < width; ++k) {
        dict.values(xs->col(k), lifted.psi_x.col(k));
        dict.values(ys->col(first_y + k), lifted.image.col(k));
    }
    if (!lifted.psi_x.allFinite() || !lifted.image.allFinite())
        throw NumericalFailure("lifted data contains non-finite values");
    return lifted;
}

Vector project_state(const Dictionary& dict, const Vector& z) {
    if (z.size() != dict.size()) throw InvalidArgument("lifted vector has the wrong length");
    const auto map = dict.identity_map();
    Vector x(dict.dim());
    for (std::size_t i = 0; i < map.size(); ++i) {
        if (map[i] < 0) throw InvalidArgument("dictionary does not contain every coordinate function");
        x[static_cast<Eigen::Index>(i)] = z[map[i]];
    }
    return x;
}

DerivativeCheck check_derivatives(const Dictionary& dict, const Matrix& points, double step) {
    require_dim(dict, points.rows());
    const int n = dict.size();
    const int d = dict.dim();
    Vector plus(n), minus(n);
    Matrix grad(n, d), hess(n, d * d), grad_plus(n, d), grad_minus(n, d);
    DerivativeCheck result;
    auto rel = [](double approx, double exact) { return std::abs(approx - exact) / std::max(1.0, std::abs(exact)); };

    for (Eigen::Index k = 0; k < points.cols(); ++k) {
        const Vector x = points.col(k);
        dict.gradients(x, grad);
        dict.hessians(x, hess);
        for (int i = 0; i < d; ++i) {
            const double h = step * std::max(1.0, std::abs(x[i]));
            Vector xp = x, xm = x;
            xp[i] += h;
            xm[i] -= h;
            dict.values(xp, plus);
            dict.values(xm, minus);
            dict.gradients(xp, grad_plus);
            dict.gradients(xm, grad_minus);
            for (int j = 0; j < n; ++j) {
                result.gradient_error =
                    std::max(result.gradient_error, rel((plus[j] - minus[j]) / (2.0 * h), grad(j, i)));
                for (int l = 0; l < d; ++l) {
                    const double fd = (grad_plus(j, l) - grad_minus(j, l)) / (2.0 * h);
                    result.hessian_error = std::max(result.hessian_error, rel(fd, hess(j, i * d + l)));
                }
            }
        }
    }
    return result;
}

GramSpectrum gram_spectrum(const Dictionary& dict, const Region& region, std::size_t n, std::uint64_t seed) {
    Region effective = region;
    if (auto* box = std::get_if<Box>(&effective))
        box->exclude_near_axes = std::max(box->exclude_near_axes, dict.sampling_exclusion());
    const DataSet data = sample_iid(effective, n, seed);
    require_dim(dict, data.dim());
    Matrix psi(dict.size(), static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < psi.cols(); ++k) dict.values(data.points.col(k), psi.col(k));
    const Matrix gram = psi * psi.transpose() / static_cast<double>(n);
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
    GramSpectrum s;
    s.min_eigenvalue = eig.eigenvalues().minCoeff();
    s.max_eigenvalue = eig.eigenvalues().maxCoeff();
    s.condition = s.min_eigenvalue > 0.0 ? s.max_eigenvalue / s.min_eigenvalue
                                         : std::numeric_limits<double>::infinity();
    return s;
}

GramSpectrum require_linear_independence(const Dictionary& dict, const Region& region, std::size_t n,
                                         std::uint64_t seed, double max_condition) {
    const GramSpectrum s = gram_spectrum(dict, region, n, seed);
    if (!(s.condition <= max_condition)) {
        std::ostringstream msg;
        msg << "dictionary " << dict.name() << " is numerically dependent (Gram condition " << s.condition << ")";
        throw InvalidArgument(msg.str());
    }
    return s;
}

}  // namespace koopcert
