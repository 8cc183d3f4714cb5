#include "koopcert/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "koopcert/errors.hpp"

namespace koopcert {

namespace {

void require_finite(const Vector& v, const char* what) {
    if (!v.allFinite()) throw InvalidArgument(std::string(what) + " must be finite");
}

void check_state(const Vector& x, std::size_t step) {
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kOverflowGuard) {
        std::ostringstream msg;
        msg << "state left the finite range at step " << step;
        throw NumericalFailure(msg.str());
    }
}

double require_param(const ParameterMap& params, const std::string& name) {
    const auto it = params.find(name);
    if (it == params.end()) throw InvalidArgument("missing system parameter '" + name + "'");
    if (!std::isfinite(it->second)) throw InvalidArgument("system parameter '" + name + "' is not finite");
    return it->second;
}

void reject_unknown(const ParameterMap& params, const std::set<std::string>& allowed,
                    const std::string& kind) {
    for (const auto& [key, value] : params) {
        if (!allowed.count(key)) throw InvalidArgument("unknown parameter '" + key + "' for system " + kind);
    }
}

// Buffers reused across steps of one integration.
struct StepWorkspace {
    explicit StepWorkspace(int d)
        : drift(d), noise(d), k1(d), k2(d), k3(d), k4(d), stage(d), sigma(d, d) {}
    Vector drift, noise, k1, k2, k3, k4, stage;
    Matrix sigma;
};

void em_step_inplace(const ControlAffineSystem& sys, Vector& x, const Vector& u, double h,
                     double sqrt_h, const Vector& noise, StepWorkspace& ws) {
    sys.effective_drift(x, u, ws.drift);
    if (sys.deterministic()) {
        x.noalias() += h * ws.drift;
        return;
    }
    sys.diffusion(x, ws.sigma);
    x.noalias() += h * ws.drift;
    x.noalias() += sqrt_h * (ws.sigma * noise);
}

void rk4_step_inplace(const ControlAffineSystem& sys, Vector& x, const Vector& u, double h,
                      StepWorkspace& ws) {
    sys.effective_drift(x, u, ws.k1);
    ws.stage = x + 0.5 * h * ws.k1;
    sys.effective_drift(ws.stage, u, ws.k2);
    ws.stage = x + 0.5 * h * ws.k2;
    sys.effective_drift(ws.stage, u, ws.k3);
    ws.stage = x + h * ws.k3;
    sys.effective_drift(ws.stage, u, ws.k4);
    x += (h / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
}

void fill_normal(RandomStream& rng, Vector& out) {
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = rng.normal();
}

}  // namespace

ControlAffineSystem::ControlAffineSystem(SdeSystem base, std::vector<VectorField> control_fields,
                                         SystemKind kind, ParameterMap params)
    : base_(std::move(base)), controls_(std::move(control_fields)), kind_(kind), params_(std::move(params)) {
    if (base_.dim <= 0) throw InvalidArgument("system dimension must be positive");
    if (!base_.drift) throw InvalidArgument("system drift is required");
    for (const auto& g : controls_) {
        if (!g) throw InvalidArgument("control vector fields must be callable");
    }
}

void ControlAffineSystem::drift(const ConstVectorRef& x, VectorRef out) const { base_.drift(x, out); }

void ControlAffineSystem::control_field(int i, const ConstVectorRef& x, VectorRef out) const {
    if (i < 0 || i >= n_controls()) throw InvalidArgument("control field index out of range");
    controls_[static_cast<std::size_t>(i)](x, out);
}

void ControlAffineSystem::effective_drift(const ConstVectorRef& x, const ConstVectorRef& u,
                                         VectorRef out) const {
    if (u.size() != n_controls()) throw InvalidArgument("control vector has the wrong dimension");
    base_.drift(x, out);
    if (controls_.empty()) return;
    thread_local Vector scratch;
    scratch.resize(dim());
    for (int i = 0; i < n_controls(); ++i) {
        if (u[i] == 0.0) continue;
        controls_[static_cast<std::size_t>(i)](x, scratch);
        out.noalias() += u[i] * scratch;
    }
}

void ControlAffineSystem::diffusion(const ConstVectorRef& x, MatrixRef out) const {
    if (deterministic()) {
        out.setZero();
        return;
    }
    base_.diffusion(x, out);
}

Vector ControlAffineSystem::effective_drift(const Vector& x, const Vector& u) const {
    Vector out(dim());
    effective_drift(ConstVectorRef(x), ConstVectorRef(u), VectorRef(out));
    return out;
}

Matrix ControlAffineSystem::diffusion(const Vector& x) const {
    Matrix out(dim(), dim());
    diffusion(ConstVectorRef(x), MatrixRef(out));
    return out;
}

ControlAffineSystem ControlAffineSystem::without_noise() const {
    SdeSystem base{base_.dim, base_.drift, {}};
    return ControlAffineSystem(std::move(base), controls_, kind_, params_);
}

ControlAffineSystem make_system(const std::string& kind, const ParameterMap& params) {
    if (kind == "ou") {
        reject_unknown(params, {}, kind);
        SdeSystem base{1, [](const ConstVectorRef& x, VectorRef out) { out[0] = -x[0]; },
                       [](const ConstVectorRef&, MatrixRef out) { out(0, 0) = 1.0; }};
        return ControlAffineSystem(std::move(base), {}, SystemKind::Ou, params);
    }
    if (kind == "ou-controlled") {
        reject_unknown(params, {"alpha", "beta"}, kind);
        const double alpha = require_param(params, "alpha");
        const double beta = require_param(params, "beta");
        if (beta <= 0.0) throw InvalidArgument("ou-controlled requires beta > 0");
        const double sigma = std::sqrt(2.0 / beta);
        SdeSystem base{1, [](const ConstVectorRef&, VectorRef out) { out[0] = 0.0; },
                       [sigma](const ConstVectorRef&, MatrixRef out) { out(0, 0) = sigma; }};
        VectorField g = [alpha](const ConstVectorRef& x, VectorRef out) { out[0] = -alpha * x[0]; };
        return ControlAffineSystem(std::move(base), {g}, SystemKind::OuControlled, params);
    }
    if (kind == "duffing") {
        reject_unknown(params, {"alpha", "beta", "delta"}, kind);
        const double alpha = require_param(params, "alpha");
        const double beta = require_param(params, "beta");
        const double delta = require_param(params, "delta");
        SdeSystem base{2,
                       [alpha, delta](const ConstVectorRef& x, VectorRef out) {
                           out[0] = x[1];
                           out[1] = -delta * x[1] - alpha * x[0];
                       },
                       {}};
        VectorField g = [beta](const ConstVectorRef& x, VectorRef out) {
            out[0] = 0.0;
            out[1] = -2.0 * beta * x[0] * x[0] * x[0];
        };
        return ControlAffineSystem(std::move(base), {g}, SystemKind::Duffing, params);
    }
    throw InvalidArgument("unknown system kind '" + kind + "'");
}

Vector unit_control(int n_controls, int index) {
    if (index < 0 || index > n_controls) throw InvalidArgument("control label out of range");
    Vector u = Vector::Zero(n_controls);
    if (index > 0) u[index - 1] = 1.0;
    return u;
}

// ---------------------------------------------------------------------------
// ControlSignal

ControlSignal::ControlSignal(std::vector<double> times, Matrix values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() < 2) throw InvalidArgument("control signal needs at least one interval");
    if (static_cast<Eigen::Index>(times_.size()) != values_.cols() + 1)
        throw InvalidArgument("control signal needs one value column per interval");
    for (std::size_t k = 1; k < times_.size(); ++k) {
        if (!(times_[k] > times_[k - 1])) throw InvalidArgument("control time grid must be strictly increasing");
    }
    if (!values_.allFinite()) throw InvalidArgument("control values must be finite");
}

ControlSignal ControlSignal::constant(const Vector& u, double t_end) {
    return ControlSignal({0.0, t_end}, Matrix(u));
}

ControlSignal ControlSignal::uniform_grid(double step, const Matrix& values, double t0) {
    if (!(step > 0.0)) throw InvalidArgument("control grid step must be positive");
    std::vector<double> times(static_cast<std::size_t>(values.cols()) + 1);
    for (std::size_t k = 0; k < times.size(); ++k) times[k] = t0 + static_cast<double>(k) * step;
    return ControlSignal(std::move(times), values);
}

Vector ControlSignal::value_at(double t) const {
    const double span = times_.back() - times_.front();
    const double eps = 1e-9 * span / static_cast<double>(n_intervals());
    if (t < times_.front() - eps || t >= times_.back()) {
        std::ostringstream msg;
        msg << "control queried at t=" << t << " outside [" << times_.front() << ", " << times_.back() << ")";
        throw InvalidArgument(msg.str());
    }
    auto it = std::upper_bound(times_.begin(), times_.end(), t + eps);
    std::size_t idx = static_cast<std::size_t>(std::distance(times_.begin(), it));
    idx = idx == 0 ? 0 : idx - 1;
    idx = std::min(idx, n_intervals() - 1);
    return values_.col(static_cast<Eigen::Index>(idx));
}

double ControlSignal::sup_norm(int channel) const {
    if (channel < 0 || channel >= n_controls()) throw InvalidArgument("control channel out of range");
    return values_.row(channel).cwiseAbs().maxCoeff();
}

void ControlSignal::set_bounds(Vector lower, Vector upper) {
    if (lower.size() != n_controls() || upper.size() != n_controls())
        throw InvalidArgument("control bounds have the wrong dimension");
    if ((lower.array() > upper.array()).any()) throw InvalidArgument("control lower bound exceeds upper bound");
    bounds_ = std::make_pair(std::move(lower), std::move(upper));
}

// ---------------------------------------------------------------------------
// Integration

std::string to_string(SamplingMode mode) {
    switch (mode) {
        case SamplingMode::IidLebesgue: return "iid-lebesgue";
        case SamplingMode::IidInvariant: return "iid-invariant";
        case SamplingMode::Ergodic: return "ergodic";
    }
    return "unknown";
}

Vector euler_maruyama_step(const ControlAffineSystem& system, const Vector& x, const Vector& u,
                           double h, const Vector& noise) {
    if (!(h > 0.0)) throw InvalidArgument("step size must be positive");
    if (x.size() != system.dim() || noise.size() != system.dim())
        throw InvalidArgument("state/noise dimension mismatch");
    require_finite(x, "state");
    require_finite(noise, "noise");
    StepWorkspace ws(system.dim());
    Vector next = x;
    em_step_inplace(system, next, u, h, std::sqrt(h), noise, ws);
    return next;
}

Vector rk4_step(const ControlAffineSystem& system, const Vector& x, const Vector& u, double h) {
    if (!system.deterministic()) throw InvalidArgument("rk4_step requires a deterministic system");
    if (!(h > 0.0)) throw InvalidArgument("step size must be positive");
    if (x.size() != system.dim()) throw InvalidArgument("state dimension mismatch");
    require_finite(x, "state");
    StepWorkspace ws(system.dim());
    Vector next = x;
    rk4_step_inplace(system, next, u, h, ws);
    return next;
}

Trajectory simulate(const ControlAffineSystem& system, const Vector& x0, const ControlSignal& control,
                    double h, std::size_t n_steps, RandomStream& rng) {
    if (n_steps < 1) throw InvalidArgument("simulate needs at least one step");
    if (!(h > 0.0)) throw InvalidArgument("step size must be positive");
    if (x0.size() != system.dim()) throw InvalidArgument("initial state dimension mismatch");
    if (control.n_controls() != system.n_controls()) throw InvalidArgument("control dimension mismatch");
    const double horizon = static_cast<double>(n_steps) * h;
    if (control.start() > 0.0 || control.end() < horizon * (1.0 - 1e-12))
        throw InvalidArgument("control signal does not cover the simulation horizon");
    require_finite(x0, "initial state");

    Trajectory traj;
    traj.seed = rng.seed();
    traj.stream = rng.stream_id();
    traj.times.resize(n_steps + 1);
    traj.states.resize(system.dim(), static_cast<Eigen::Index>(n_steps + 1));
    traj.states.col(0) = x0;
    traj.times[0] = 0.0;

    StepWorkspace ws(system.dim());
    const double sqrt_h = std::sqrt(h);
    Vector x = x0;
    Vector u;
    for (std::size_t k = 0; k < n_steps; ++k) {
        const double t = static_cast<double>(k) * h;
        u = control.value_at(t);
        if (system.deterministic()) {
            rk4_step_inplace(system, x, u, h, ws);
        } else {
            fill_normal(rng, ws.noise);
            em_step_inplace(system, x, u, h, sqrt_h, ws.noise, ws);
        }
        check_state(x, k + 1);
        traj.states.col(static_cast<Eigen::Index>(k + 1)) = x;
        traj.times[k + 1] = static_cast<double>(k + 1) * h;
    }
    return traj;
}

Trajectory simulate(const ControlAffineSystem& system, const Vector& x0, const ControlSignal& control,
                    double h, std::size_t n_steps, std::uint64_t seed, std::uint64_t stream) {
    RandomStream rng(seed, stream);
    return simulate(system, x0, control, h, n_steps, rng);
}

std::optional<PointSampler> invariant_sampler(const ControlAffineSystem& system, int control_index) {
    double variance = 0.0;
    if (system.kind() == SystemKind::Ou) {
        variance = 0.5;
    } else if (system.kind() == SystemKind::OuControlled) {
        const double u = unit_control(system.n_controls(), control_index)[0];
        const double rate = system.params().at("alpha") * u;
        if (!(rate > 0.0)) return std::nullopt;
        variance = 1.0 / (rate * system.params().at("beta"));
    } else {
        return std::nullopt;
    }
    const double sd = std::sqrt(variance);
    PointSampler sampler;
    sampler.dim = 1;
    sampler.name = "ou-invariant";
    sampler.draw = [sd](RandomStream& rng) {
        Vector x(1);
        x[0] = sd * rng.normal();
        return x;
    };
    return sampler;
}

DataSet sample_ergodic(const ControlAffineSystem& system, int control_index, double dt, std::size_t m,
                       const ErgodicOptions& options, std::uint64_t seed, std::uint64_t stream) {
    if (m < 1) throw InvalidArgument("ergodic sampling needs m >= 1");
    if (!(dt > 0.0)) throw InvalidArgument("snapshot spacing must be positive");
    if (options.substeps < 1) throw InvalidArgument("substeps must be >= 1");
    const Vector u = unit_control(system.n_controls(), control_index);
    RandomStream rng(seed, stream);

    DataSet data;
    data.mode = SamplingMode::Ergodic;
    data.dt = dt;
    data.control_label = control_index;
    data.seed = seed;
    data.burn_in = options.burn_in;

    Vector x(system.dim());
    if (options.x0) {
        x = *options.x0;
        data.initial_condition = "fixed";
    } else if (options.initial_sampler) {
        x = options.initial_sampler->draw(rng);
        data.initial_condition = "sampler:" + options.initial_sampler->name;
    } else {
        x.setZero();
        data.initial_condition = "zero";
    }
    if (x.size() != system.dim()) throw InvalidArgument("initial state dimension mismatch");

    data.points.resize(system.dim(), static_cast<Eigen::Index>(m));
    StepWorkspace ws(system.dim());
    const double h = dt / options.substeps;
    const double sqrt_h = std::sqrt(h);
    const std::size_t total = options.burn_in + m;
    for (std::size_t snap = 0; snap < total; ++snap) {
        if (snap > 0) {
            for (int s = 0; s < options.substeps; ++s) {
                if (system.deterministic()) {
                    rk4_step_inplace(system, x, u, h, ws);
                } else {
                    fill_normal(rng, ws.noise);
                    em_step_inplace(system, x, u, h, sqrt_h, ws.noise, ws);
                }
            }
            check_state(x, snap);
        }
        if (snap >= options.burn_in) data.points.col(static_cast<Eigen::Index>(snap - options.burn_in)) = x;
    }
    return data;
}

DataSet sample_iid(const Region& region, std::size_t m, std::uint64_t seed, std::uint64_t stream) {
    if (m < 1) throw InvalidArgument("iid sampling needs m >= 1");
    RandomStream rng(seed, stream);
    DataSet data;
    data.seed = seed;
    data.initial_condition = "iid";
    if (const auto* box = std::get_if<Box>(&region)) {
        const auto d = box->lower.size();
        if (d == 0 || box->upper.size() != d) throw InvalidArgument("box bounds have mismatched dimension");
        if (!box->lower.allFinite() || !box->upper.allFinite()) throw InvalidArgument("box bounds must be finite");
        if ((box->upper.array() <= box->lower.array()).any()) throw InvalidArgument("box has zero volume");
        data.mode = SamplingMode::IidLebesgue;
        data.points.resize(d, static_cast<Eigen::Index>(m));
        const Vector width = box->upper - box->lower;
        Vector x(d);
        for (std::size_t k = 0; k < m; ++k) {
            do {
                for (Eigen::Index i = 0; i < d; ++i) x[i] = box->lower[i] + width[i] * rng.uniform();
            } while (box->exclude_near_axes > 0.0 && x.cwiseAbs().minCoeff() < box->exclude_near_axes);
            data.points.col(static_cast<Eigen::Index>(k)) = x;
        }
    } else {
        const auto& sampler = std::get<PointSampler>(region);
        if (!sampler.draw || sampler.dim <= 0) throw InvalidArgument("invalid point sampler");
        data.mode = SamplingMode::IidInvariant;
        data.points.resize(sampler.dim, static_cast<Eigen::Index>(m));
        for (std::size_t k = 0; k < m; ++k) data.points.col(static_cast<Eigen::Index>(k)) = sampler.draw(rng);
    }
    return data;
}

void attach_partners(DataSet& data, const ControlAffineSystem& system, int control_index, double h,
                     std::size_t n_steps, std::uint64_t seed) {
    if (data.dim() != system.dim()) throw InvalidArgument("data and system dimensions differ");
    const Vector u = unit_control(system.n_controls(), control_index);
    const auto control = ControlSignal::constant(u, static_cast<double>(n_steps) * h);
    Matrix partners(data.points.rows(), data.points.cols());
    const RandomStream root(seed);
    for (Eigen::Index k = 0; k < data.points.cols(); ++k) {
        RandomStream rng = root.child(static_cast<std::uint64_t>(k));
        const Trajectory traj = simulate(system, data.points.col(k), control, h, n_steps, rng);
        partners.col(k) = traj.states.col(traj.states.cols() - 1);
    }
    data.partners = std::move(partners);
    data.dt = static_cast<double>(n_steps) * h;
    data.control_label = control_index;
}

}  // namespace koopcert
