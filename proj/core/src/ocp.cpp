#include <cmath>
#include <limits>
#include <sstream>

#include "koopcert/control.hpp"
#include "koopcert/errors.hpp"

namespace koopcert {

namespace {

std::size_t whole_ratio(double num, double den, const char* what) {
    const double r = num / den;
    const double rounded = std::round(r);
    if (rounded < 1.0 || std::abs(r - rounded) > 1e-9 * std::max(1.0, r))
        throw InvalidArgument(std::string(what) + " must be a positive integer multiple");
    return static_cast<std::size_t>(rounded);
}

ControlSignal grid_signal(const OcpProblem& problem, const Matrix& controls) {
    return ControlSignal::uniform_grid(problem.control_step, controls);
}

Matrix unflatten(const Vector& x, int n_controls) {
    return Eigen::Map<const Matrix>(x.data(), n_controls, x.size() / n_controls);
}

Vector flatten(const Matrix& m) { return Eigen::Map<const Vector>(m.data(), m.size()); }

std::optional<std::pair<std::vector<double>, Matrix>> surrogate_states(const Rollout& r) {
    if (r.diverged) return std::nullopt;
    if (r.states.size() == 0) throw InvalidArgument("tracking needs a dictionary with every coordinate function");
    return std::make_pair(r.times, r.states);
}

}  // namespace

std::size_t OcpProblem::n_intervals() const { return whole_ratio(horizon, control_step, "horizon / control step"); }

void OcpProblem::validate() const {
    if (!(horizon > 0.0) || !(control_step > 0.0) || !(plant_step > 0.0))
        throw InvalidArgument("OCP horizon and steps must be positive");
    n_intervals();
    whole_ratio(control_step, plant_step, "control step / plant step");
    if (n_controls < 1) throw InvalidArgument("OCP needs at least one control");
    if (x0.size() == 0 || !x0.allFinite()) throw InvalidArgument("OCP initial state must be finite");
    if (lower.size() != n_controls || upper.size() != n_controls)
        throw InvalidArgument("control bounds have the wrong dimension");
    if ((lower.array() > upper.array()).any()) throw InvalidArgument("control lower bound exceeds upper bound");
    if (initial_guess &&
        (initial_guess->rows() != n_controls || initial_guess->cols() != static_cast<Eigen::Index>(n_intervals())))
        throw InvalidArgument("initial guess has the wrong shape");
}

double tracking_objective(const std::vector<double>& times, const Matrix& states, const Reference& reference) {
    if (static_cast<Eigen::Index>(times.size()) != states.cols()) throw InvalidArgument("times and states differ");
    if (times.size() < 2) return 0.0;
    auto cost = [&](std::size_t k) {
        const auto x = states.col(static_cast<Eigen::Index>(k));
        return reference ? (x - reference(times[k])).squaredNorm() : x.squaredNorm();
    };
    double total = 0.0;
    double prev = cost(0);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double cur = cost(k);
        total += 0.5 * (times[k] - times[k - 1]) * (prev + cur);
        prev = cur;
    }
    return total;
}

// ---------------------------------------------------------------------------
// Models

BilinearModel::BilinearModel(std::shared_ptr<const BilinearSurrogate> surrogate, bool project_and_lift)
    : surrogate_(std::move(surrogate)), project_and_lift_(project_and_lift) {
    if (!surrogate_) throw InvalidArgument("bilinear model needs a surrogate");
}

std::optional<std::pair<std::vector<double>, Matrix>> BilinearModel::trajectory(const OcpProblem& problem,
                                                                              const ControlSignal& control) const {
    const double h = surrogate_->stepping().h;
    whole_ratio(problem.control_step, h, "control step / surrogate step");
    const std::size_t n = whole_ratio(problem.horizon, h, "horizon / surrogate step");
    const Vector z0 = eval_psi(surrogate_->dictionary(), problem.x0);
    return surrogate_states(predict_bilinear(*surrogate_, z0, control, n, project_and_lift_));
}

EdmdcModel::EdmdcModel(std::shared_ptr<const LinearSurrogate> surrogate, bool project_and_lift)
    : surrogate_(std::move(surrogate)), project_and_lift_(project_and_lift) {
    if (!surrogate_ || !surrogate_->dict) throw InvalidArgument("eDMDc model needs a fitted surrogate");
}

std::optional<std::pair<std::vector<double>, Matrix>> EdmdcModel::trajectory(const OcpProblem& problem,
                                                                           const ControlSignal& control) const {
    const double h = surrogate_->h;
    whole_ratio(problem.control_step, h, "control step / surrogate step");
    const std::size_t n = whole_ratio(problem.horizon, h, "horizon / surrogate step");
    const Vector z0 = eval_psi(*surrogate_->dict, problem.x0);
    return surrogate_states(predict_edmdc(*surrogate_, z0, control, n, project_and_lift_));
}

PlantModel::PlantModel(ControlAffineSystem system, std::size_t samples, NoiseMode noise, std::uint64_t seed)
    : system_(std::move(system)), samples_(samples), noise_(noise), seed_(seed) {
    if (samples_ < 1) throw InvalidArgument("plant model needs at least one sample path");
}

std::optional<std::pair<std::vector<double>, Matrix>> PlantModel::trajectory(const OcpProblem& problem,
                                                                           const ControlSignal& control) const {
    const std::size_t n = whole_ratio(problem.horizon, problem.plant_step, "horizon / plant step");
    try {
        if (system_.deterministic()) {
            Trajectory t = simulate(system_, problem.x0, control, problem.plant_step, n, seed_);
            return std::make_pair(std::move(t.times), std::move(t.states));
        }
        const RandomStream root =
            noise_ == NoiseMode::CommonRandomNumbers ? RandomStream(seed_) : RandomStream(seed_, ++evaluations_);
        Matrix mean;
        std::vector<double> times;
        for (std::size_t s = 0; s < samples_; ++s) {
            RandomStream rng = root.child(s);
            Trajectory t = simulate(system_, problem.x0, control, problem.plant_step, n, rng);
            if (s == 0) {
                mean = t.states;
                times = std::move(t.times);
            } else {
                mean += t.states;
            }
        }
        mean /= static_cast<double>(samples_);
        return std::make_pair(std::move(times), std::move(mean));
    } catch (const NumericalFailure&) {
        return std::nullopt;
    }
}

double evaluate_objective(const TrackingModel& model, const OcpProblem& problem, const Matrix& controls) {
    const auto traj = model.trajectory(problem, grid_signal(problem, controls));
    if (!traj) return std::numeric_limits<double>::infinity();
    const double j = tracking_objective(traj->first, traj->second, problem.reference);
    return std::isfinite(j) ? j : std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Optimizer

OcpSolution solve_tracking_ocp(const TrackingModel& model, const OcpProblem& problem, const OcpOptions& options) {
    problem.validate();
    if (!(options.fd_step > 0.0) || !(options.tolerance > 0.0) || options.max_iterations < 0)
        throw InvalidArgument("invalid optimizer options");
    const int nc = problem.n_controls;
    const auto K = static_cast<Eigen::Index>(problem.n_intervals());
    const Eigen::Index n = nc * K;

    Vector lo(n), hi(n);
    for (Eigen::Index k = 0; k < K; ++k) {
        lo.segment(k * nc, nc) = problem.lower;
        hi.segment(k * nc, nc) = problem.upper;
    }
    auto project = [&](const Vector& v) { return Vector(v.cwiseMax(lo).cwiseMin(hi)); };

    OcpSolution sol;
    sol.model = model.name();
    auto objective = [&](const Vector& v) {
        ++sol.evaluations;
        return evaluate_objective(model, problem, unflatten(v, nc));
    };
    auto gradient = [&](const Vector& v, double fv) {
        Vector g(n);
        Vector probe = v;
        for (Eigen::Index i = 0; i < n; ++i) {
            double step = v[i] + options.fd_step <= hi[i] ? options.fd_step : -options.fd_step;
            probe[i] = v[i] + step;
            double fp = objective(probe);
            if (!std::isfinite(fp)) {
                step = -step;
                probe[i] = v[i] + step;
                fp = objective(probe);
            }
            probe[i] = v[i];
            if (!std::isfinite(fp)) throw NumericalFailure("objective is not finite near the current iterate");
            g[i] = (fp - fv) / step;
        }
        return g;
    };

    Vector x = problem.initial_guess ? flatten(*problem.initial_guess) : Vector(0.5 * (lo + hi));
    x = project(x);
    double f = objective(x);
    if (!std::isfinite(f)) throw NumericalFailure("objective is not finite at the initial guess");
    Vector g = gradient(x, f);
    Matrix H = Matrix::Identity(n, n);
    bool identity_metric = true;
    bool scaled = false;
    const double width = std::max(1e-12, (hi - lo).maxCoeff());

    auto projected_gradient = [&](const Vector& v, const Vector& gv) { return (v - project(v - gv)).cwiseAbs().maxCoeff(); };

    int it = 0;
    for (; it < options.max_iterations; ++it) {
        sol.gradient_norm = projected_gradient(x, g);
        if (sol.gradient_norm < options.tolerance) {
            sol.converged = true;
            break;
        }
        const double eps_bound = 1e-12 * width;
        std::vector<bool> active(static_cast<std::size_t>(n), false);
        for (Eigen::Index i = 0; i < n; ++i)
            active[static_cast<std::size_t>(i)] =
                (x[i] <= lo[i] + eps_bound && g[i] > 0.0) || (x[i] >= hi[i] - eps_bound && g[i] < 0.0);

        auto direction = [&]() {
            Vector d = Vector::Zero(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                if (active[static_cast<std::size_t>(i)]) continue;
                double s = 0.0;
                for (Eigen::Index j = 0; j < n; ++j)
                    if (!active[static_cast<std::size_t>(j)]) s -= H(i, j) * g[j];
                d[i] = s;
            }
            return d;
        };
        Vector d = direction();
        if (!(g.dot(d) < 0.0)) {
            H.setIdentity();
            identity_metric = true;
            scaled = false;
            d = direction();
        }
        if (!(g.dot(d) < 0.0)) break;

        bool accepted = false;
        Vector x_new;
        double f_new = f;
        for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
            double alpha = 1.0;
            if (identity_metric && !scaled) alpha = std::min(1.0, 0.1 * width / d.cwiseAbs().maxCoeff());
            for (int ls = 0; ls < 60; ++ls) {
                x_new = project(x + alpha * d);
                if (x_new == x) break;
                f_new = objective(x_new);
                if (std::isfinite(f_new) && f_new <= f + 1e-4 * g.dot(x_new - x)) {
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if (!accepted) {
                if (identity_metric) break;
                H.setIdentity();
                identity_metric = true;
                scaled = false;
                d = direction();
            }
        }
        if (!accepted) break;

        const Vector g_new = gradient(x_new, f_new);
        const Vector s = x_new - x;
        const Vector y = g_new - g;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (!scaled) {
                H = (sy / y.squaredNorm()) * Matrix::Identity(n, n);
                scaled = true;
            }
            const double rho = 1.0 / sy;
            const Vector Hy = H * y;
            H += (rho * rho * y.dot(Hy) + rho) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
            identity_metric = false;
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }
    sol.iterations = it;
    sol.gradient_norm = projected_gradient(x, g);
    sol.converged = sol.converged || sol.gradient_norm < options.tolerance;

    sol.controls = unflatten(x, nc);
    const auto traj = model.trajectory(problem, grid_signal(problem, sol.controls));
    if (!traj) throw NumericalFailure("optimal control produces a divergent rollout");
    sol.times = traj->first;
    sol.states = traj->second;
    sol.objective = tracking_objective(sol.times, sol.states, problem.reference);
    return sol;
}

}  // namespace koopcert
