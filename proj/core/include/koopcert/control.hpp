#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "koopcert/bounds.hpp"
#include "koopcert/dictionary.hpp"
#include "koopcert/dynamics.hpp"
#include "koopcert/estimation.hpp"

namespace koopcert {

enum class Stepping { Euler, Exponential };

struct SteppingPolicy {
    Stepping kind = Stepping::Euler;
    double h = 0.05;
};

/// Lifted trajectory of a surrogate. `diverged` marks a rollout stopped by the
/// overflow guard; entries after `steps_completed` are NaN.
struct Rollout {
    std::vector<double> times;
    Matrix lifted;  // N x (n_steps + 1)
    Matrix states;  // d x (n_steps + 1), empty if the dictionary has no identity coordinates
    bool diverged = false;
    std::size_t steps_completed = 0;
};

/// L^u = L^0 + sum_i alpha_i (L^{e_i} - L^0) built from generator estimates for
/// the constant controls e_0 = 0, e_1, ..., e_{n_c}.
class BilinearSurrogate {
  public:
    BilinearSurrogate(std::vector<GeneratorEstimate> generators, DictionaryPtr dict, SteppingPolicy stepping);

    int size() const noexcept { return static_cast<int>(generators_.front().L.rows()); }
    int n_controls() const noexcept { return static_cast<int>(generators_.size()) - 1; }
    const Matrix& generator(int i) const { return generators_.at(static_cast<std::size_t>(i)).L; }
    const GeneratorEstimate& estimate(int i) const { return generators_.at(static_cast<std::size_t>(i)); }
    const Dictionary& dictionary() const noexcept { return *dict_; }
    const DictionaryPtr& dictionary_ptr() const noexcept { return dict_; }
    const SteppingPolicy& stepping() const noexcept { return stepping_; }

    /// Certificates attached to L^{e_i}, if computed.
    std::vector<std::optional<ErrorCertificate>> certificates;

    /// L^0 + sum_i alpha_i (L^{e_i} - L^0); alpha = 0 and alpha = e_i return the stored matrix.
    Matrix assemble(const Vector& alpha) const;

  private:
    std::vector<GeneratorEstimate> generators_;
    std::vector<Matrix> differences_;  // L^{e_i} - L^0
    DictionaryPtr dict_;
    SteppingPolicy stepping_;
};

BilinearSurrogate build_bilinear(std::vector<GeneratorEstimate> generators, DictionaryPtr dict,
                                 SteppingPolicy stepping);

/// Rolls the surrogate forward. Observable values evolve with the transpose of the
/// generator matrix: z <- zh + h (L^u)^T zh (euler) or z <- exp(h (L^u)^T) zh
/// (exponential), where zh = Psi(P(z)) with project-and-lift and zh = z otherwise.
Rollout predict_bilinear(const BilinearSurrogate& surrogate, const Vector& z0, const ControlSignal& control,
                         std::size_t n_steps, bool project_and_lift);

/// Psi(Y) ~ A Psi(X) + B U.
struct LinearSurrogate {
    Matrix A;
    Matrix B;
    double h = 0.0;
    DictionaryPtr dict;
    int rank = 0;
    bool rank_deficient = false;
};

/// Controlled one-step samples (x_k, u_k, y_k) at a fixed lag.
struct ControlledSamples {
    Matrix X;  // d x m
    Matrix U;  // n_c x m
    Matrix Y;  // d x m
    double lag = 0.0;
};

/// Minimum-norm least squares through an SVD of the stacked regressor [Psi(X); U]
/// with singular values below 1e-10 sigma_max treated as zero.
LinearSurrogate fit_edmdc(const ControlledSamples& samples, DictionaryPtr dict);

/// zh_{i+1} = A z_i + B u_i, z_{i+1} = Psi(P(zh_{i+1})) with project-and-lift, else z_{i+1} = zh_{i+1}.
Rollout predict_edmdc(const LinearSurrogate& surrogate, const Vector& z0, const ControlSignal& control,
                      std::size_t n_steps, bool project_and_lift);

/// Squared tracking error of a state trajectory, x_ref(t) given as a function of time.
using Reference = std::function<Vector(double)>;

/// Trapezoid rule for int ||x(t) - x_ref(t)||^2 dt over the trajectory grid.
double tracking_objective(const std::vector<double>& times, const Matrix& states, const Reference& reference);

struct OcpProblem {
    double horizon = 5.0;
    double control_step = 0.05;
    double plant_step = 0.005;
    int n_controls = 1;
    Vector x0;
    Vector lower;
    Vector upper;
    Reference reference;  // defaults to zero
    std::optional<Matrix> initial_guess;

    std::size_t n_intervals() const;
    std::size_t n_variables() const { return static_cast<std::size_t>(n_controls) * n_intervals(); }
    void validate() const;
};

/// A model that maps a control grid to a state trajectory (a mean trajectory for SDEs).
class TrackingModel {
  public:
    virtual ~TrackingModel() = default;
    virtual std::string name() const = 0;
    /// Returns states on the model's own time grid; nullopt if the rollout diverged.
    virtual std::optional<std::pair<std::vector<double>, Matrix>> trajectory(const OcpProblem& problem,
                                                                          const ControlSignal& control) const = 0;
};

class BilinearModel final : public TrackingModel {
  public:
    BilinearModel(std::shared_ptr<const BilinearSurrogate> surrogate, bool project_and_lift);
    std::string name() const override { return "bilinear"; }
    std::optional<std::pair<std::vector<double>, Matrix>> trajectory(const OcpProblem& problem,
                                                                  const ControlSignal& control) const override;

  private:
    std::shared_ptr<const BilinearSurrogate> surrogate_;
    bool project_and_lift_;
};

class EdmdcModel final : public TrackingModel {
  public:
    EdmdcModel(std::shared_ptr<const LinearSurrogate> surrogate, bool project_and_lift);
    std::string name() const override { return "edmdc"; }
    std::optional<std::pair<std::vector<double>, Matrix>> trajectory(const OcpProblem& problem,
                                                                  const ControlSignal& control) const override;

  private:
    std::shared_ptr<const LinearSurrogate> surrogate_;
    bool project_and_lift_;
};

enum class NoiseMode {
    CommonRandomNumbers,  // the same noise paths in every objective evaluation
    FreshSamples          // new noise paths in every evaluation
};

/// The simulated system itself; SDEs are averaged over `samples` paths.
class PlantModel final : public TrackingModel {
  public:
    PlantModel(ControlAffineSystem system, std::size_t samples = 1, NoiseMode noise = NoiseMode::CommonRandomNumbers,
               std::uint64_t seed = 0);
    std::string name() const override { return "plant"; }
    std::optional<std::pair<std::vector<double>, Matrix>> trajectory(const OcpProblem& problem,
                                                                  const ControlSignal& control) const override;

  private:
    ControlAffineSystem system_;
    std::size_t samples_;
    NoiseMode noise_;
    std::uint64_t seed_;
    mutable std::uint64_t evaluations_ = 0;
};

struct OcpOptions {
    double fd_step = 1e-6;
    double tolerance = 1e-6;  // on the projected-gradient infinity norm
    int max_iterations = 500;
};

struct OcpSolution {
    Matrix controls;  // n_c x n_intervals
    std::vector<double> times;
    Matrix states;
    double objective = 0.0;
    int iterations = 0;
    int evaluations = 0;
    double gradient_norm = 0.0;  // projected, infinity norm
    bool converged = false;
    std::string model;
};

/// Objective value of a control grid under a model; +inf if the rollout diverged.
double evaluate_objective(const TrackingModel& model, const OcpProblem& problem, const Matrix& controls);

/// Box-constrained single-shooting solve: projected BFGS on the free variables with
/// forward-difference gradients and an Armijo search along the projection arc.
OcpSolution solve_tracking_ocp(const TrackingModel& model, const OcpProblem& problem, const OcpOptions& options = {});

}  // namespace koopcert
