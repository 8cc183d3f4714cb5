#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "koopcert/rng.hpp"

namespace koopcert {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ConstVectorRef = Eigen::Ref<const Vector>;
using VectorRef = Eigen::Ref<Vector>;
using MatrixRef = Eigen::Ref<Matrix>;

using ParameterMap = std::map<std::string, double>;

/// States whose magnitude exceeds this are treated as divergence.
inline constexpr double kOverflowGuard = 1e12;

/// Vector field x -> out, out is pre-sized to the state dimension.
using VectorField = std::function<void(const ConstVectorRef& x, VectorRef out)>;
/// Matrix field x -> out, out is pre-sized to d x d.
using MatrixField = std::function<void(const ConstVectorRef& x, MatrixRef out)>;

enum class SystemKind { Custom, Ou, OuControlled, Duffing };

/// dX = F(X) dt + sigma(X) dW. An empty diffusion marks the deterministic ODE case.
struct SdeSystem {
    int dim = 0;
    VectorField drift;
    MatrixField diffusion;
};

/// dX = (F(X) + sum_i G_i(X) u_i) dt + sigma(X) dW.
class ControlAffineSystem {
  public:
    ControlAffineSystem(SdeSystem base, std::vector<VectorField> control_fields = {},
                        SystemKind kind = SystemKind::Custom, ParameterMap params = {});

    int dim() const noexcept { return base_.dim; }
    int n_controls() const noexcept { return static_cast<int>(controls_.size()); }
    bool deterministic() const noexcept { return !base_.diffusion; }
    SystemKind kind() const noexcept { return kind_; }
    const ParameterMap& params() const noexcept { return params_; }
    const SdeSystem& base() const noexcept { return base_; }

    void drift(const ConstVectorRef& x, VectorRef out) const;
    void control_field(int i, const ConstVectorRef& x, VectorRef out) const;
    /// F(x) + sum_i G_i(x) u_i.
    void effective_drift(const ConstVectorRef& x, const ConstVectorRef& u, VectorRef out) const;
    /// sigma(x); the zero matrix in the deterministic case.
    void diffusion(const ConstVectorRef& x, MatrixRef out) const;

    Vector effective_drift(const Vector& x, const Vector& u) const;
    Matrix diffusion(const Vector& x) const;

    /// Same drift and control fields with sigma removed.
    ControlAffineSystem without_noise() const;

  private:
    SdeSystem base_;
    std::vector<VectorField> controls_;
    SystemKind kind_;
    ParameterMap params_;
};

/// Built-in systems: "ou" (dX = -X dt + dW), "ou-controlled" (params alpha, beta),
/// "duffing" (params alpha, beta, delta).
ControlAffineSystem make_system(const std::string& kind, const ParameterMap& params = {});

/// e_0 = 0, e_i the i-th unit vector of R^{n_c}.
Vector unit_control(int n_controls, int index);

/// Piecewise-constant control; values.col(k) is held on [t_k, t_{k+1}).
class ControlSignal {
  public:
    ControlSignal(std::vector<double> times, Matrix values);

    static ControlSignal constant(const Vector& u, double t_end);
    static ControlSignal uniform_grid(double step, const Matrix& values, double t0 = 0.0);

    Vector value_at(double t) const;
    int n_controls() const noexcept { return static_cast<int>(values_.rows()); }
    std::size_t n_intervals() const noexcept { return static_cast<std::size_t>(values_.cols()); }
    double start() const noexcept { return times_.front(); }
    double end() const noexcept { return times_.back(); }
    const std::vector<double>& times() const noexcept { return times_; }
    const Matrix& values() const noexcept { return values_; }

    /// max_k |u_i(t_k)|
    double sup_norm(int channel) const;

    void set_bounds(Vector lower, Vector upper);
    const std::optional<std::pair<Vector, Vector>>& bounds() const noexcept { return bounds_; }

  private:
    std::vector<double> times_;
    Matrix values_;
    std::optional<std::pair<Vector, Vector>> bounds_;
};

struct Trajectory {
    std::vector<double> times;
    Matrix states;  // d x (n_steps + 1)
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;

    double step() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
};

enum class SamplingMode { IidLebesgue, IidInvariant, Ergodic };

std::string to_string(SamplingMode mode);

struct DataSet {
    Matrix points;                   // d x m
    std::optional<Matrix> partners;  // d x m, lagged images of points
    SamplingMode mode = SamplingMode::IidLebesgue;
    double dt = 0.0;        // snapshot spacing (ergodic) or lag time of the partners
    int control_label = 0;  // which e_i generated the data
    std::uint64_t seed = 0;
    std::size_t burn_in = 0;
    std::string initial_condition;  // how x_0 was realized

    std::size_t size() const noexcept { return static_cast<std::size_t>(points.cols()); }
    int dim() const noexcept { return static_cast<int>(points.rows()); }
};

/// x + (F(x) + sum G_i(x) u_i) h + sigma(x) sqrt(h) noise
Vector euler_maruyama_step(const ControlAffineSystem& system, const Vector& x, const Vector& u,
                           double h, const Vector& noise);

/// Classical fourth-order Runge-Kutta step of the deterministic field at fixed u.
Vector rk4_step(const ControlAffineSystem& system, const Vector& x, const Vector& u, double h);

/// Euler-Maruyama for SDEs, RK4 for ODEs. Noise is drawn from RandomStream(seed, stream).
Trajectory simulate(const ControlAffineSystem& system, const Vector& x0, const ControlSignal& control,
                    double h, std::size_t n_steps, std::uint64_t seed, std::uint64_t stream = 0);
Trajectory simulate(const ControlAffineSystem& system, const Vector& x0, const ControlSignal& control,
                    double h, std::size_t n_steps, RandomStream& rng);

struct PointSampler {
    int dim = 0;
    std::function<Vector(RandomStream&)> draw;
    std::string name;
};

/// Exact draws from the invariant law of the OU-type built-ins under constant control e_i.
std::optional<PointSampler> invariant_sampler(const ControlAffineSystem& system, int control_index = 0);

struct ErgodicOptions {
    std::size_t burn_in = 10000;
    int substeps = 1;
    std::optional<Vector> x0;
    std::optional<PointSampler> initial_sampler;
};

/// m consecutive snapshots at spacing dt of one trajectory driven by constant control e_i.
DataSet sample_ergodic(const ControlAffineSystem& system, int control_index, double dt, std::size_t m,
                       const ErgodicOptions& options, std::uint64_t seed, std::uint64_t stream = 0);

struct Box {
    Vector lower;
    Vector upper;
    /// Reject points with any |x_i| below this radius.
    double exclude_near_axes = 0.0;
};

using Region = std::variant<Box, PointSampler>;

DataSet sample_iid(const Region& region, std::size_t m, std::uint64_t seed, std::uint64_t stream = 0);

/// Fills `data.partners` with the state reached from each point after n_steps of size h
/// under constant control e_i.
void attach_partners(DataSet& data, const ControlAffineSystem& system, int control_index, double h,
                     std::size_t n_steps, std::uint64_t seed);

}  // namespace koopcert
