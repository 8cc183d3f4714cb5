#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>

#include "common.hpp"

namespace koopcert::cli {

using detail::row;

namespace {

const ParameterMap kControlledOuDefaults{{"alpha", 1.0}, {"beta", 2.0}};

struct SurrogateSettings {
    DictionaryPtr dict;
    std::size_t m = 100;
    double box = 2.0;
    double h = 0.05;
    Stepping stepping = Stepping::Exponential;
};

SurrogateSettings read_surrogate(const Config& cfg, int dim) {
    SurrogateSettings s;
    s.dict = detail::build_dictionary(detail::dictionary_settings(cfg, {"monomials", 5, true}), dim);
    const auto m = cfg.integer("train.m", 100);
    if (m < 1) throw ConfigError("train.m must be positive");
    s.m = static_cast<std::size_t>(m);
    s.box = cfg.number("train.box", s.box);
    s.h = cfg.number("surrogate.h", s.h);
    if (!(s.h > 0.0)) throw ConfigError("surrogate.h must be positive");
    const std::string stepping = cfg.text("surrogate.stepping", "exponential");
    if (stepping == "exponential")
        s.stepping = Stepping::Exponential;
    else if (stepping == "euler")
        s.stepping = Stepping::Euler;
    else
        throw ConfigError("surrogate.stepping must be euler or exponential");
    return s;
}

/// Mean and standard error of the state over `runs` independent sample paths.
struct MonteCarlo {
    std::vector<double> times;
    Matrix mean;
    Matrix se;
};

MonteCarlo monte_carlo(const ControlAffineSystem& sys, const Vector& x0, const ControlSignal& control, double h,
                       std::size_t n, std::size_t runs, std::uint64_t seed, unsigned threads) {
    std::vector<Matrix> paths(runs);
    std::vector<double> times;
    const RandomStream root(seed, 21);
    parallel_for(runs, threads, [&](std::size_t s) {
        RandomStream rng = root.child(s);
        Trajectory t = simulate(sys, x0, control, h, n, rng);
        paths[s] = std::move(t.states);
        if (s == 0) times = std::move(t.times);
    });
    MonteCarlo mc;
    mc.times = std::move(times);
    mc.mean = Matrix::Zero(paths[0].rows(), paths[0].cols());
    for (const auto& p : paths) mc.mean += p;
    mc.mean /= static_cast<double>(runs);
    Matrix var = Matrix::Zero(mc.mean.rows(), mc.mean.cols());
    for (const auto& p : paths) var += (p - mc.mean).cwiseAbs2();
    const double denom = runs > 1 ? static_cast<double>(runs - 1) : 1.0;
    mc.se = (var / denom / static_cast<double>(runs)).cwiseSqrt();
    return mc;
}

std::size_t steps_of(double span, double step, const char* what) {
    const double r = span / step;
    const double k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > 1e-9 * r) throw ConfigError(std::string(what) + " must be a whole multiple");
    return static_cast<std::size_t>(k);
}

}  // namespace

ExperimentOutput run_ou_predict(const Config& cfg, const RunOptions& opt) {
    const auto sys = detail::system_from_config(cfg, "ou-controlled", kControlledOuDefaults);
    const SurrogateSettings s = read_surrogate(cfg, sys.dim());
    const double plant_step = cfg.number("plant.h", 1e-3);
    const double edmdc_lo = cfg.number("edmdc.u_min", 0.0);
    const double edmdc_hi = cfg.number("edmdc.u_max", 1.0);
    const Vector x0 = detail::parse_vector(cfg.numbers("predict.x0", {1.5}));
    const double horizon = cfg.number("predict.horizon", 2.0);
    const double u_lo = cfg.number("predict.u_min", 0.0);
    const double u_hi = cfg.number("predict.u_max", 1.0);
    auto runs = static_cast<std::size_t>(cfg.integer("predict.runs", 100));
    cfg.check_unused();
    if (x0.size() != sys.dim()) throw ConfigError("predict.x0 has the wrong dimension");
    if (runs < 2) throw ConfigError("predict.runs must be at least 2");

    const std::size_t n = steps_of(horizon, s.h, "predict.horizon / surrogate.h");
    const std::size_t sub = steps_of(s.h, plant_step, "surrogate.h / plant.h");
    const BilinearSurrogate bilinear =
        detail::train_generator_bilinear(sys, s.dict, s.m, s.box, {s.stepping, s.h}, opt.seed);
    const LinearSurrogate edmdc = detail::train_edmdc(sys, s.dict, {s.m, static_cast<int>(sub), plant_step, s.box},
                                                      edmdc_lo, edmdc_hi, opt.seed + 100);
    const ControlSignal control = detail::random_control(s.h, n, u_lo, u_hi, opt.seed, 3);

    const MonteCarlo mc = monte_carlo(sys, x0, control, plant_step, n * sub, runs, opt.seed, opt.threads);
    const Vector z0 = eval_psi(*s.dict, x0);
    const Rollout rb = predict_bilinear(bilinear, z0, control, n, false);
    const Rollout re = predict_edmdc(edmdc, z0, control, n, false);

    ResultTable table("ou-predict", {"t", "u", "mc_mean", "mc_se", "bilinear", "edmdc", "err_bilinear", "err_edmdc",
                                     "err_over_se_bilinear", "err_over_se_edmdc", "runs", "seed"});
    for (std::size_t k = 0; k <= n; ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        const auto pcol = static_cast<Eigen::Index>(k * sub);
        const double mean = mc.mean(0, pcol);
        const double se = mc.se(0, pcol);
        const double xb = rb.states(0, col);
        const double xe = re.states(0, col);
        const double u = k < n ? control.values()(0, col) : control.values()(0, col - 1);
        const double eb = std::abs(xb - mean);
        const double ee = std::abs(xe - mean);
        table.add_row(row({static_cast<double>(k) * s.h, u, mean, se, xb, xe, eb, ee, eb / se, ee / se,
                           static_cast<std::int64_t>(runs), static_cast<std::int64_t>(opt.seed)}));
    }
    return {{std::move(table)}};
}

ExperimentOutput run_ou_control(const Config& cfg, const RunOptions& opt) {
    const auto sys = detail::system_from_config(cfg, "ou-controlled", kControlledOuDefaults);
    const SurrogateSettings s = read_surrogate(cfg, sys.dim());
    OcpProblem problem;
    problem.horizon = cfg.number("ocp.horizon", 2.0);
    problem.control_step = cfg.number("ocp.control_step", s.h);
    problem.plant_step = cfg.number("plant.h", 1e-3);
    problem.x0 = detail::parse_vector(cfg.numbers("ocp.x0", {1.5}));
    problem.lower = Vector::Constant(1, cfg.number("ocp.u_min", 0.0));
    problem.upper = Vector::Constant(1, cfg.number("ocp.u_max", 1.0));
    OcpOptions options;
    options.max_iterations = static_cast<int>(cfg.integer("ocp.max_iterations", options.max_iterations));
    options.tolerance = cfg.number("ocp.tolerance", options.tolerance);
    options.fd_step = cfg.number("ocp.fd_step", options.fd_step);
    auto plant_samples = static_cast<std::size_t>(cfg.integer("plant.samples", 20));
    const std::string noise = cfg.text("plant.noise", "both");
    auto eval_runs = static_cast<std::size_t>(cfg.integer("evaluation.runs", 100));
    const auto grid_points = cfg.integer("grid.points", 101);
    cfg.check_unused();
    if (noise != "crn" && noise != "fresh" && noise != "both") throw ConfigError("plant.noise must be crn, fresh or both");
    if (plant_samples < 1 || eval_runs < 2 || grid_points < 2) throw ConfigError("sample counts are too small");
    if (opt.quick) options.max_iterations = std::min(options.max_iterations, 50);
    try {
        problem.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("ocp: ") + e.what());
    }
    const std::size_t n_plant = steps_of(problem.horizon, problem.plant_step, "ocp.horizon / plant.h");

    auto bilinear = std::make_shared<const BilinearSurrogate>(
        detail::train_generator_bilinear(sys, s.dict, s.m, s.box, {s.stepping, s.h}, opt.seed));
    const BilinearModel surrogate(bilinear, false);

    struct Entry {
        std::string label;
        std::unique_ptr<TrackingModel> model;
    };
    std::vector<Entry> entries;
    entries.push_back({"bilinear", std::make_unique<BilinearModel>(bilinear, false)});
    if (noise != "fresh")
        entries.push_back({"plant-crn", std::make_unique<PlantModel>(sys, plant_samples, NoiseMode::CommonRandomNumbers,
                                                                     opt.seed + 200)});
    if (noise != "crn")
        entries.push_back(
            {"plant-fresh", std::make_unique<PlantModel>(sys, plant_samples, NoiseMode::FreshSamples, opt.seed + 300)});

    const double nan = std::numeric_limits<double>::quiet_NaN();
    ResultTable summary("ou-control-summary",
                        {"model", "objective_model", "objective_mc", "max_abs_u_minus_upper", "iterations",
                         "evaluations", "gradient_norm", "converged", "status", "plant_samples", "seed"});
    std::vector<std::string> cols{"t"};
    for (const auto& e : entries) {
        cols.push_back("u_" + e.label);
        cols.push_back("mean_" + e.label);
        cols.push_back("se_" + e.label);
    }
    ResultTable traj("ou-control", cols);
    std::vector<std::optional<MonteCarlo>> replays;
    std::vector<std::optional<OcpSolution>> solutions;
    for (const auto& e : entries) {
        std::optional<OcpSolution> sol;
        std::string status = "ok";
        try {
            sol = solve_tracking_ocp(*e.model, problem, options);
        } catch (const NumericalFailure& err) {
            status = std::string("failed: ") + err.what();
        }
        std::optional<MonteCarlo> mc;
        double objective_mc = std::numeric_limits<double>::infinity();
        if (sol) {
            mc = monte_carlo(sys, problem.x0, ControlSignal::uniform_grid(problem.control_step, sol->controls),
                             problem.plant_step, n_plant, eval_runs, opt.seed + 400, opt.threads);
            objective_mc = tracking_objective(mc->times, mc->mean, problem.reference);
        }
        summary.add_row(row({e.label, sol ? sol->objective : nan, objective_mc,
                             sol ? (sol->controls.array() - problem.upper[0]).abs().maxCoeff() : nan,
                             static_cast<std::int64_t>(sol ? sol->iterations : 0),
                             static_cast<std::int64_t>(sol ? sol->evaluations : 0), sol ? sol->gradient_norm : nan,
                             static_cast<std::int64_t>(sol && sol->converged), status,
                             static_cast<std::int64_t>(plant_samples), static_cast<std::int64_t>(opt.seed)}));
        replays.push_back(std::move(mc));
        solutions.push_back(std::move(sol));
    }
    for (std::size_t k = 0; k <= n_plant; ++k) {
        const double t = static_cast<double>(k) * problem.plant_step;
        std::vector<Cell> r{t};
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& sol = solutions[i];
            const Eigen::Index K = sol ? sol->controls.cols() : 0;
            const auto idx = std::min<Eigen::Index>(static_cast<Eigen::Index>(t / problem.control_step + 1e-9), K - 1);
            r.push_back(sol ? sol->controls(0, idx) : nan);
            r.push_back(replays[i] ? replays[i]->mean(0, static_cast<Eigen::Index>(k)) : nan);
            r.push_back(replays[i] ? replays[i]->se(0, static_cast<Eigen::Index>(k)) : nan);
        }
        traj.add_row(std::move(r));
    }

    ResultTable grid("ou-control-grid", {"u", "objective_bilinear", "objective_exact"});
    const auto K = static_cast<Eigen::Index>(problem.n_intervals());
    const double x0 = problem.x0[0];
    const bool exact_known = sys.kind() == SystemKind::OuControlled;
    const double alpha = exact_known ? sys.params().at("alpha") : nan;
    for (std::int64_t g = 0; g < grid_points; ++g) {
        const double u = problem.lower[0] + (problem.upper[0] - problem.lower[0]) * static_cast<double>(g) /
                                                 static_cast<double>(grid_points - 1);
        const double j = evaluate_objective(surrogate, problem, Matrix::Constant(1, K, u));
        const double rate = 2.0 * alpha * u;
        const double exact = !exact_known ? nan
                             : rate == 0.0 ? x0 * x0 * problem.horizon
                                         : x0 * x0 * -std::expm1(-rate * problem.horizon) / rate;
        grid.add_row(row({u, j, exact}));
    }
    return {{std::move(traj), std::move(summary), std::move(grid)}};
}

}  // namespace koopcert::cli
