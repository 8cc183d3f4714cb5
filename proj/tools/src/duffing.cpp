#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>

#include "common.hpp"

namespace koopcert::cli {

using detail::row;

namespace {

const ParameterMap kDuffingDefaults{{"alpha", -1.0}, {"beta", 1.0}, {"delta", 0.0}};

/// train.* keys; train.m is skipped when the experiment sweeps m itself.
detail::FiniteLagTraining read_training(const Config& cfg, const detail::FiniteLagTraining& defaults,
                                        bool with_m = true) {
    detail::FiniteLagTraining t;
    const auto m = with_m ? cfg.integer("train.m", static_cast<std::int64_t>(defaults.m))
                          : static_cast<std::int64_t>(defaults.m);
    t.n_lag = static_cast<int>(cfg.integer("train.n_lag", defaults.n_lag));
    t.plant_step = cfg.number("train.h", defaults.plant_step);
    t.box = cfg.number("train.box", defaults.box);
    if (m < 1) throw ConfigError("train.m must be positive");
    if (t.n_lag < 1) throw ConfigError("train.n_lag must be positive");
    if (!(t.plant_step > 0.0)) throw ConfigError("train.h must be positive");
    t.m = static_cast<std::size_t>(m);
    return t;
}

double relative_error(const Vector& truth, const Vector& approx) {
    const double nt = truth.norm();
    return (truth - approx).norm() / (nt > 0.0 ? nt : 1.0);
}

std::size_t whole_steps(double span, double step, const char* what) {
    const double r = span / step;
    const double k = std::round(r);
    if (k < 1.0 || std::abs(r - k) > 1e-9 * r) throw ConfigError(std::string(what) + " must be a whole multiple");
    return static_cast<std::size_t>(k);
}

}  // namespace

ExperimentOutput run_duffing_predict(const Config& cfg, const RunOptions& opt) {
    const auto sys = detail::system_from_config(cfg, "duffing", kDuffingDefaults);
    const auto dict = detail::build_dictionary(detail::dictionary_settings(cfg, {"monomials", 5}), sys.dim());
    const auto training = read_training(cfg, {100, 10, 0.005, 1.5});
    const double edmdc_lo = cfg.number("edmdc.u_min", -1.0);
    const double edmdc_hi = cfg.number("edmdc.u_max", 1.0);
    const Vector x0 = detail::parse_vector(cfg.numbers("predict.x0", {0.5, -0.5}));
    const double horizon = cfg.number("predict.horizon", 3.0);
    const double u_lo = cfg.number("predict.u_min", -1.0);
    const double u_hi = cfg.number("predict.u_max", 1.0);
    const bool relift = cfg.flag("predict.project_and_lift", true);
    cfg.check_unused();
    if (x0.size() != sys.dim()) throw ConfigError("predict.x0 has the wrong dimension");

    const double tau = training.plant_step * training.n_lag;
    const std::size_t n = whole_steps(horizon, tau, "predict.horizon / surrogate step");
    const BilinearSurrogate bilinear = detail::train_finite_lag_bilinear(sys, dict, training, opt.seed);
    const LinearSurrogate edmdc = detail::train_edmdc(sys, dict, training, edmdc_lo, edmdc_hi, opt.seed + 100);
    const ControlSignal control = detail::random_control(tau, n, u_lo, u_hi, opt.seed, 3);

    const Trajectory truth = simulate(sys, x0, control, training.plant_step, n * training.n_lag, opt.seed);
    const Vector z0 = eval_psi(*dict, x0);
    const Rollout rb = predict_bilinear(bilinear, z0, control, n, relift);
    const Rollout re = predict_edmdc(edmdc, z0, control, n, relift);

    ResultTable table("duffing-predict", {"t", "u", "x1_true", "x2_true", "x1_bilinear", "x2_bilinear", "x1_edmdc",
                                          "x2_edmdc", "rel_err_bilinear", "rel_err_edmdc", "edmdc_diverged"});
    for (std::size_t k = 0; k <= n; ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        const Vector xt = truth.states.col(col * training.n_lag);
        const Vector xb = rb.states.col(col);
        const Vector xe = re.states.col(col);
        const double u = k < n ? control.value_at(static_cast<double>(k) * tau)[0] : control.values()(0, col - 1);
        table.add_row(row({static_cast<double>(k) * tau, u, xt[0], xt[1], xb[0], xb[1], xe[0], xe[1],
                           relative_error(xt, xb), relative_error(xt, xe),
                           static_cast<std::int64_t>(re.diverged && k > re.steps_completed)}));
    }
    return {{std::move(table)}};
}

ExperimentOutput run_duffing_error(const Config& cfg, const RunOptions& opt) {
    const auto sys = detail::system_from_config(cfg, "duffing", kDuffingDefaults);
    auto training = read_training(cfg, {1, 10, 0.005, 1.5}, false);
    std::vector<double> grid = cfg.numbers("error.m_grid", {10, 20, 30, 50, 100, 200, 500, 1000});
    auto trainings = static_cast<std::size_t>(cfg.integer("error.trainings", 20));
    auto tests = static_cast<std::size_t>(cfg.integer("error.test_points", 1000));
    const std::string dict_list = cfg.text("error.dictionaries", "monomials-2,monomials-3,monomials-4,monomials-5,roots");
    const double u_lo = cfg.number("error.u_min", 0.0);
    const double u_hi = cfg.number("error.u_max", 1.0);
    cfg.check_unused();
    if (trainings < 1 || tests < 1) throw ConfigError("error.trainings and error.test_points must be positive");
    if (opt.quick) {
        trainings = std::min<std::size_t>(trainings, 5);
        tests = std::min<std::size_t>(tests, 200);
    }

    struct Entry {
        std::string label;
        DictionaryPtr dict;
    };
    std::vector<Entry> dicts;
    std::stringstream ss(dict_list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (item == "roots") {
            dicts.push_back({item, make_dictionary("monomials+roots", sys.dim(), 1)});
        } else if (item.rfind("monomials-", 0) == 0) {
            const int p = static_cast<int>(parse_number(item.substr(10), "error.dictionaries"));
            if (p < 1) throw ConfigError("monomial degree must be positive");
            dicts.push_back({item, make_dictionary("monomials", sys.dim(), p)});
        } else {
            throw ConfigError("error.dictionaries: unknown entry '" + item + "'");
        }
    }

    const double tau = training.plant_step * training.n_lag;
    ResultTable table("duffing-error", {"dictionary", "model", "m", "min", "q25", "median", "q75", "max", "mean",
                                        "trainings", "failed_trainings", "test_points", "seed"});
    for (const auto& entry : dicts) {
        for (double md : grid) {
            if (!(md >= 1.0)) throw ConfigError("error.m_grid entries must be positive");
            training.m = static_cast<std::size_t>(md);
            std::vector<std::vector<double>> bil(trainings), edm(trainings);
            parallel_for(trainings, opt.threads, [&](std::size_t r) {
                const std::uint64_t seed = opt.seed + 1000 * r + static_cast<std::uint64_t>(md);
                std::optional<BilinearSurrogate> b;
                std::optional<LinearSurrogate> e;
                try {
                    b = detail::train_finite_lag_bilinear(sys, entry.dict, training, seed);
                } catch (const NumericalFailure&) {
                }
                try {
                    e = detail::train_edmdc(sys, entry.dict, training, u_lo, u_hi, seed + 500);
                } catch (const NumericalFailure&) {
                }
                Box box = detail::symmetric_box(sys.dim(), training.box);
                box.exclude_near_axes = entry.dict->sampling_exclusion();
                const DataSet test = sample_iid(box, tests, seed, 11);
                RandomStream urng(seed, 12);
                const double inf = std::numeric_limits<double>::infinity();
                for (std::size_t k = 0; k < tests; ++k) {
                    const Vector x = test.points.col(static_cast<Eigen::Index>(k));
                    const Vector u = Vector::Constant(1, u_lo + (u_hi - u_lo) * urng.uniform());
                    const ControlSignal c = ControlSignal::constant(u, tau);
                    Vector y = x;
                    for (int s = 0; s < training.n_lag; ++s) y = rk4_step(sys, y, u, training.plant_step);
                    const Vector z = eval_psi(*entry.dict, x);
                    if (b) {
                        const Rollout rb = predict_bilinear(*b, z, c, 1, true);
                        bil[r].push_back(rb.diverged ? inf : relative_error(y, rb.states.col(1)));
                    }
                    if (e) {
                        const Rollout re = predict_edmdc(*e, z, c, 1, true);
                        edm[r].push_back(re.diverged ? inf : relative_error(y, re.states.col(1)));
                    }
                }
            });
            for (const auto& [model, errs] : {std::pair{"bilinear", &bil}, std::pair{"edmdc", &edm}}) {
                std::vector<double> all;
                std::int64_t failed = 0;
                for (const auto& v : *errs) {
                    failed += v.empty();
                    all.insert(all.end(), v.begin(), v.end());
                }
                const double nan = std::numeric_limits<double>::quiet_NaN();
                double mean = all.empty() ? nan : 0.0;
                for (double err : all) mean += err / static_cast<double>(all.size());
                auto q = [&](double p) { return all.empty() ? nan : quantile(all, p); };
                table.add_row(row({entry.label, std::string(model), static_cast<std::int64_t>(md), q(0.0), q(0.25),
                                   q(0.5), q(0.75), q(1.0), mean, static_cast<std::int64_t>(trainings), failed,
                                   static_cast<std::int64_t>(tests), static_cast<std::int64_t>(opt.seed)}));
            }
        }
    }
    return {{std::move(table)}};
}

ExperimentOutput run_duffing_control(const Config& cfg, const RunOptions& opt) {
    const auto sys = detail::system_from_config(cfg, "duffing", kDuffingDefaults);
    const auto dict = detail::build_dictionary(detail::dictionary_settings(cfg, {"monomials", 5}), sys.dim());
    const auto training = read_training(cfg, {25, 10, 0.005, 1.5});
    OcpProblem problem;
    problem.horizon = cfg.number("ocp.horizon", 5.0);
    problem.control_step = cfg.number("ocp.control_step", 0.05);
    problem.plant_step = training.plant_step;
    problem.x0 = detail::parse_vector(cfg.numbers("ocp.x0", {0.5, 0.5}));
    problem.lower = Vector::Constant(1, cfg.number("ocp.u_min", 0.0));
    problem.upper = Vector::Constant(1, cfg.number("ocp.u_max", 1.0));
    OcpOptions options;
    options.max_iterations = static_cast<int>(cfg.integer("ocp.max_iterations", options.max_iterations));
    options.tolerance = cfg.number("ocp.tolerance", options.tolerance);
    options.fd_step = cfg.number("ocp.fd_step", options.fd_step);
    const bool relift = cfg.flag("ocp.project_and_lift", true);
    const double edmdc_lo = cfg.number("edmdc.u_min", problem.lower[0]);
    const double edmdc_hi = cfg.number("edmdc.u_max", problem.upper[0]);
    cfg.check_unused();
    if (opt.quick) options.max_iterations = std::min(options.max_iterations, 50);
    try {
        problem.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("ocp: ") + e.what());
    }

    auto bilinear = std::make_shared<const BilinearSurrogate>(
        detail::train_finite_lag_bilinear(sys, dict, training, opt.seed));
    auto edmdc = std::make_shared<const LinearSurrogate>(
        detail::train_edmdc(sys, dict, training, edmdc_lo, edmdc_hi, opt.seed + 100));

    const PlantModel plant(sys);
    const BilinearModel bil_model(bilinear, relift);
    const EdmdcModel edm_model(edmdc, relift);

    struct Outcome {
        std::string model;
        std::optional<OcpSolution> solution;
        double replay = std::numeric_limits<double>::quiet_NaN();
        std::string status = "ok";
    };
    std::vector<Outcome> outcomes;
    for (const TrackingModel* model : std::initializer_list<const TrackingModel*>{&plant, &bil_model, &edm_model}) {
        Outcome o;
        o.model = model->name();
        try {
            o.solution = solve_tracking_ocp(*model, problem, options);
            o.replay = evaluate_objective(plant, problem, o.solution->controls);
        } catch (const NumericalFailure& e) {
            o.status = std::string("failed: ") + e.what();
            o.replay = std::numeric_limits<double>::infinity();
        }
        outcomes.push_back(std::move(o));
    }

    ResultTable summary("duffing-control-summary",
                        {"model", "objective_model", "objective_plant", "ratio_to_plant_optimum", "iterations",
                         "evaluations", "gradient_norm", "converged", "status", "m", "seed"});
    const double best = outcomes[0].replay;
    for (const auto& o : outcomes) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        summary.add_row(row({o.model, o.solution ? o.solution->objective : nan, o.replay, o.replay / best,
                             static_cast<std::int64_t>(o.solution ? o.solution->iterations : 0),
                             static_cast<std::int64_t>(o.solution ? o.solution->evaluations : 0),
                             o.solution ? o.solution->gradient_norm : nan,
                             static_cast<std::int64_t>(o.solution && o.solution->converged), o.status,
                             static_cast<std::int64_t>(training.m), static_cast<std::int64_t>(opt.seed)}));
    }

    std::vector<std::string> cols{"t"};
    for (const auto& o : outcomes) {
        cols.push_back("u_" + o.model);
        cols.push_back("x1_" + o.model);
        cols.push_back("x2_" + o.model);
    }
    ResultTable traj("duffing-control", cols);
    const std::size_t n_plant = static_cast<std::size_t>(std::llround(problem.horizon / problem.plant_step));
    std::vector<Trajectory> replays;
    for (const auto& o : outcomes) {
        Trajectory t;
        if (o.solution) {
            try {
                t = simulate(sys, problem.x0, ControlSignal::uniform_grid(problem.control_step, o.solution->controls),
                             problem.plant_step, n_plant, 0);
            } catch (const NumericalFailure&) {
            }
        }
        replays.push_back(std::move(t));
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k <= n_plant; ++k) {
        const double t = static_cast<double>(k) * problem.plant_step;
        std::vector<Cell> r{t};
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
            const auto& sol = outcomes[i].solution;
            const auto K = sol ? sol->controls.cols() : 0;
            const auto idx = std::min<Eigen::Index>(static_cast<Eigen::Index>(t / problem.control_step + 1e-9), K - 1);
            r.push_back(sol ? sol->controls(0, idx) : nan);
            const bool ok = replays[i].states.cols() > static_cast<Eigen::Index>(k);
            r.push_back(ok ? replays[i].states(0, static_cast<Eigen::Index>(k)) : nan);
            r.push_back(ok ? replays[i].states(1, static_cast<Eigen::Index>(k)) : nan);
        }
        traj.add_row(std::move(r));
    }
    return {{std::move(traj), std::move(summary)}};
}

}  // namespace koopcert::cli
