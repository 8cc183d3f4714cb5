#include "common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace koopcert::cli {

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

namespace detail {

ControlAffineSystem system_from_config(const Config& cfg, const std::string& default_kind,
                                       const ParameterMap& defaults) {
    auto entries = cfg.section("system");
    std::string kind = default_kind;
    if (auto it = entries.find("kind"); it != entries.end()) {
        kind = it->second;
        entries.erase(it);
    }
    ParameterMap params = kind == default_kind ? defaults : ParameterMap{};
    for (const auto& [k, v] : entries) params[k] = parse_number(v, "system." + k);
    try {
        return make_system(kind, params);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("system: ") + e.what());
    }
}

DictionarySettings dictionary_settings(const Config& cfg, const DictionarySettings& defaults) {
    DictionarySettings s;
    s.kind = cfg.text("dict.kind", defaults.kind);
    s.degree = static_cast<int>(cfg.integer("dict.degree", defaults.degree));
    s.constant = cfg.flag("dict.constant", defaults.constant);
    s.normalized = cfg.flag("dict.normalized", defaults.normalized);
    return s;
}

DictionaryPtr build_dictionary(const DictionarySettings& s, int dim) {
    try {
        return make_dictionary(s.kind, dim, s.degree, s.constant, s.normalized);
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("dict: ") + e.what());
    }
}

Vector parse_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Box symmetric_box(int dim, double half_width) {
    if (!(half_width > 0.0)) throw ConfigError("sampling box half width must be positive");
    return Box{Vector::Constant(dim, -half_width), Vector::Constant(dim, half_width)};
}

BilinearSurrogate train_finite_lag_bilinear(const ControlAffineSystem& system, const DictionaryPtr& dict,
                                            const FiniteLagTraining& training, std::uint64_t seed) {
    Box box = symmetric_box(system.dim(), training.box);
    box.exclude_near_axes = dict->sampling_exclusion();
    std::vector<GeneratorEstimate> gens;
    for (int i = 0; i <= system.n_controls(); ++i) {
        DataSet data = sample_iid(box, training.m, seed, 0);
        attach_partners(data, system, i, training.plant_step, static_cast<std::size_t>(training.n_lag), seed + 1);
        gens.push_back(finite_lag_generator(estimate_koopman_operator(lift_operator(*dict, data))));
    }
    return BilinearSurrogate(std::move(gens), dict,
                             SteppingPolicy{Stepping::Euler, training.plant_step * training.n_lag});
}

LinearSurrogate train_edmdc(const ControlAffineSystem& system, const DictionaryPtr& dict,
                            const FiniteLagTraining& training, double u_min, double u_max, std::uint64_t seed) {
    Box box = symmetric_box(system.dim(), training.box);
    box.exclude_near_axes = dict->sampling_exclusion();
    const DataSet data = sample_iid(box, training.m, seed, 0);
    const int nc = system.n_controls();
    ControlledSamples s;
    s.lag = training.plant_step * training.n_lag;
    s.X = data.points;
    s.U.resize(nc, data.points.cols());
    s.Y.resize(data.points.rows(), data.points.cols());
    RandomStream urng(seed, 7);
    for (Eigen::Index k = 0; k < data.points.cols(); ++k) {
        Vector u(nc);
        for (int c = 0; c < nc; ++c) u[c] = u_min + (u_max - u_min) * urng.uniform();
        s.U.col(k) = u;
        RandomStream noise = RandomStream(seed + 1).child(static_cast<std::uint64_t>(k));
        const Trajectory t = simulate(system, data.points.col(k), ControlSignal::constant(u, s.lag),
                                      training.plant_step, static_cast<std::size_t>(training.n_lag), noise);
        s.Y.col(k) = t.states.col(t.states.cols() - 1);
    }
    return fit_edmdc(s, dict);
}

BilinearSurrogate train_generator_bilinear(const ControlAffineSystem& system, const DictionaryPtr& dict,
                                           std::size_t m, double box_half_width, SteppingPolicy stepping,
                                           std::uint64_t seed) {
    Box box = symmetric_box(system.dim(), box_half_width);
    box.exclude_near_axes = dict->sampling_exclusion();
    std::vector<GeneratorEstimate> gens;
    for (int i = 0; i <= system.n_controls(); ++i) {
        DataSet data = sample_iid(box, m, seed, 0);
        data.control_label = i;
        gens.push_back(solve_generator(empirical_galerkin(lift_generator(*dict, data, system))));
    }
    return BilinearSurrogate(std::move(gens), dict, stepping);
}

ControlSignal random_control(double step, std::size_t n, double lo, double hi, std::uint64_t seed,
                             std::uint64_t stream) {
    RandomStream rng(seed, stream);
    Matrix values(1, static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) values(0, static_cast<Eigen::Index>(k)) = lo + (hi - lo) * rng.uniform();
    return ControlSignal::uniform_grid(step, values);
}

std::vector<Cell> row(std::initializer_list<Cell> cells) { return std::vector<Cell>(cells); }

}  // namespace detail
}  // namespace koopcert::cli
