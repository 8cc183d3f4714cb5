#pragma once

#include <memory>
#include <string>
#include <vector>

#include "koopcert/koopcert.hpp"
#include "koopcert_cli/config.hpp"
#include "koopcert_cli/experiments.hpp"

namespace koopcert::cli::detail {

/// system.kind plus every other system.* key as a numeric parameter.
ControlAffineSystem system_from_config(const Config& cfg, const std::string& default_kind,
                                       const ParameterMap& defaults);

struct DictionarySettings {
    std::string kind = "monomials";
    int degree = 1;
    bool constant = false;
    bool normalized = false;
};

DictionarySettings dictionary_settings(const Config& cfg, const DictionarySettings& defaults);
DictionaryPtr build_dictionary(const DictionarySettings& s, int dim);

Vector parse_vector(const std::vector<double>& v);
Box symmetric_box(int dim, double half_width);

/// Finite-lag bilinear surrogate: for each e_i, m iid box points with partners after
/// n_lag plant steps of size h, eDMD, then L = (K - I)/(n_lag h) stepped with euler.
struct FiniteLagTraining {
    std::size_t m = 100;
    int n_lag = 10;
    double plant_step = 0.005;
    double box = 1.5;
};

BilinearSurrogate train_finite_lag_bilinear(const ControlAffineSystem& system, const DictionaryPtr& dict,
                                            const FiniteLagTraining& training, std::uint64_t seed);

/// eDMDc on m iid box points with controls drawn uniformly from [u_min, u_max].
LinearSurrogate train_edmdc(const ControlAffineSystem& system, const DictionaryPtr& dict,
                            const FiniteLagTraining& training, double u_min, double u_max, std::uint64_t seed);

/// gEDMD on m iid box points per e_i, with analytic generator lifting.
BilinearSurrogate train_generator_bilinear(const ControlAffineSystem& system, const DictionaryPtr& dict,
                                           std::size_t m, double box, SteppingPolicy stepping, std::uint64_t seed);

/// Piecewise-constant control with n values drawn uniformly from [lo, hi].
ControlSignal random_control(double step, std::size_t n, double lo, double hi, std::uint64_t seed,
                             std::uint64_t stream);

std::vector<Cell> row(std::initializer_list<Cell> cells);

}  // namespace koopcert::cli::detail
