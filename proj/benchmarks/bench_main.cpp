#include <benchmark/benchmark.h>

#include "koopcert/koopcert.hpp"

using namespace koopcert;

namespace {

DataSet ou_trajectory(std::size_t m) {
    const auto sys = make_system("ou");
    ErgodicOptions opt;
    opt.burn_in = 0;
    opt.initial_sampler = invariant_sampler(sys);
    return sample_ergodic(sys, 0, 1e-3, m, opt, 7);
}

}  // namespace

static void BM_SampleErgodicOu(benchmark::State& state) {
    const auto m = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(ou_trajectory(m));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleErgodicOu)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_GeneratorGalerkin(benchmark::State& state) {
    const DataSet data = ou_trajectory(static_cast<std::size_t>(state.range(0)));
    const auto dict = make_dictionary("monomials", 1, 4);
    const auto sys = make_system("ou");
    for (auto _ : state) benchmark::DoNotOptimize(solve_generator(empirical_galerkin(lift_generator(*dict, data, sys))));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GeneratorGalerkin)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

static void BM_AutocovarianceSeries(benchmark::State& state) {
    const DataSet data = ou_trajectory(static_cast<std::size_t>(state.range(0)));
    const Vector x = data.points.row(0).transpose();
    for (auto _ : state) benchmark::DoNotOptimize(autocovariance_series(x, 7000));
}
BENCHMARK(BM_AutocovarianceSeries)->Arg(100000)->Arg(1000000)->Unit(benchmark::kMillisecond);

static void BM_RequiredSamples(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto pair = ou_galerkin(n);
    const auto vc = ou_variance_matrices(n, Quantity::C, 1e-3);
    const auto va = ou_variance_matrices(n, Quantity::A, 1e-3);
    const auto mix = ou_mixing(1e-3);
    const double na = pair.A.norm(), nci = pair.C.inverse().norm();
    for (auto _ : state)
        benchmark::DoNotOptimize(required_samples(0.5, 0.3, na, nci, vc, va, n, mix, BoundMode::Reversible));
}
BENCHMARK(BM_RequiredSamples)->Arg(3)->Arg(4);

static void BM_PredictBilinear(benchmark::State& state) {
    const auto dict = make_dictionary("monomials", 2, static_cast<int>(state.range(0)));
    const int n = dict->size();
    std::vector<GeneratorEstimate> gens(2);
    for (int i = 0; i < 2; ++i) {
        gens[i].L = -Matrix::Identity(n, n) + 0.01 * Matrix::Random(n, n);
        gens[i].control_label = i;
        gens[i].dictionary = dict->name();
    }
    const BilinearSurrogate s(gens, dict, {Stepping::Euler, 0.05});
    Matrix u(1, 100);
    for (Eigen::Index k = 0; k < u.cols(); ++k) u(0, k) = (k % 7) / 7.0;
    const ControlSignal control = ControlSignal::uniform_grid(0.05, u);
    Vector x0(2);
    x0 << 0.5, -0.5;
    const Vector z0 = eval_psi(*dict, x0);
    for (auto _ : state) benchmark::DoNotOptimize(predict_bilinear(s, z0, control, 100, true));
}
BENCHMARK(BM_PredictBilinear)->Arg(3)->Arg(5);

BENCHMARK_MAIN();
