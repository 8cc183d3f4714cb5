#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace koopcert::cli {

using detail::row;

namespace {

struct OuBoundsSettings {
    int degree = 4;
    double dt = 1e-3;
    std::vector<std::size_t> m_grid{1000, 10000, 100000, 1000000};
    double delta = 0.1;
    double certificate_delta = 0.3;
    BoundMode mode = BoundMode::Reversible;
    std::size_t repeats = 500;
};

BoundMode parse_mode(const std::string& s) {
    if (s == "iid") return BoundMode::Iid;
    if (s == "ergodic") return BoundMode::Ergodic;
    if (s == "reversible") return BoundMode::Reversible;
    throw ConfigError("bound.mode must be iid, ergodic or reversible, not '" + s + "'");
}

OuBoundsSettings read_settings(const Config& cfg, const RunOptions& opt) {
    OuBoundsSettings s;
    s.degree = static_cast<int>(cfg.integer("dict.degree", s.degree));
    s.dt = cfg.number("sampling.dt", s.dt);
    std::vector<double> grid(s.m_grid.begin(), s.m_grid.end());
    grid = cfg.numbers("sampling.m_grid", grid);
    s.delta = cfg.number("bound.delta", s.delta);
    s.certificate_delta = cfg.number("bound.certificate_delta", s.certificate_delta);
    s.mode = parse_mode(cfg.text("bound.mode", "reversible"));
    s.repeats = static_cast<std::size_t>(cfg.integer("repeats", static_cast<std::int64_t>(s.repeats)));
    cfg.check_unused();

    if (s.degree < 1 || s.degree > 8) throw ConfigError("dict.degree must lie in 1..8");
    if (!(s.dt > 0.0)) throw ConfigError("sampling.dt must be positive");
    if (s.repeats < 2) throw ConfigError("repeats must be at least 2");
    s.m_grid.clear();
    for (double m : grid) {
        if (!(m >= 1.0) || m != std::floor(m)) throw ConfigError("sampling.m_grid entries must be positive integers");
        if (opt.quick && m > 1e5) continue;
        s.m_grid.push_back(static_cast<std::size_t>(m));
    }
    if (s.m_grid.empty()) throw ConfigError("sampling.m_grid is empty");
    std::sort(s.m_grid.begin(), s.m_grid.end());
    s.m_grid.erase(std::unique(s.m_grid.begin(), s.m_grid.end()), s.m_grid.end());
    if (opt.quick) s.repeats = std::min<std::size_t>(s.repeats, 50);
    return s;
}

// Per repeat and grid point: the estimation errors of C, A and L.
struct RepeatErrors {
    std::vector<Matrix> dC, dA;
    std::vector<double> dL;  // Frobenius, NaN if C~ was singular
};

RepeatErrors run_repeat(const OuBoundsSettings& s, const GalerkinPair& exact, const Matrix& L_exact,
                        std::uint64_t seed, std::uint64_t repeat) {
    const auto sys = make_system("ou");
    const auto dict = make_dictionary("monomials", 1, s.degree);
    const int n = dict->size();
    ErgodicOptions opt;
    opt.burn_in = 0;
    opt.initial_sampler = invariant_sampler(sys);
    const DataSet data = sample_ergodic(sys, 0, s.dt, s.m_grid.back(), opt, seed, repeat);

    RepeatErrors out;
    Matrix sum_C = Matrix::Zero(n, n), sum_A = Matrix::Zero(n, n);
    std::size_t done = 0;
    for (std::size_t m : s.m_grid) {
        DataSet block;
        block.mode = data.mode;
        block.dt = data.dt;
        block.points = data.points.middleCols(static_cast<Eigen::Index>(done), static_cast<Eigen::Index>(m - done));
        const GalerkinPair part = empirical_galerkin_reversible(*dict, block, sys);
        const double w = static_cast<double>(m - done);
        sum_C += w * part.C;
        sum_A += w * part.A;
        done = m;
        const GalerkinPair est = analytical_pair(sum_C / static_cast<double>(m), sum_A / static_cast<double>(m));
        out.dC.push_back(est.C - exact.C);
        out.dA.push_back(est.A - exact.A);
        try {
            out.dL.push_back((solve_generator(est).L - L_exact).norm());
        } catch (const SingularMassMatrix&) {
            out.dL.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return out;
}

}  // namespace

ExperimentOutput run_ou_bounds(const Config& cfg, const RunOptions& opt) {
    const OuBoundsSettings s = read_settings(cfg, opt);
    const int n = s.degree;
    const GalerkinPair exact = ou_galerkin(n);
    const Matrix L_exact = solve_generator(exact).L;
    const MixingParams mixing = ou_mixing(s.dt);
    const VarianceMatrices var_C = ou_variance_matrices(n, Quantity::C, s.dt);
    const VarianceMatrices var_A = ou_variance_matrices(n, Quantity::A, s.dt);

    std::vector<RepeatErrors> repeats(s.repeats);
    parallel_for(s.repeats, opt.threads,
                 [&](std::size_t r) { repeats[r] = run_repeat(s, exact, L_exact, opt.seed, r); });

    ResultTable table("ou-bounds", {"experiment", "quantity", "statistic", "m", "delta", "eps_theory", "eps_empirical",
                                    "coverage", "repeats", "seed"});
    const auto seed = static_cast<std::int64_t>(opt.seed);
    const auto reps = static_cast<std::int64_t>(s.repeats);
    for (std::size_t g = 0; g < s.m_grid.size(); ++g) {
        const std::size_t m = s.m_grid[g];
        for (Quantity q : {Quantity::C, Quantity::A}) {
            const VarianceMatrices& var = q == Quantity::C ? var_C : var_A;
            Matrix eps_entry(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    eps_entry(i, j) = concentration_bound(var, n, m, s.delta, mixing, s.mode, std::make_pair(i, j));
            const double eps_frob = concentration_bound(var, n, m, s.delta, mixing, s.mode);

            const Matrix& exact_q = q == Quantity::C ? exact.C : exact.A;
            std::vector<double> frob;
            std::size_t frob_hits = 0;
            Matrix entry_quantile(n, n), entry_coverage(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    // entries with zero variance are exact up to the rounding of an m-term sum
                    const double slack = static_cast<double>(m) * std::numeric_limits<double>::epsilon() *
                                         (1.0 + std::abs(exact_q(i, j)));
                    std::vector<double> errs;
                    std::size_t hits = 0;
                    for (const auto& rep : repeats) {
                        const double e = std::abs((q == Quantity::C ? rep.dC[g] : rep.dA[g])(i, j));
                        errs.push_back(e);
                        hits += e <= eps_entry(i, j) + slack;
                    }
                    entry_quantile(i, j) = quantile(errs, 1.0 - s.delta);
                    entry_coverage(i, j) = static_cast<double>(hits) / static_cast<double>(s.repeats);
                }
            for (const auto& rep : repeats) {
                const double e = (q == Quantity::C ? rep.dC[g] : rep.dA[g]).norm();
                frob.push_back(e);
                frob_hits += e <= eps_frob;
            }
            const double nr = static_cast<double>(s.repeats);
            const double level = 1.0 - s.delta;
            const std::string qs = to_string(q);
            const auto m64 = static_cast<std::int64_t>(m);
            table.add_row(row({"ou-bounds", qs, "max-entry", m64, s.delta, eps_entry.maxCoeff(),
                               entry_quantile.maxCoeff(), entry_coverage.minCoeff(), reps, seed}));
            table.add_row(row({"ou-bounds", qs, "mean-entry", m64, s.delta, eps_entry.mean(), entry_quantile.mean(),
                               entry_coverage.mean(), reps, seed}));
            table.add_row(row({"ou-bounds", qs, "frobenius", m64, s.delta, eps_frob, quantile(frob, level),
                               frob_hits / nr, reps, seed}));
        }
    }

    ResultTable cert("ou-bounds-certificate",
                     {"experiment", "m", "delta_tilde", "eps_tilde", "certified", "coverage", "error_quantile",
                      "norm_A", "norm_C_inv", "sub_epsilon", "sub_delta", "mode", "repeats", "seed"});
    for (std::size_t g = 0; g < s.m_grid.size(); ++g) {
        const std::size_t m = s.m_grid[g];
        std::vector<double> errs;
        for (const auto& rep : repeats)
            errs.push_back(std::isnan(rep.dL[g]) ? std::numeric_limits<double>::infinity() : rep.dL[g]);
        const double err_q = quantile(errs, 1.0 - s.certificate_delta);
        double eps = std::numeric_limits<double>::quiet_NaN(), coverage = std::numeric_limits<double>::quiet_NaN();
        double norm_A = exact.A.norm(), norm_C_inv = exact.C.inverse().norm();
        double sub_eps = std::numeric_limits<double>::quiet_NaN();
        std::int64_t certified = 0;
        try {
            const ErrorCertificate c =
                generator_error_certificate(exact, var_C, var_A, m, s.certificate_delta, mixing, s.mode);
            eps = c.epsilon;
            sub_eps = c.sub_epsilon;
            norm_A = c.norm_A;
            norm_C_inv = c.norm_C_inv;
            certified = 1;
            coverage = static_cast<double>(std::count_if(errs.begin(), errs.end(), [&](double e) { return e <= eps; })) /
                       static_cast<double>(errs.size());
        } catch (const InvalidArgument&) {
        }
        cert.add_row(row({"ou-bounds", static_cast<std::int64_t>(m), s.certificate_delta, eps, certified, coverage,
                          err_q, norm_A, norm_C_inv, sub_eps, s.certificate_delta / 3.0, to_string(s.mode), reps,
                          seed}));
    }
    return {{std::move(table), std::move(cert)}};
}

}  // namespace koopcert::cli
