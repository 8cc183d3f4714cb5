#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Eigenvalues>

#include "common.hpp"

namespace koopcert::cli {

using detail::row;

namespace {

BoundMode parse_mode(const std::string& s) {
    if (s == "iid") return BoundMode::Iid;
    if (s == "ergodic") return BoundMode::Ergodic;
    if (s == "reversible") return BoundMode::Reversible;
    throw ConfigError("bound.mode must be iid, ergodic or reversible");
}

std::optional<MixingParams> read_mixing(const Config& cfg, BoundMode mode, double dt) {
    const bool given = cfg.has("mixing.m") || cfg.has("mixing.omega");
    const double M = cfg.number("mixing.m", 1.0);
    const double omega = cfg.number("mixing.omega", 0.0);
    if (mode == BoundMode::Iid && !given) return std::nullopt;
    if (!given) throw ConfigError("ergodic bounds need mixing.m and mixing.omega");
    MixingParams p{M, omega, dt, mode == BoundMode::Reversible};
    try {
        p.validate();
    } catch (const InvalidArgument& e) {
        throw ConfigError(std::string("mixing: ") + e.what());
    }
    return p;
}

/// Sampled data set described by the sampling.* keys.
struct Sampling {
    std::string mode;
    std::size_t m = 0;
    double dt = 0.0;
    double box = 0.0;
    std::size_t burn_in = 0;
    int substeps = 1;
    int control = 0;
};

Sampling read_sampling(const Config& cfg) {
    Sampling s;
    s.mode = cfg.text("sampling.mode", "ergodic");
    const auto m = cfg.integer("sampling.m", 10000);
    if (m < 1) throw ConfigError("sampling.m must be positive");
    s.m = static_cast<std::size_t>(m);
    s.dt = cfg.number("sampling.dt", 1e-3);
    s.box = cfg.number("sampling.box", 2.0);
    const auto burn = cfg.integer("sampling.burn_in", 10000);
    if (burn < 0) throw ConfigError("sampling.burn_in must be nonnegative");
    s.burn_in = static_cast<std::size_t>(burn);
    s.substeps = static_cast<int>(cfg.integer("sampling.substeps", 1));
    s.control = static_cast<int>(cfg.integer("sampling.control", 0));
    if (s.mode != "ergodic" && s.mode != "iid" && s.mode != "invariant")
        throw ConfigError("sampling.mode must be ergodic, iid or invariant");
    if (!(s.dt > 0.0)) throw ConfigError("sampling.dt must be positive");
    return s;
}

DataSet draw(const ControlAffineSystem& sys, const Dictionary& dict, const Sampling& s, std::uint64_t seed) {
    if (s.control < 0 || s.control > sys.n_controls()) throw ConfigError("sampling.control is out of range");
    if (s.mode == "ergodic") {
        ErgodicOptions opt;
        opt.burn_in = s.burn_in;
        opt.substeps = s.substeps;
        return sample_ergodic(sys, s.control, s.dt, s.m, opt, seed);
    }
    DataSet data;
    if (s.mode == "invariant") {
        auto sampler = invariant_sampler(sys, s.control);
        if (!sampler) throw ConfigError("the system has no known invariant law to sample from");
        data = sample_iid(*sampler, s.m, seed);
    } else {
        Box box = detail::symmetric_box(sys.dim(), s.box);
        box.exclude_near_axes = dict.sampling_exclusion();
        data = sample_iid(box, s.m, seed);
    }
    data.control_label = s.control;
    return data;
}

void add_matrix(ResultTable& t, const std::string& name, const Matrix& M) {
    for (Eigen::Index i = 0; i < M.rows(); ++i)
        for (Eigen::Index j = 0; j < M.cols(); ++j)
            t.add_row(row({name, static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), M(i, j)}));
}

VarianceMatrices uniform_variance(int n, double frob, double frob_inf, Quantity q) {
    VarianceMatrices v;
    v.sigma = Matrix::Constant(n, n, frob / n);
    v.sigma_inf = Matrix::Constant(n, n, frob_inf / n);
    v.quantity = q;
    v.source = "given";
    return v;
}

}  // namespace

ExperimentOutput run_estimate(const Config& cfg, const RunOptions& opt) {
    const auto sys = detail::system_from_config(cfg, "ou", {});
    const auto dict = detail::build_dictionary(detail::dictionary_settings(cfg, {"monomials", 4}), sys.dim());
    const Sampling s = read_sampling(cfg);
    const std::string target = cfg.text("estimate.target", "generator");
    const auto lag = cfg.integer("estimate.lag", 1);
    const double partner_step = cfg.number("estimate.partner_step", s.dt);
    const bool dirichlet = cfg.flag("estimate.dirichlet_form", false);
    cfg.check_unused();
    if (target != "generator" && target != "operator") throw ConfigError("estimate.target must be generator or operator");
    if (lag < 1) throw ConfigError("estimate.lag must be positive");

    DataSet data = draw(sys, *dict, s, opt.seed);
    GalerkinPair pair;
    Matrix estimate;
    double condition = 0.0, residual = 0.0, lag_time = 0.0;
    if (target == "generator") {
        pair = dirichlet ? empirical_galerkin_reversible(*dict, data, sys)
                         : empirical_galerkin(lift_generator(*dict, data, sys));
        const GeneratorEstimate g = solve_generator(pair);
        estimate = g.L;
        condition = g.condition;
        residual = g.residual;
    } else {
        if (s.mode != "ergodic") {
            const double steps = std::round(static_cast<double>(lag) * s.dt / partner_step);
            attach_partners(data, sys, s.control, partner_step, static_cast<std::size_t>(steps), opt.seed + 1);
        }
        const LiftedData lifted = lift_operator(*dict, data, static_cast<std::size_t>(lag));
        pair = empirical_galerkin(lifted);
        const KoopmanEstimate k = estimate_koopman_operator(lifted);
        estimate = k.K;
        condition = k.condition;
        residual = k.residual;
        lag_time = k.lag_time;
    }

    ResultTable matrices("estimate-matrices", {"matrix", "i", "j", "value"});
    add_matrix(matrices, "C", pair.C);
    add_matrix(matrices, "A", pair.A);
    add_matrix(matrices, target == "generator" ? "L" : "K", estimate);

    ResultTable eig("estimate-eigenvalues", {"index", "real", "imag"});
    Eigen::EigenSolver<Matrix> es(estimate, false);
    std::vector<std::complex<double>> ev(es.eigenvalues().begin(), es.eigenvalues().end());
    std::sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) {
        return a.real() != b.real() ? a.real() > b.real() : a.imag() > b.imag();
    });
    for (std::size_t k = 0; k < ev.size(); ++k)
        eig.add_row(row({static_cast<std::int64_t>(k), ev[k].real(), ev[k].imag()}));

    ResultTable summary("estimate-summary", {"target", "dictionary", "sampling", "m", "dt", "lag_time", "n",
                                             "condition", "residual", "seed"});
    summary.add_row(row({target, dict->name(), s.mode, static_cast<std::int64_t>(pair.m), s.dt, lag_time,
                         static_cast<std::int64_t>(dict->size()), condition, residual,
                         static_cast<std::int64_t>(opt.seed)}));
    return {{std::move(matrices), std::move(eig), std::move(summary)}};
}

ExperimentOutput run_certify(const Config& cfg, const RunOptions& opt) {
    const std::string input = cfg.text("certify.input", "norms");
    const std::string target = cfg.text("certify.target", "generator");
    const BoundMode mode = parse_mode(cfg.text("bound.mode", "iid"));
    const double eps = cfg.number("bound.epsilon", 0.1);
    const double delta = cfg.number("bound.delta", 0.1);
    if (target != "generator" && target != "matrix") throw ConfigError("certify.target must be generator or matrix");
    if (!(eps > 0.0) || !(delta > 0.0 && delta < 1.0)) throw ConfigError("bound.epsilon and bound.delta out of range");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    ResultTable table("certify", {"input", "target", "mode", "n", "epsilon", "delta", "sub_epsilon", "sub_delta",
                                  "m_min", "m_C", "m_A", "m_used", "epsilon_at_m_used", "sigma_C_frobenius",
                                  "sigma_A_frobenius", "norm_A", "norm_C_inv", "q", "plug_in", "seed"});

    int n = 0;
    VarianceMatrices sC, sA;
    double norm_A = nan, norm_C_inv = nan;
    std::optional<MixingParams> mixing;
    std::optional<GalerkinPair> pair;
    std::size_t m_used = 0;
    bool plug_in = false;

    if (input == "norms") {
        n = static_cast<int>(cfg.integer("certify.n", 4));
        const double sc = cfg.number("variance.sigma_c", 1.0);
        const double sc_inf = cfg.number("variance.sigma_c_inf", sc);
        const double sa = cfg.number("variance.sigma_a", sc);
        const double sa_inf = cfg.number("variance.sigma_a_inf", sa);
        norm_A = cfg.number("norms.a", 1.0);
        norm_C_inv = cfg.number("norms.c_inv", 1.0);
        mixing = read_mixing(cfg, mode, cfg.number("mixing.dt", 1.0));
        cfg.check_unused();
        if (n < 1) throw ConfigError("certify.n must be positive");
        sC = uniform_variance(n, sc, sc_inf, Quantity::C);
        sA = uniform_variance(n, sa, sa_inf, Quantity::A);
    } else if (input == "ou-oracle") {
        n = static_cast<int>(cfg.integer("dict.degree", 4));
        const double dt = cfg.number("sampling.dt", 1e-3);
        const auto m = cfg.integer("sampling.m", 0);
        cfg.check_unused();
        if (n < 1) throw ConfigError("dict.degree must be positive");
        if (!(dt > 0.0)) throw ConfigError("sampling.dt must be positive");
        if (m < 0) throw ConfigError("sampling.m must be nonnegative");
        m_used = static_cast<std::size_t>(m);
        sC = ou_variance_matrices(n, Quantity::C, dt);
        sA = ou_variance_matrices(n, Quantity::A, dt);
        const GalerkinPair p = ou_galerkin(n);
        norm_A = p.A.norm();
        norm_C_inv = p.C.inverse().norm();
        if (mode != BoundMode::Iid) mixing = ou_mixing(dt);
        pair = p;
    } else if (input == "data") {
        const auto sys = detail::system_from_config(cfg, "ou", {});
        const auto dict = detail::build_dictionary(detail::dictionary_settings(cfg, {"monomials", 4}), sys.dim());
        const Sampling s = read_sampling(cfg);
        const bool dirichlet = cfg.flag("estimate.dirichlet_form", false);
        mixing = read_mixing(cfg, mode, s.dt);
        cfg.check_unused();
        if (mode != BoundMode::Iid && s.mode != "ergodic") throw ConfigError("ergodic bounds need ergodic sampling");
        const DataSet data = draw(sys, *dict, s, opt.seed);
        n = dict->size();
        const AEstimator est = dirichlet ? AEstimator::DirichletForm : AEstimator::Standard;
        const MixingParams mix_for_window = mixing ? *mixing : MixingParams{1.0, 1.0, s.dt, false};
        sC = empirical_variance_matrices(data, *dict, sys, Quantity::C, mix_for_window, est);
        sA = empirical_variance_matrices(data, *dict, sys, Quantity::A, mix_for_window, est);
        GalerkinPair p = dirichlet ? empirical_galerkin_reversible(*dict, data, sys)
                                   : empirical_galerkin(lift_generator(*dict, data, sys));
        norm_A = kPlugInInflation * p.A.norm();
        double cond = 0.0, res = 0.0;
        norm_C_inv = kPlugInInflation * solve_mass_system(p.C, Matrix::Identity(n, n), cond, res).norm();
        m_used = static_cast<std::size_t>(data.points.cols());
        plug_in = true;
        pair = std::move(p);
    } else {
        throw ConfigError("certify.input must be norms, ou-oracle or data");
    }

    const double q = mixing ? mixing->q() : nan;
    const double fC = sC.sigma.norm(), fA = sA.sigma.norm();
    const std::string mode_name = to_string(mode);
    auto m_cell = [](std::size_t m) { return Cell(static_cast<std::int64_t>(m)); };

    if (target == "matrix") {
        const std::size_t mC = samples_for_epsilon(eps, delta, sC, n, mixing, mode);
        const std::size_t mA = samples_for_epsilon(eps, delta, sA, n, mixing, mode);
        const double at_m = m_used > 0 ? std::max(concentration_bound(sC, n, m_used, delta, mixing, mode),
                                                  concentration_bound(sA, n, m_used, delta, mixing, mode))
                                       : nan;
        table.add_row(row({input, target, mode_name, static_cast<std::int64_t>(n), eps, delta, eps, delta,
                           m_cell(std::max(mC, mA)), m_cell(mC), m_cell(mA), m_cell(m_used), at_m, fC, fA, norm_A,
                           norm_C_inv, q, static_cast<std::int64_t>(plug_in), static_cast<std::int64_t>(opt.seed)}));
    } else {
        const SampleRequirement req = required_samples(eps, delta, norm_A, norm_C_inv, sC, sA, n, mixing, mode);
        double at_m = nan;
        if (m_used > 0 && pair) {
            try {
                at_m = generator_error_certificate(*pair, sC, sA, m_used, delta, mixing, mode, plug_in).epsilon;
            } catch (const InvalidArgument&) {
                at_m = std::numeric_limits<double>::infinity();
            }
        }
        table.add_row(row({input, target, mode_name, static_cast<std::int64_t>(n), eps, delta,
                           req.certificate.sub_epsilon, req.certificate.sub_delta, m_cell(req.m), m_cell(req.m_C),
                           m_cell(req.m_A), m_cell(m_used), at_m, fC, fA, norm_A, norm_C_inv, q,
                           static_cast<std::int64_t>(plug_in), static_cast<std::int64_t>(opt.seed)}));
    }
    return {{std::move(table)}};
}

}  // namespace koopcert::cli
