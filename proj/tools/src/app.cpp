#include <filesystem>
#include <iostream>
#include <system_error>

#include <CLI11.hpp>

#include "koopcert/errors.hpp"
#include "koopcert_cli/experiments.hpp"

namespace koopcert::cli {

const std::vector<std::pair<std::string, Runner>>& experiments() {
    static const std::vector<std::pair<std::string, Runner>> registry{
        {"ou-bounds", run_ou_bounds},         {"duffing-predict", run_duffing_predict},
        {"duffing-error", run_duffing_error}, {"duffing-control", run_duffing_control},
        {"ou-control", run_ou_control},       {"ou-predict", run_ou_predict},
        {"estimate", run_estimate},           {"certify", run_certify},
    };
    return registry;
}

ExperimentOutput run_experiment(const std::string& name, const Config& config, const RunOptions& options) {
    for (const auto& [n, runner] : experiments())
        if (n == name) return runner(config, options);
    throw ConfigError("unknown subcommand '" + name + "'");
}

namespace {

std::string config_hash(const Config& cfg, const std::string& subcommand, bool quick) {
    return sha256_hex(cfg.canonical() + "subcommand = " + subcommand + "\nquick = " + (quick ? "1" : "0") + "\n");
}

void write_outputs(const std::filesystem::path& dir, const std::vector<ResultTable>& tables, const Metadata& meta) {
    std::vector<std::pair<std::filesystem::path, std::string>> files;
    for (const auto& t : tables) files.emplace_back(dir / (t.name() + ".csv"), t.to_csv(meta));
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    try {
        for (const auto& [path, content] : files) {
            write_file_atomic(path, content);
            written.push_back(path);
        }
    } catch (...) {
        std::error_code ec;
        for (const auto& p : written) std::filesystem::remove(p, ec);
        throw;
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Certified Koopman generator estimation and bilinear surrogate experiments", kToolName};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "results";
    RunOptions options;
    std::string chosen;
    for (const auto& [name, runner] : experiments()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
        sub->add_option("--config", config_path, "configuration file (key = value lines)")->required();
        sub->add_option("--seed", options.seed, "master seed")->capture_default_str();
        sub->add_option("--out", out_dir, "output directory")->capture_default_str();
        sub->add_flag("--quick", options.quick, "reduced repeats and sample sizes");
        sub->add_option("--threads", options.threads, "worker threads, 0 for all cores")->capture_default_str();
        sub->callback([&chosen, n = name] { chosen = n; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const Config cfg = Config::load(config_path);
        const Metadata meta{kToolName, kToolVersion, chosen, config_hash(cfg, chosen, options.quick), options.seed, options.quick};
        const ExperimentOutput output = run_experiment(chosen, cfg, options);
        write_outputs(out_dir, output.tables, meta);
        for (const auto& t : output.tables)
            std::cout << (std::filesystem::path(out_dir) / (t.name() + ".csv")).string() << '\n';
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid argument: " << e.what() << '\n';
        return 2;
    } catch (const SingularMassMatrix& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const HypothesisViolated& e) {
        std::cerr << "hypothesis violated: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace koopcert::cli
