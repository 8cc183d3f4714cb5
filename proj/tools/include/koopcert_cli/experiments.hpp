#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "koopcert_cli/config.hpp"
#include "koopcert_cli/table.hpp"

namespace koopcert::cli {

inline constexpr const char* kToolName = "koopman-certify";
inline constexpr const char* kToolVersion = "0.1.0";

struct RunOptions {
    std::uint64_t seed = 1;
    bool quick = false;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct ExperimentOutput {
    std::vector<ResultTable> tables;
};

/// Reads its settings from the config (every key must be consumed) and computes the tables.
using Runner = std::function<ExperimentOutput(const Config&, const RunOptions&)>;

/// Subcommand name -> runner, in a fixed order.
const std::vector<std::pair<std::string, Runner>>& experiments();

/// Looks up and runs a subcommand; throws ConfigError for unknown names or keys.
ExperimentOutput run_experiment(const std::string& name, const Config& config, const RunOptions& options);

ExperimentOutput run_ou_bounds(const Config& config, const RunOptions& options);
ExperimentOutput run_duffing_predict(const Config& config, const RunOptions& options);
ExperimentOutput run_duffing_error(const Config& config, const RunOptions& options);
ExperimentOutput run_duffing_control(const Config& config, const RunOptions& options);
ExperimentOutput run_ou_control(const Config& config, const RunOptions& options);
ExperimentOutput run_ou_predict(const Config& config, const RunOptions& options);
ExperimentOutput run_estimate(const Config& config, const RunOptions& options);
ExperimentOutput run_certify(const Config& config, const RunOptions& options);

/// Type-7 (linear interpolation) sample quantile; sorts a copy.
double quantile(std::vector<double> values, double p);

/// Runs body(i) for i in [0, n) on up to `threads` workers; results must be written by index.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& body);

/// Full command-line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace koopcert::cli
