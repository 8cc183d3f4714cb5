#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace koopcert::cli {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` configuration with dotted keys and '#' comments.
/// Every key must be read by the experiment; leftovers are reported as unknown.
class Config {
  public:
    Config() = default;

    static Config parse(std::string_view text, const std::string& origin = "<config>");
    static Config load(const std::filesystem::path& path);

    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string text(const std::string& key, const std::string& fallback) const;
    double number(const std::string& key, double fallback) const;
    std::int64_t integer(const std::string& key, std::int64_t fallback) const;
    bool flag(const std::string& key, bool fallback) const;
    std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback) const;
    /// All entries under `prefix.`, keyed by the remainder.
    std::map<std::string, std::string> section(const std::string& prefix) const;

    /// Throws ConfigError naming every key that was never read.
    void check_unused() const;

    /// Sorted `key = value` lines, the input to the config hash.
    std::string canonical() const;

  private:
    std::map<std::string, std::string> values_;
    mutable std::set<std::string> used_;
};

double parse_number(const std::string& text, const std::string& what);

}  // namespace koopcert::cli
