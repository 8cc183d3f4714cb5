#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace koopcert::cli {

using Cell = std::variant<std::string, double, std::int64_t>;

struct Metadata {
    std::string tool;
    std::string version;
    std::string experiment;
    std::string config_hash;
    std::uint64_t seed = 0;
    bool quick = false;
};

/// Named columns of scalars, serialized as CSV with '#' metadata lines.
class ResultTable {
  public:
    ResultTable(std::string name, std::vector<std::string> columns);

    const std::string& name() const noexcept { return name_; }
    const std::vector<std::string>& columns() const noexcept { return columns_; }
    std::size_t rows() const noexcept { return rows_.size(); }

    void add_row(std::vector<Cell> row);

    std::size_t column(std::string_view name) const;
    const Cell& at(std::size_t row, std::string_view column) const;
    double number(std::size_t row, std::string_view column) const;
    std::string text(std::size_t row, std::string_view column) const;

    std::string to_csv(const Metadata& meta) const;

  private:
    std::string name_;
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

/// Shortest round-trip representation ("%.17g"); nan and inf spelled out.
std::string format_double(double v);

std::string sha256_hex(std::string_view data);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace koopcert::cli
