#include "koopcert_cli/table.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <openssl/evp.h>

namespace koopcert::cli {

ResultTable::ResultTable(std::string name, std::vector<std::string> columns)
    : name_(std::move(name)), columns_(std::move(columns)) {}

void ResultTable::add_row(std::vector<Cell> row) {
    if (row.size() != columns_.size())
        throw std::logic_error("row width " + std::to_string(row.size()) + " does not match " +
                               std::to_string(columns_.size()) + " columns of " + name_);
    rows_.push_back(std::move(row));
}

std::size_t ResultTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i] == name) return i;
    throw std::out_of_range("table " + name_ + " has no column " + std::string(name));
}

const Cell& ResultTable::at(std::size_t row, std::string_view col) const { return rows_.at(row).at(column(col)); }

double ResultTable::number(std::size_t row, std::string_view col) const {
    const Cell& c = at(row, col);
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
    throw std::invalid_argument("column " + std::string(col) + " is not numeric");
}

std::string ResultTable::text(std::size_t row, std::string_view col) const {
    const Cell& c = at(row, col);
    if (const auto* s = std::get_if<std::string>(&c)) return *s;
    if (const auto* d = std::get_if<double>(&c)) return format_double(*d);
    return std::to_string(std::get<std::int64_t>(c));
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

std::string ResultTable::to_csv(const Metadata& meta) const {
    std::string out;
    out += "# tool: " + meta.tool + "\n";
    out += "# version: " + meta.version + "\n";
    out += "# experiment: " + meta.experiment + "\n";
    out += "# table: " + name_ + "\n";
    out += "# config_sha256: " + meta.config_hash + "\n";
    out += "# seed: " + std::to_string(meta.seed) + "\n";
    out += std::string("# quick: ") + (meta.quick ? "true" : "false") + "\n";
    for (std::size_t i = 0; i < columns_.size(); ++i) out += (i ? "," : "") + csv_field(columns_[i]);
    out += "\n";
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ",";
            if (const auto* s = std::get_if<std::string>(&row[i]))
                out += csv_field(*s);
            else if (const auto* d = std::get_if<double>(&row[i]))
                out += format_double(*d);
            else
                out += std::to_string(std::get<std::int64_t>(row[i]));
        }
        out += "\n";
    }
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace koopcert::cli
