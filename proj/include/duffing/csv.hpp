// csv.hpp — RFC-4180 tables with one header row.

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace duffing {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Index of a header column; ConfigError when absent.
    std::size_t column(std::string_view name) const;
    std::vector<double> numeric_column(std::string_view name) const;
};

// Shortest round-trip decimal representation.
std::string format_double(double value);
double parse_double(std::string_view text);

// Quotes a field when it contains a comma, quote, CR or LF.
std::string quote_field(std::string_view field);

std::string to_csv_string(const CsvTable& table);
CsvTable parse_csv(std::string_view text);

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

} // namespace duffing
