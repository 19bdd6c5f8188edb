#pragma once

// Flat-file plumbing: CSV with a declared header, and text forms of numbers
// that round-trip exactly.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace dexcost {

struct CsvTable {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> lines;  // 1-based line number of each row
    bool empty_file = false;         // no header at all
};

// Reads `path` and checks its header against `columns` exactly. A zero-byte
// file gives an empty table with empty_file set. Throws SchemaError naming the
// file and line on a bad header or a row with the wrong field count.
CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& columns);

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest fixed-notation decimal that parses back to the same double; negative zero prints as 0.
std::string format_double(double value);
// Fixed-point with `digits` decimals; "-0.000" prints as "0.000".
std::string format_fixed(double value, int digits);

// Strict parsers for one CSV field; `what` names the field in the SchemaError.
double parse_double_field(std::string_view text, std::string_view what);
std::int64_t parse_int_field(std::string_view text, std::string_view what);
std::optional<double> parse_optional_double(std::string_view text, std::string_view what);
bool parse_bool_field(std::string_view text, std::string_view what);

}  // namespace dexcost
