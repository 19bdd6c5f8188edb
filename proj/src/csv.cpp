#include "dexcost/csv.hpp"

#include "dexcost/errors.hpp"

#include <boost/tokenizer.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace dexcost {

namespace {

std::string join(const std::vector<std::string>& fields) {
    std::string s;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) s += ',';
        s += fields[i];
    }
    return s;
}

std::vector<std::string> split(const std::string& line, const std::string& where) {
    using Separator = boost::escaped_list_separator<char>;
    // Backslash is not an escape in CSV; use a character that cannot appear.
    try {
        boost::tokenizer<Separator> tok(line, Separator('\0', ',', '"'));
        return {tok.begin(), tok.end()};
    } catch (const boost::escaped_list_error& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path, const std::vector<std::string>& columns) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError(path.string() + ": cannot open");
    }
    const std::string name = path.filename().string();
    CsvTable table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string where = name + ":" + std::to_string(line_no);
        if (!have_header) {
            const auto header = split(line, where);
            if (header != columns) {
                throw SchemaError(where + ": header '" + line + "' does not match '" + join(columns) + "'");
            }
            have_header = true;
            continue;
        }
        if (line.empty()) {
            throw SchemaError(where + ": blank line");
        }
        auto fields = split(line, where);
        if (fields.size() != columns.size()) {
            throw SchemaError(where + ": expected " + std::to_string(columns.size()) + " fields, found " +
                              std::to_string(fields.size()));
        }
        table.rows.push_back(std::move(fields));
        table.lines.push_back(line_no);
    }
    table.empty_file = !have_header;
    return table;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        const std::string& f = fields[i];
        if (f.find_first_of(",\"\n") == std::string::npos) {
            out << f;
            continue;
        }
        out << '"';
        for (char c : f) {
            if (c == '"') out << '"';
            out << c;
        }
        out << '"';
    }
    out << '\n';
}

std::string format_double(double value) {
    if (value == 0) value = 0;
    char buf[512];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
    return std::string(buf, res.ptr);
}

std::string format_fixed(double value, int digits) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    std::string s = buf;
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

double parse_double_field(std::string_view text, std::string_view what) {
    double v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
        throw SchemaError(std::string(what) + ": not a number: '" + std::string(text) + "'");
    }
    return v;
}

std::int64_t parse_int_field(std::string_view text, std::string_view what) {
    std::int64_t v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw SchemaError(std::string(what) + ": not an integer: '" + std::string(text) + "'");
    }
    return v;
}

std::optional<double> parse_optional_double(std::string_view text, std::string_view what) {
    if (text.empty()) return std::nullopt;
    return parse_double_field(text, what);
}

bool parse_bool_field(std::string_view text, std::string_view what) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw SchemaError(std::string(what) + ": not a boolean: '" + std::string(text) + "'");
}

}  // namespace dexcost
