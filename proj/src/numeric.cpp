#include "dexcost/numeric.hpp"

#include "dexcost/errors.hpp"

#include <cctype>

namespace dexcost {

std::string to_decimal(const Real& value, int frac_digits) {
    const Real scale = mp::pow(Real(10), frac_digits);
    const Real scaled = mp::abs(value) * scale;
    const Real whole = mp::floor(scaled);
    const Real frac = scaled - whole;

    mp::cpp_int units = whole.convert_to<mp::cpp_int>();
    if (frac > Real(0.5) || (frac == Real(0.5) && mp::bit_test(units, 0))) {
        ++units;
    }

    std::string digits = units.str();
    if (static_cast<int>(digits.size()) <= frac_digits) {
        digits.insert(0, static_cast<std::size_t>(frac_digits) + 1 - digits.size(), '0');
    }
    if (frac_digits > 0) {
        digits.insert(digits.size() - static_cast<std::size_t>(frac_digits), 1, '.');
    }
    if (value < 0 && units != 0) {
        digits.insert(0, 1, '-');
    }
    return digits;
}

Real parse_decimal(std::string_view text) {
    std::size_t pos = 0;
    if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) ++pos;
    const std::size_t int_start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    bool any_digits = pos > int_start;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        const std::size_t frac_start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        any_digits = any_digits || pos > frac_start;
    }
    if (!any_digits || pos != text.size()) {
        throw SchemaError("not a decimal number: '" + std::string(text) + "'");
    }
    return Real(std::string(text));
}

}  // namespace dexcost
