#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace dexcost {

namespace mp = boost::multiprecision;

// 128-bit significand binary float used for all curve math.
using Real = mp::number<mp::cpp_bin_float<128, mp::digit_base_2>, mp::et_off>;

inline constexpr int kWireDigits = 18;

// Fixed-point decimal with `frac_digits` fractional digits, rounded half-even.
std::string to_decimal(const Real& value, int frac_digits = kWireDigits);

// Parses [-]digits[.digits]; throws SchemaError on anything else.
Real parse_decimal(std::string_view text);

inline double to_double(const Real& value) { return value.convert_to<double>(); }

inline Real bps_to_fraction(double bps) { return Real(bps) / 10000; }

}  // namespace dexcost
