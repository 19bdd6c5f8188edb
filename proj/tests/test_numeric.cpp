#include "dexcost/csv.hpp"
#include "dexcost/errors.hpp"
#include "dexcost/numeric.hpp"

#include <doctest.h>

#include <random>
#include <sstream>

using namespace dexcost;

TEST_CASE("decimal text round-trips at 18 digits") {
    CHECK(to_decimal(Real(1)) == "1.000000000000000000");
    CHECK(to_decimal(Real(-2.5), 2) == "-2.50");
    CHECK(to_decimal(Real("0.125"), 2) == "0.12");  // half to even
    CHECK(to_decimal(Real("0.375"), 2) == "0.38");
    CHECK(to_decimal(Real("-0.0000000000000000001")) == "0.000000000000000000");
    CHECK(to_decimal(parse_decimal("123456789.123456789012345678")) == "123456789.123456789012345678");

    std::mt19937_64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const std::string text = std::to_string(rng() % 1000000000) + "." + std::to_string(100000000 + rng() % 900000000) +
                                 std::to_string(100000000 + rng() % 900000000);
        CHECK(to_decimal(parse_decimal(text)) == text);
    }
}

TEST_CASE("decimal parser rejects junk") {
    for (const char* bad : {"", "-", ".", "1e5", "1.2.3", " 1", "0x10", "1,5"}) {
        CHECK_THROWS_AS(parse_decimal(bad), SchemaError);
    }
    CHECK(parse_decimal("+.5") == Real("0.5"));
    CHECK(parse_decimal("7.") == 7);
}

TEST_CASE("number formatting") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(-0.0) == "0");
    CHECK(format_double(1700000000) == "1700000000");
    CHECK(parse_double_field(format_double(1.0 / 3), "x") == 1.0 / 3);
    CHECK(format_fixed(-0.0000001, 3) == "0.000");
    CHECK(format_fixed(-1.25, 1) == "-1.2");
    CHECK_THROWS_AS(parse_double_field("nan", "x"), SchemaError);
    CHECK_THROWS_AS(parse_int_field("1.5", "x"), SchemaError);
    CHECK(parse_bool_field("true", "x"));
    CHECK_FALSE(parse_optional_double("", "x"));
}

TEST_CASE("csv rows quote what needs quoting") {
    std::ostringstream out;
    write_csv_row(out, {"a", "b,c", "say \"hi\"", ""});
    CHECK(out.str() == "a,\"b,c\",\"say \"\"hi\"\"\",\n");
}
