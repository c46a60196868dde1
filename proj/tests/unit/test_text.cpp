#include "dtshare/error.hpp"
#include "dtshare/text.hpp"

#include <doctest.h>

#include <sstream>

using namespace dtshare;

TEST_CASE("key value lines") {
    std::istringstream in("  a = 1 \n\n# note\nb=two words\n");
    std::vector<std::string> seen;
    for_each_key_value(in, [&](const std::string& k, const std::string& v, std::size_t line) {
        seen.push_back(k + "|" + v + "|" + std::to_string(line));
    });
    CHECK(seen == std::vector<std::string>{"a|1|1", "b|two words|4"});
    std::istringstream bad("a = 1\nno equals\n");
    CHECK_THROWS_WITH_AS(for_each_key_value(bad, [](auto&&...) {}), "line 2: expected 'key = value', got 'no equals'",
                         ParseError);
}

TEST_CASE("number parsing") {
    CHECK(parse_double("1e-3", 1) == 0.001);
    CHECK(parse_int("-4", 1) == -4);
    CHECK(parse_u64("18446744073709551615", 1) == 18446744073709551615ULL);
    CHECK_THROWS_AS(parse_double("1.0x", 3), ParseError);
    CHECK_THROWS_AS(parse_int("", 3), ParseError);
    CHECK_THROWS_AS(parse_u64("-1", 3), ParseError);
}

TEST_CASE("formatting round trips") {
    for (double v : {0.1, 1.0 / 3.0, 1e300, -2.5e-310, 0.0})
        CHECK(parse_double(format_double(v), 1) == v);
    CHECK(format_double(0.5) == "0.5");
    CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
    CHECK(trim("  x y \t") == "x y");
}
