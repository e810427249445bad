#include <cctype>
#include <cmath>
#include <cstdlib>
#include <string>

#include "doctest.h"

#include "dealbench/money.hpp"

using dealbench::MalformedPrice;
using dealbench::Money;
using dealbench::NegativePrice;

namespace {

// Independent reference parser: character surgery plus strtod. Kept separate
// from Money::parse on purpose; the two must agree on formatted inputs.
long long reference_cents(const std::string& raw) {
    std::string cleaned;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c)) && c != '$' && c != ',')
            cleaned.push_back(c);
    char* end = nullptr;
    const double value = std::strtod(cleaned.c_str(), &end);
    REQUIRE(end != cleaned.c_str());
    REQUIRE(*end == '\0');
    return std::llround(value * 100.0);
}

}  // namespace

TEST_CASE("parse handles the catalog price formats") {
    CHECK(Money::parse("$26995").cents() == 2699500);
    CHECK(Money::parse("26995.00") == Money::parse("$26995"));
    CHECK(Money::parse("$1,299,000.50").cents() == 129900050);
    CHECK(Money::parse("  $12.34  ").cents() == 1234);
    CHECK(Money::parse("$0.01").cents() == 1);
}

TEST_CASE("parse rejects non-positive and malformed prices") {
    CHECK_THROWS_AS(Money::parse("$0.00"), NegativePrice);
    CHECK_THROWS_AS(Money::parse("-5"), NegativePrice);
    CHECK_THROWS_AS(Money::parse("$-12.50"), NegativePrice);
    CHECK_THROWS_AS(Money::parse(""), MalformedPrice);
    CHECK_THROWS_AS(Money::parse("  "), MalformedPrice);
    CHECK_THROWS_AS(Money::parse("free"), MalformedPrice);
    CHECK_THROWS_AS(Money::parse("$12.5x"), MalformedPrice);
    CHECK_THROWS_AS(Money::parse("12."), MalformedPrice);
    CHECK_THROWS_AS(Money::parse("$"), MalformedPrice);
}

TEST_CASE("parse matches the reference parser on formatted strings") {
    const char* fixtures[] = {
        "$26995",       "26995.00",    "$21596",        "$1,299,000.50", "0.99",
        "$0.99",        "$100",        "100.10",        "$7,450",        "7450.00",
        "$849999.99",   "12345.67",    "$12,345.67",    "1.23",          "$999",
        "  $42.00 ",    "$3000",       "$15500",        "$22900",        "$25000",
    };
    for (const auto* raw : fixtures) {
        INFO("input: " << raw);
        CHECK(Money::parse(raw).cents() == reference_cents(raw));
    }
}

TEST_CASE("third fractional digit rounds half-up") {
    CHECK(Money::parse("1.005").cents() == 101);
    CHECK(Money::parse("1.004").cents() == 100);
    CHECK(Money::parse("1.0049").cents() == 100);  // only the third digit decides
}

TEST_CASE("serialization round-trips") {
    const long long cents_fixtures[] = {1, 99, 100, 2699500, 129900050, 123456789012LL};
    for (long long cents : cents_fixtures) {
        const Money m = Money::from_cents(cents);
        CHECK(Money::parse(m.str()) == m);
    }
    CHECK(Money::from_cents(2699500).str() == "26995.00");
    CHECK(Money::from_cents(129900050).str() == "1299000.50");
    CHECK(Money::from_cents(5).str() == "0.05");
}

TEST_CASE("mul_ratio rounds half-up") {
    CHECK(Money::from_cents(100).mul_ratio(1, 3).cents() == 33);    // 33.33 -> 33
    CHECK(Money::from_cents(100).mul_ratio(1, 2).cents() == 50);
    CHECK(Money::from_cents(101).mul_ratio(1, 2).cents() == 51);    // 50.5 -> 51
    CHECK(Money::from_cents(2699500).mul_ratio(6, 5).cents() == 3239400);
    CHECK(Money::from_cents(2159600).mul_ratio(4, 5).cents() == 1727680);
}
