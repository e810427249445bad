#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dealbench {

struct MoneyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MalformedPrice : MoneyError {
    using MoneyError::MoneyError;
};
struct NegativePrice : MoneyError {
    using MoneyError::MoneyError;
};

/// Fixed-point USD amount with two fractional digits. All arithmetic is
/// exact over cents; fractional scaling rounds half-up.
class Money {
public:
    Money() = default;

    static Money from_cents(std::int64_t cents) {
        Money m;
        m.cents_ = cents;
        return m;
    }
    static Money from_dollars(std::int64_t dollars) { return from_cents(dollars * 100); }

    // Accepts dollar-prefixed strings ("$26995"), thousands separators
    // ("$1,299,000.50") and plain decimals ("26995.00"). Throws
    // MalformedPrice when no decimal number remains after stripping the
    // currency symbol, commas and surrounding whitespace; NegativePrice
    // when the value is <= 0.
    static Money parse(std::string_view raw);

    std::int64_t cents() const { return cents_; }
    double dollars() const { return static_cast<double>(cents_) / 100.0; }

    /// "26995.00" — stable round-trip form.
    std::string str() const;

    /// Exact rational scaling, rounded half-up to cents.
    Money mul_ratio(std::int64_t num, std::int64_t den) const;

    /// Floating scaling (policy ratios), rounded half-up to cents.
    Money scale(double ratio) const;

    friend Money operator+(Money a, Money b) { return from_cents(a.cents_ + b.cents_); }
    friend Money operator-(Money a, Money b) { return from_cents(a.cents_ - b.cents_); }
    friend auto operator<=>(const Money&, const Money&) = default;

private:
    std::int64_t cents_ = 0;
};

}  // namespace dealbench
