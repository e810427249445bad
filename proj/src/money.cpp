#include "dealbench/money.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

namespace dealbench {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

Money Money::parse(std::string_view raw) {
    std::string cleaned;
    cleaned.reserve(raw.size());
    for (char c : raw) {
        if (c == '$' || c == ',' || std::isspace(static_cast<unsigned char>(c))) continue;
        cleaned.push_back(c);
    }
    if (cleaned.empty()) throw MalformedPrice("no parseable number in price: \"" + std::string(raw) + "\"");

    std::size_t pos = 0;
    bool negative = false;
    if (cleaned[pos] == '+' || cleaned[pos] == '-') {
        negative = cleaned[pos] == '-';
        ++pos;
    }

    std::int64_t whole = 0;
    std::size_t digits = 0;
    while (pos < cleaned.size() && is_digit(cleaned[pos])) {
        if (whole > 92233720368547757LL)  // keeps whole*100 inside int64
            throw MalformedPrice("price out of range: \"" + std::string(raw) + "\"");
        whole = whole * 10 + (cleaned[pos] - '0');
        ++pos;
        ++digits;
    }

    std::string frac;
    if (pos < cleaned.size() && cleaned[pos] == '.') {
        ++pos;
        while (pos < cleaned.size() && is_digit(cleaned[pos])) {
            frac.push_back(cleaned[pos]);
            ++pos;
        }
        if (frac.empty()) throw MalformedPrice("trailing decimal point in price: \"" + std::string(raw) + "\"");
    }
    if (digits == 0 && frac.empty())
        throw MalformedPrice("no parseable number in price: \"" + std::string(raw) + "\"");
    if (pos != cleaned.size())
        throw MalformedPrice("unexpected characters in price: \"" + std::string(raw) + "\"");

    std::int64_t cents = whole * 100;
    if (!frac.empty()) {
        cents += (frac[0] - '0') * 10;
        if (frac.size() > 1) cents += frac[1] - '0';
        if (frac.size() > 2 && frac[2] >= '5') ++cents;  // half-up on the third digit
    }
    if (negative) cents = -cents;

    if (cents <= 0) throw NegativePrice("price must be positive: \"" + std::string(raw) + "\"");
    return from_cents(cents);
}

std::string Money::str() const {
    const std::int64_t abs = cents_ < 0 ? -cents_ : cents_;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%s%lld.%02lld", cents_ < 0 ? "-" : "",
                  static_cast<long long>(abs / 100), static_cast<long long>(abs % 100));
    return buf;
}

Money Money::mul_ratio(std::int64_t num, std::int64_t den) const {
    __int128 scaled = static_cast<__int128>(cents_) * num;
    __int128 q;
    if (scaled >= 0)
        q = (scaled * 2 + den) / (2 * static_cast<__int128>(den));
    else
        q = -((-scaled * 2 + den) / (2 * static_cast<__int128>(den)));
    return from_cents(static_cast<std::int64_t>(q));
}

Money Money::scale(double ratio) const {
    return from_cents(std::llround(static_cast<double>(cents_) * ratio));
}

}  // namespace dealbench
