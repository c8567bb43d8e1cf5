#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace geodecomp {

/// Arbitrary-precision integer. All arithmetic in this library is exact.
using Integer = boost::multiprecision::mpz_int;

/// Arbitrary-precision rational, kept in lowest terms with positive
/// denominator by the underlying representation.
using Rational = boost::multiprecision::mpq_rational;

/// Render as "p/q", omitting "/q" when the denominator is 1.
inline std::string rational_to_string(const Rational& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) {
        s += '/';
        s += denominator(q).str();
    }
    return s;
}

/// Parse the textual form produced by rational_to_string.
inline Rational rational_from_string(std::string_view text) {
    auto parse_int = [](std::string_view part) -> Integer {
        if (part.empty())
            throw ParseError("empty integer in rational literal");
        std::size_t start = (part[0] == '-' || part[0] == '+') ? 1 : 0;
        if (start == part.size())
            throw ParseError("sign without digits in rational literal");
        for (std::size_t i = start; i < part.size(); ++i)
            if (part[i] < '0' || part[i] > '9')
                throw ParseError("invalid character in rational literal: '" +
                                 std::string(part) + "'");
        return Integer(std::string(part));
    };
    auto slash = text.find('/');
    if (slash == std::string_view::npos)
        return Rational(parse_int(text));
    Integer num = parse_int(text.substr(0, slash));
    Integer den = parse_int(text.substr(slash + 1));
    if (den == 0)
        throw ParseError("zero denominator in rational literal: '" +
                         std::string(text) + "'");
    return Rational(num, den);
}

} // namespace geodecomp
