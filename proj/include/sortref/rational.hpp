#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <string>

namespace sortref {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Accepts "3/4", "1", "0.25" (at most 6 decimal places). Values outside
// [0,1] are fine here; callers enforce their own ranges.
std::optional<Rational> parse_rational(const std::string& text);

// n (n-1) ... (n-k+1); 1 when k = 0, 0 when k > n.
BigInt falling_factorial(const BigInt& n, unsigned k);

// Round half-up to the given number of decimal places, e.g. "0.67".
std::string format_decimal(const Rational& value, int places);

std::string format_fraction(const Rational& value);

}  // namespace sortref
