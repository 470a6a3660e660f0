#include "sortref/rational.hpp"

#include <cctype>
#include <sstream>

namespace sortref {

std::optional<Rational> parse_rational(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto is_digits = [](const std::string& s) {
    if (s.empty()) return false;
    for (char c : s)
      if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
  };
  auto slash = text.find('/');
  if (slash != std::string::npos) {
    std::string num = text.substr(0, slash);
    std::string den = text.substr(slash + 1);
    if (!is_digits(num) || !is_digits(den)) return std::nullopt;
    BigInt d(den);
    if (d == 0) return std::nullopt;
    return Rational(BigInt(num), d);
  }
  auto dot = text.find('.');
  if (dot != std::string::npos) {
    std::string whole = text.substr(0, dot);
    std::string frac = text.substr(dot + 1);
    if (frac.empty() || frac.size() > 6) return std::nullopt;
    if (!is_digits(frac) || !is_digits(whole)) return std::nullopt;
    BigInt scale = 1;
    for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
    BigInt num = BigInt(whole) * scale + BigInt(frac);
    return Rational(num, scale);
  }
  if (!is_digits(text)) return std::nullopt;
  return Rational(BigInt(text));
}

BigInt falling_factorial(const BigInt& n, unsigned k) {
  BigInt result = 1;
  for (unsigned i = 0; i < k; ++i) {
    BigInt factor = n - i;
    if (factor <= 0) return 0;
    result *= factor;
  }
  return result;
}

std::string format_decimal(const Rational& value, int places) {
  BigInt scale = 1;
  for (int i = 0; i < places; ++i) scale *= 10;
  Rational scaled = value * scale;
  BigInt num = boost::multiprecision::numerator(scaled);
  BigInt den = boost::multiprecision::denominator(scaled);
  bool negative = num < 0;
  if (negative) num = -num;
  // round half-up
  BigInt rounded = (2 * num + den) / (2 * den);
  std::string digits = rounded.str();
  if (static_cast<int>(digits.size()) <= places)
    digits.insert(0, places + 1 - digits.size(), '0');
  std::string out = digits.substr(0, digits.size() - places) + "." +
                    digits.substr(digits.size() - places);
  if (negative) out.insert(0, "-");
  return out;
}

std::string format_fraction(const Rational& value) {
  std::ostringstream os;
  os << boost::multiprecision::numerator(value);
  BigInt den = boost::multiprecision::denominator(value);
  if (den != 1) os << "/" << den;
  return os.str();
}

}  // namespace sortref
