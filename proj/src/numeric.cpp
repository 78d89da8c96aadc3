#include "ipdl/numeric.hpp"

#include <cctype>

#include "ipdl/error.hpp"

namespace ipdl {

namespace {

Natural parse_natural(const std::string& s, const std::string& whole) {
  if (s.empty()) fail("NUM.syntax", "malformed number '" + whole + "'");
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c)))
      fail("NUM.syntax", "malformed number '" + whole + "'");
  return Natural(s);
}

}  // namespace

Rational parse_rational(const std::string& text) {
  std::string s;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) s += c;
  if (s.empty()) fail("NUM.syntax", "empty number");

  bool negative = false;
  if (s[0] == '-') {
    negative = true;
    s = s.substr(1);
  }

  Rational value;
  if (auto caret = s.find('^'); caret != std::string::npos) {
    Natural base = parse_natural(s.substr(0, caret), text);
    std::string exp = s.substr(caret + 1);
    bool neg_exp = !exp.empty() && exp[0] == '-';
    if (neg_exp) exp = exp.substr(1);
    Natural e = parse_natural(exp, text);
    if (e > 4096) fail("NUM.range", "exponent too large in '" + text + "'");
    Natural p = boost::multiprecision::pow(base, static_cast<unsigned>(e));
    if (neg_exp) {
      if (p == 0) fail("NUM.range", "division by zero in '" + text + "'");
      value = Rational(Natural(1), p);
    } else {
      value = Rational(p);
    }
  } else if (auto slash = s.find('/'); slash != std::string::npos) {
    Natural num = parse_natural(s.substr(0, slash), text);
    Natural den = parse_natural(s.substr(slash + 1), text);
    if (den == 0) fail("NUM.range", "division by zero in '" + text + "'");
    value = Rational(num, den);
  } else if (auto dot = s.find('.'); dot != std::string::npos) {
    std::string frac = s.substr(dot + 1);
    Natural whole = dot == 0 ? Natural(0) : parse_natural(s.substr(0, dot), text);
    Natural f = frac.empty() ? Natural(0) : parse_natural(frac, text);
    Natural scale = boost::multiprecision::pow(Natural(10), static_cast<unsigned>(frac.size()));
    value = Rational(whole) + Rational(f, scale);
  } else {
    value = Rational(parse_natural(s, text));
  }
  return negative ? Rational(-value) : value;
}

std::string to_string(const Rational& q) {
  Natural num = boost::multiprecision::numerator(q);
  Natural den = boost::multiprecision::denominator(q);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

std::string to_string(const Natural& n) { return n.str(); }

}  // namespace ipdl
