#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace ipdl {

using Natural = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Parses "12", "3/8", "2^-40", "2^10", "0.25".
Rational parse_rational(const std::string& text);
std::string to_string(const Rational& q);
std::string to_string(const Natural& n);

}  // namespace ipdl
