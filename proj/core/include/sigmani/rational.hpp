#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <string>

namespace sigmani {

/// Exact arbitrary-precision rational; reference-table denominators reach 17280 and
/// intermediate antiderivatives go far beyond 64-bit.
using Rational = boost::multiprecision::cpp_rational;

inline std::string to_string(const Rational& q) {
    return q.str();
}

/// Parses "a/b" or "a".
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    if (slash == std::string::npos) return Rational(boost::multiprecision::cpp_int(s));
    return Rational(boost::multiprecision::cpp_int(s.substr(0, slash)),
                    boost::multiprecision::cpp_int(s.substr(slash + 1)));
}

} // namespace sigmani
