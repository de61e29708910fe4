#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>

namespace hhcert {

using BigInt = boost::multiprecision::cpp_int;

/// Exact arbitrary-precision rational scalar. Always stored reduced to lowest
/// terms with positive denominator (maintained by the backend); use
/// numerator(r) / denominator(r) for the parts.
using Rational = boost::multiprecision::cpp_rational;

inline BigInt factorial(unsigned n) {
    BigInt r = 1;
    for (unsigned i = 2; i <= n; ++i) r *= i;
    return r;
}

inline BigInt binomial(unsigned n, unsigned k) {
    if (k > n) return 0;
    if (k > n - k) k = n - k;
    BigInt r = 1;
    for (unsigned i = 1; i <= k; ++i) {
        r *= n - k + i;
        r /= i;  // exact at every step: r is a running binomial coefficient
    }
    return r;
}

inline Rational rational_pow(Rational base, unsigned exp) {
    Rational r = 1;
    while (exp != 0) {
        if (exp & 1u) r *= base;
        base *= base;
        exp >>= 1;
    }
    return r;
}

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline std::string to_string(const Rational& r) { return r.str(); }

/// Parses "p/q", plain integers, and finite decimals ("0.25" -> 1/4).
inline Rational parse_rational(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty rational literal");
    const auto slash = text.find('/');
    if (slash != std::string::npos) {
        const std::string num = text.substr(0, slash);
        const std::string den = text.substr(slash + 1);
        if (num.empty() || den.empty())
            throw std::invalid_argument("malformed rational: " + text);
        return Rational{BigInt(num), BigInt(den)};
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) return Rational(BigInt(text));
    std::string digits = text.substr(0, dot) + text.substr(dot + 1);
    const auto frac_len = text.size() - dot - 1;
    if (digits.empty() || digits == "-" || digits == "+")
        throw std::invalid_argument("malformed decimal: " + text);
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac_len; ++i) scale *= 10;
    return Rational(BigInt(digits), scale);
}

}  // namespace hhcert
