#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace lculab {

// Exact arithmetic for formula coefficients. The generalized Vandermonde
// systems solved in coefficients.hpp are hopelessly ill-conditioned in
// doubles beyond k ~ 5, so everything up to the circuit boundary stays
// rational.
using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;

inline double to_double(const BigRational& r) { return r.convert_to<double>(); }

inline std::string to_fraction_string(const BigRational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

inline BigRational rational_pow(const BigRational& base, unsigned exp) {
    BigRational out(1);
    BigRational b = base;
    unsigned e = exp;
    while (e) {
        if (e & 1u) out *= b;
        b *= b;
        e >>= 1u;
    }
    return out;
}

// Parses "p/q", plain integers, and decimal literals ("-0.25" -> -1/4).
BigRational rational_from_string(const std::string& text);

std::vector<BigRational> rationals_from_csv(const std::string& text);

}  // namespace lculab
