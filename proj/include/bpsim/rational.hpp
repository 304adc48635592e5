#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <optional>

namespace bpsim {

// Arbitrary-precision rationals back the exact LP path. Scenario files carry
// human-written decimals (0.7, 0.448, ...); reconstruct_rational recovers the
// intended small fraction from the parsed double so the LP can run exactly.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline bool is_integer_value(double x) {
    return std::isfinite(x) && x == std::floor(x);
}

/// Best rational approximation of x with denominator <= max_den (continued
/// fractions). Returns nullopt unless the reconstruction is within 1e-12
/// relative of x, i.e. unless x plausibly came from a small fraction.
inline std::optional<Rational> reconstruct_rational(double x, std::int64_t max_den = 1'000'000'000) {
    if (!std::isfinite(x)) return std::nullopt;
    if (x == 0.0) return Rational(0);
    const bool neg = x < 0;
    double v = std::abs(x);
    if (v > 9.0e15) return std::nullopt;

    // continued fraction convergents p/q
    std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
    double frac = v;
    for (int iter = 0; iter < 64; ++iter) {
        const double fl = std::floor(frac);
        if (fl > 9.0e15) break;
        const auto a = static_cast<std::int64_t>(fl);
        const std::int64_t p2 = a * p1 + p0;
        const std::int64_t q2 = a * q1 + q0;
        if (q2 > max_den || p2 < 0 || q2 < 0) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        const double rem = frac - fl;
        if (rem < 1e-15) break;
        frac = 1.0 / rem;
    }
    if (q1 == 0) return std::nullopt;
    const double approx = static_cast<double>(p1) / static_cast<double>(q1);
    if (std::abs(approx - v) > 1e-12 * std::max(1.0, v)) return std::nullopt;
    Rational r(p1, q1);
    return neg ? Rational(-r) : r;
}

inline double to_double(const Rational& r) {
    return static_cast<double>(r);
}

}  // namespace bpsim
