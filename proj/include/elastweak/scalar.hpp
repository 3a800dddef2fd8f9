// Scalar types for the two arithmetic modes: exact rationals for the
// algebraic/exactness suites, plain doubles for assembly and solves.

#pragma once

#include <boost/multiprecision/gmp.hpp>
#include <cmath>
#include <cstdint>
#include <type_traits>

namespace elastweak {

using Rational = boost::multiprecision::mpq_rational;
using BigInt   = boost::multiprecision::mpz_int;

template <class T>
inline constexpr bool is_exact_v = !std::is_floating_point_v<T>;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return static_cast<double>(x); }

// Exact conversion: every finite double is a dyadic rational.
template <class T>
inline T from_double(double x)
{
    if constexpr (std::is_same_v<T, double>)
        return x;
    else
        return Rational(x);
}

template <class T>
inline double abs_value(const T& x)
{
    if constexpr (std::is_same_v<T, double>)
        return std::abs(x);
    else
        return std::abs(to_double(x));
}

} // namespace elastweak
