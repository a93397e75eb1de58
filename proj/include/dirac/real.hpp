#pragma once
// Scalar types for the analytic core. Everything that is a closed form
// (spectrum, series coefficients, Gamma sums, recurrence coefficients) is a
// template on the scalar; `double` is the default everywhere and `quad`
// (113-bit binary significand) is used where long ladders amplify rounding.

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <concepts>
#include <limits>

namespace dirac {

using quad = boost::multiprecision::cpp_bin_float_quad;

template <class T>
concept RealScalar = std::floating_point<T> || boost::multiprecision::is_number<T>::value;

template <RealScalar R> inline R pi_v() { return boost::math::constants::pi<R>(); }

template <RealScalar R> inline constexpr bool is_double_like_v =
    std::numeric_limits<R>::digits <= std::numeric_limits<double>::digits;

template <RealScalar R> inline double to_double(const R &x) { return static_cast<double>(x); }

} // namespace dirac
