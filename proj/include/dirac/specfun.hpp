#pragma once

#include "dirac/errors.hpp"
#include "dirac/real.hpp"

#include <array>
#include <cmath>
#include <string>

namespace dirac::specfun {

namespace detail {
// Lanczos approximation, g = 7, nine terms (P. Godfrey's coefficient set).
inline constexpr double kLanczosG = 7.0;
inline constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

// Stirling series B_2k / (2k (2k - 1)), k = 1..12, as exact rationals
// (Bernoulli numbers, Abramowitz & Stegun table 23.2).
inline constexpr std::array<std::array<long long, 2>, 12> kStirling = {{
    {1, 12},
    {-1, 360},
    {1, 1260},
    {-1, 1680},
    {1, 1188},
    {-691, 360360},
    {1, 156},
    {-3617, 122400},
    {43867, 244188},
    {-174611, 125400},
    {77683, 5796},
    {-236364091, 1506960},
}};
inline constexpr double kStirlingShift = 40.0;

inline double ln_gamma_lanczos(double x) {
  if (x < 0.5)
    return ln_gamma_lanczos(x + 1.0) - std::log(x);
  if (x == 1.0 || x == 2.0)
    return 0.0;
  const double z = x - 1.0;
  double sum = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i)
    sum += kLanczos[i] / (z + static_cast<double>(i));
  const double t = z + kLanczosG + 0.5;
  return 0.5 * std::log(2.0 * pi_v<double>()) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

// Shift the argument past kStirlingShift, then sum the asymptotic series.
template <RealScalar R> R ln_gamma_stirling(R x) {
  using std::log;
  if (x == R(1) || x == R(2))
    return R(0);
  R shift_product(1);
  while (x < R(kStirlingShift)) {
    shift_product *= x;
    x += 1;
  }
  const R inv = R(1) / x;
  const R inv2 = inv * inv;
  R term = inv;
  R series(0);
  for (const auto &c : kStirling) {
    series += R(c[0]) / R(c[1]) * term;
    term *= inv2;
  }
  return (x - R(0.5)) * log(x) - x + log(2 * pi_v<R>()) / 2 + series - log(shift_product);
}

} // namespace detail

/// ln Gamma(x) for x > 0.
template <RealScalar R> R ln_gamma(R x) {
  using std::isfinite;
  if (!(x > R(0)) || !isfinite(x))
    throw Error(ErrorKind::DomainError,
                "ln_gamma needs x > 0, got " + show(to_double(x)));
  if constexpr (is_double_like_v<R>)
    return static_cast<R>(detail::ln_gamma_lanczos(static_cast<double>(x)));
  else
    return detail::ln_gamma_stirling(x);
}

/// Gamma(a) / Gamma(b), a, b > 0.
template <RealScalar R> R gamma_ratio(R a, R b) {
  using std::abs;
  using std::exp;
  using std::round;
  if (!(a > R(0)) || !(b > R(0)))
    throw Error(ErrorKind::DomainError, "gamma_ratio needs positive arguments");
  if (a == b)
    return R(1);
  // Integer offsets are done by the functional equation, exact up to rounding.
  const R d = a - b;
  if (d == round(d) && abs(d) <= R(32)) {
    R r(1);
    if (d > R(0))
      for (R x = b; x < a; x += 1) r *= x;
    else
      for (R x = a; x < b; x += 1) r /= x;
    return r;
  }
  return exp(ln_gamma(a) - ln_gamma(b));
}

/// Integral over (0, inf) of r^s exp(-Q r) dr = Gamma(s+1) / Q^(s+1); needs s > -1.
template <RealScalar R> R power_exp_integral(R s, R Q) {
  using std::exp;
  using std::log;
  if (!(s > R(-1)))
    throw Error(ErrorKind::DivergentIntegral,
                "integral of r^s e^{-Qr} diverges at the origin for s = " +
                    show(to_double(s)));
  return exp(ln_gamma(R(s + 1)) - (s + 1) * log(Q));
}

} // namespace dirac::specfun
