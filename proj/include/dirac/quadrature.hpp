#pragma once
// Double-exponential quadrature on (0, inf).
//
// The half line is mapped as r = L t / (1 - t) and t is integrated with the
// tanh-sinh rule; composed, the abscissae are r = L exp(pi sinh(tau) / p).
// The exponent p is the expected integrand power at the origin plus one
// (f ~ r^(p-1) as r -> 0), which turns an integrable r^(p-1) singularity into
// a double-exponentially decaying tail in tau. Levels halve the step and reuse
// every previous node.

#include "dirac/errors.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace dirac::quadrature {

struct Options {
  double rel_tol = 1e-10;
  int max_depth = 30;
  /// Hard cap on integrand evaluations; exceeding it counts as non-convergence.
  long max_evaluations = 4'000'000;
};

struct Result {
  double value = 0.0;
  double err_est = 0.0;
  double abs_integral = 0.0; // integral of |f|, for cancellation-aware tolerances
  int depth = 0;
  long evaluations = 0;
  bool converged = false;
};

/// Integral of f over (0, inf). `length` is a characteristic length of f and
/// `origin_power` is p with f ~ r^(p-1) near 0 (p > 0).
inline Result integrate_half_line(const std::function<double(double)> &f, double length,
                                  double origin_power, const Options &opt = {}) {
  if (!(length > 0.0) || !(origin_power > 0.0))
    throw Error(ErrorKind::DomainError, "integrate_half_line needs length > 0 and p > 0");

  const double inv_p = 1.0 / origin_power;
  Result res;
  auto node = [&](double tau) -> double {
    const double sh = std::sinh(tau);
    const double lr = std::numbers::pi * sh * inv_p;
    if (lr < -700.0 || lr > 700.0)
      return 0.0;
    const double r = length * std::exp(lr);
    if (!(r > 0.0) || !std::isfinite(r))
      return 0.0;
    ++res.evaluations;
    const double fr = f(r);
    if (!std::isfinite(fr))
      throw Error(ErrorKind::NoConvergence, "integrand is not finite at r = " + show(r));
    return fr * r * std::numbers::pi * std::cosh(tau) * inv_p;
  };

  // Level 0 on a unit step, scanning outward until the terms are negligible.
  const double h0 = 0.5;
  double sum = node(0.0);
  double abs_sum = std::abs(sum);
  double biggest = abs_sum;
  int lo = 0, hi = 0;
  for (int dir : {-1, 1}) {
    int quiet = 0;
    for (int k = 1; k < 200; ++k) {
      const double t = node(dir * k * h0);
      sum += t;
      abs_sum += std::abs(t);
      biggest = std::max(biggest, std::abs(t));
      (dir < 0 ? lo : hi) = dir * k;
      quiet = (std::abs(t) <= 1e-22 * biggest) ? quiet + 1 : 0;
      if (quiet >= 3)
        break;
    }
  }
  const double tau_lo = lo * h0;
  const double tau_hi = hi * h0;

  double h = h0;
  double estimate = sum * h;
  res.abs_integral = abs_sum * h;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int depth = 1; depth <= opt.max_depth; ++depth) {
    h *= 0.5;
    double fresh = 0.0, fresh_abs = 0.0;
    for (double tau = tau_lo + h; tau < tau_hi; tau += 2.0 * h) {
      const double t = node(tau);
      fresh += t;
      fresh_abs += std::abs(t);
    }
    sum += fresh;
    abs_sum += fresh_abs;
    const double next = sum * h;
    res.abs_integral = abs_sum * h;
    const double change = std::abs(next - estimate);
    res.depth = depth;
    estimate = next;
    res.value = estimate;
    // The level-to-level change overestimates the error of a converged
    // double-exponential rule; the rounding floor keeps it honest when the
    // change happens to vanish.
    res.err_est = std::max(change, 4.0 * eps * res.abs_integral);
    const double tol = std::max(opt.rel_tol * std::abs(estimate), 64.0 * eps * res.abs_integral);
    if (depth >= 3 && change <= tol) {
      res.converged = true;
      return res;
    }
    if (res.evaluations > opt.max_evaluations)
      break;
  }
  return res;
}

/// Throwing wrapper; the partial value is part of the error message.
inline Result integrate_half_line_or_throw(const std::function<double(double)> &f, double length,
                                           double origin_power, const Options &opt = {}) {
  auto res = integrate_half_line(f, length, origin_power, opt);
  if (!res.converged) {
    std::ostringstream os;
    os.precision(17);
    os << "quadrature stopped at depth " << res.depth << " with partial value " << res.value
       << " (err_est " << res.err_est << ")";
    throw Error(ErrorKind::NoConvergence, os.str());
  }
  return res;
}

} // namespace dirac::quadrature
