#pragma once
// Reference radial matrix elements <s2| O f(r) |s1> between bound states.
//
// States are the reduced two-component vectors (F, iG) with inner product
// integral of conj(bra) . ket dr. In that representation alpha_r has -1 on
// both off-diagonals and beta = diag(1, -1), so every operator used here
// reduces to a real bilinear kernel:
//
//   PLAIN      f            F2 F1  + G2 G1
//   BETA       beta f       F2 F1  - G2 G1
//   ALPHA      -i alpha_r f G2 F1  - F2 G1
//   ALPHABETA  -i alpha_r beta f   F2 G1 + G2 F1
//   DERIV      f d/dr       F2 F1' + G2 G1'
//   BETADERIV  beta f d/dr  F2 F1' - G2 G1'
//
// d/dr acts on the reduced functions. Two independent routes are offered:
// termwise Gamma integrals of the series (ANALYTIC) and double-exponential
// quadrature of pointwise evaluations (QUADRATURE).

#include "dirac/errors.hpp"
#include "dirac/quadrature.hpp"
#include "dirac/real.hpp"
#include "dirac/specfun.hpp"
#include "dirac/states.hpp"
#include "dirac/wavefunctions.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dirac {

enum class OperatorKind { Plain, Beta, Alpha, AlphaBeta, Deriv, BetaDeriv };

inline constexpr std::array kAllOperatorKinds = {OperatorKind::Plain,     OperatorKind::Beta,
                                                 OperatorKind::Alpha,     OperatorKind::AlphaBeta,
                                                 OperatorKind::Deriv,     OperatorKind::BetaDeriv};

inline std::string_view to_string(OperatorKind k) {
  switch (k) {
  case OperatorKind::Plain: return "plain";
  case OperatorKind::Beta: return "beta";
  case OperatorKind::Alpha: return "alpha";
  case OperatorKind::AlphaBeta: return "alphabeta";
  case OperatorKind::Deriv: return "deriv";
  case OperatorKind::BetaDeriv: return "betaderiv";
  }
  return "?";
}

inline std::optional<OperatorKind> parse_operator_kind(std::string_view s) {
  for (auto k : kAllOperatorKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline bool is_derivative(OperatorKind k) {
  return k == OperatorKind::Deriv || k == OperatorKind::BetaDeriv;
}

enum class Method { Analytic, Quadrature, Recurrence, Seed };

inline std::string_view to_string(Method m) {
  switch (m) {
  case Method::Analytic: return "ANALYTIC";
  case Method::Quadrature: return "QUADRATURE";
  case Method::Recurrence: return "RECURRENCE";
  case Method::Seed: return "SEED";
  }
  return "?";
}

struct MatrixElement {
  double value = 0.0;
  OperatorKind op = OperatorKind::Plain;
  double lambda = 0.0;
  Method method = Method::Analytic;
  double err_est = 0.0;
};

/// Power of r multiplying the envelope e^{-(q1+q2) r} at the origin.
template <RealScalar R>
R origin_exponent(const BasicRadialWavefunction<R> &wf1, const BasicRadialWavefunction<R> &wf2,
                  OperatorKind op, const R &lambda) {
  return wf1.w + wf2.w + lambda - (is_derivative(op) ? 1 : 0);
}

inline double origin_exponent(const RadialWavefunction &wf1, const RadialWavefunction &wf2,
                              OperatorKind op, double lambda) {
  return origin_exponent<double>(wf1, wf2, op, lambda);
}

/// Convergence gate: w1 + w2 + lambda + 1 > 0, one power stricter for d/dr kinds.
template <RealScalar R>
bool element_converges(const BasicRadialWavefunction<R> &wf1,
                       const BasicRadialWavefunction<R> &wf2, OperatorKind op, const R &lambda) {
  return origin_exponent<R>(wf1, wf2, op, lambda) + 1 > 0;
}

inline bool element_converges(const RadialWavefunction &wf1, const RadialWavefunction &wf2,
                              OperatorKind op, double lambda) {
  return element_converges<double>(wf1, wf2, op, lambda);
}

namespace detail {

template <RealScalar R>
void require_same_system(const BasicRadialWavefunction<R> &wf1,
                         const BasicRadialWavefunction<R> &wf2) {
  if (wf1.sys.coupling() != wf2.sys.coupling() || wf1.sys.mass != wf2.sys.mass)
    throw Error(ErrorKind::Precondition, "states belong to different Coulomb systems");
}

template <RealScalar R>
void require_convergent(const BasicRadialWavefunction<R> &wf1,
                        const BasicRadialWavefunction<R> &wf2, OperatorKind op, const R &lambda) {
  if (!element_converges<R>(wf1, wf2, op, lambda))
    throw Error(ErrorKind::DivergentIntegral,
                "<" + label(wf2.state) + "|" + std::string(to_string(op)) + " r^" +
                    show(to_double(lambda)) + "|" + label(wf1.state) +
                    "> diverges at the origin");
}

/// Polynomial coefficients together with the sums of |products| that formed
/// them, so cancellation inside a coefficient stays visible.
template <RealScalar R> struct TrackedPoly {
  std::vector<R> value;
  std::vector<R> abs;
};

template <RealScalar R>
TrackedPoly<R> convolve(const std::vector<R> &x, const std::vector<R> &y, int sign = 1) {
  using std::abs;
  TrackedPoly<R> out{std::vector<R>(x.size() + y.size() - 1, R(0)),
                     std::vector<R>(x.size() + y.size() - 1, R(0))};
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t k = 0; k < y.size(); ++k) {
      const R t = x[i] * y[k];
      out.value[i + k] += sign * t;
      out.abs[i + k] += abs(t);
    }
  return out;
}

template <RealScalar R> void accumulate(TrackedPoly<R> &into, const TrackedPoly<R> &x) {
  if (into.value.size() < x.value.size()) {
    into.value.resize(x.value.size(), R(0));
    into.abs.resize(x.value.size(), R(0));
  }
  for (std::size_t i = 0; i < x.value.size(); ++i) {
    into.value[i] += x.value[i];
    into.abs[i] += x.abs[i];
  }
}

/// Coefficients of d/dr of r^w e^{-qr} sum c_i r^i, as r^(w-1) e^{-qr} sum d_p r^p.
template <RealScalar R>
std::vector<R> derivative_series(const std::vector<R> &c, const R &w, const R &q) {
  std::vector<R> d(c.size() + 1, R(0));
  for (std::size_t p = 0; p < d.size(); ++p) {
    if (p < c.size()) d[p] += (w + static_cast<int>(p)) * c[p];
    if (p >= 1) d[p] -= q * c[p - 1];
  }
  return d;
}

/// Polynomial multiplying r^(w1+w2+lambda [-1]) e^{-(q1+q2) r} norm1 norm2.
template <RealScalar R>
TrackedPoly<R> kernel_polynomial(const BasicRadialWavefunction<R> &wf1,
                                 const BasicRadialWavefunction<R> &wf2, OperatorKind op) {
  TrackedPoly<R> k;
  switch (op) {
  case OperatorKind::Plain:
    k = convolve(wf2.a, wf1.a);
    accumulate(k, convolve(wf2.b, wf1.b));
    break;
  case OperatorKind::Beta:
    k = convolve(wf2.a, wf1.a);
    accumulate(k, convolve(wf2.b, wf1.b, -1));
    break;
  case OperatorKind::Alpha:
    k = convolve(wf2.b, wf1.a);
    accumulate(k, convolve(wf2.a, wf1.b, -1));
    break;
  case OperatorKind::AlphaBeta:
    k = convolve(wf2.a, wf1.b);
    accumulate(k, convolve(wf2.b, wf1.a));
    break;
  case OperatorKind::Deriv:
  case OperatorKind::BetaDeriv: {
    // |q c_(p-1)| + |(w + p) c_p| bounds the derivative coefficients' own cancellation.
    const auto da = derivative_series(wf1.a, wf1.w, wf1.q);
    const auto db = derivative_series(wf1.b, wf1.w, wf1.q);
    auto bound = [&](const std::vector<R> &c) {
      using std::abs;
      std::vector<R> d(c.size() + 1, R(0));
      for (std::size_t p = 0; p < d.size(); ++p) {
        if (p < c.size()) d[p] += abs((wf1.w + static_cast<int>(p)) * c[p]);
        if (p >= 1) d[p] += abs(wf1.q * c[p - 1]);
      }
      return d;
    };
    k = convolve(wf2.a, da);
    accumulate(k, convolve(wf2.b, db, op == OperatorKind::Deriv ? 1 : -1));
    const auto ka = convolve(wf2.a, bound(wf1.a));
    const auto kb = convolve(wf2.b, bound(wf1.b));
    for (std::size_t p = 0; p < k.abs.size(); ++p) k.abs[p] = ka.abs[p] + kb.abs[p];
    break;
  }
  }
  return k;
}

/// Termwise Gamma sum in the working precision of R.
template <RealScalar R> struct AnalyticSum {
  R value = 0;
  R magnitude = 0; // integral of the |products| forming the kernel, before cancellation
  R err_est = 0;
};

template <RealScalar R>
AnalyticSum<R> analytic_sum(const BasicRadialWavefunction<R> &wf1,
                            const BasicRadialWavefunction<R> &wf2, OperatorKind op,
                            const R &lambda) {
  using std::abs;
  using std::exp;
  using std::log;
  require_same_system(wf1, wf2);
  require_convergent<R>(wf1, wf2, op, lambda);
  const R sigma = origin_exponent<R>(wf1, wf2, op, lambda);
  const R Q = wf1.q + wf2.q;
  const auto poly = kernel_polynomial(wf1, wf2, op);

  // Gamma(sigma + 1 + p) / Q^(sigma + 1 + p) = base * ratio_p
  const R log_base = wf1.log_norm + wf2.log_norm + specfun::ln_gamma(R(sigma + 1)) -
                     (sigma + 1) * log(Q);
  R ratio(1);
  R sum(0);
  R abs_sum(0);
  for (std::size_t p = 0; p < poly.value.size(); ++p) {
    if (p > 0) ratio *= (sigma + static_cast<int>(p)) / Q;
    sum += poly.value[p] * ratio;
    abs_sum += poly.abs[p] * ratio;
  }
  const R base = exp(log_base);
  const R eps = std::numeric_limits<R>::epsilon();
  AnalyticSum<R> out;
  out.value = base * sum;
  out.magnitude = base * abs_sum;
  // Summation rounding plus the rounding of the exponentiated log prefactor.
  out.err_est = out.magnitude * eps * (2 * static_cast<int>(poly.value.size()) + 4 + abs(log_base));
  return out;
}

} // namespace detail

/// Exact element from termwise Gamma integrals; lambda may be any real number
/// passing the convergence gate. The sum is carried in R and reported in double.
template <RealScalar R>
MatrixElement element_analytic(const BasicRadialWavefunction<R> &wf1,
                               const BasicRadialWavefunction<R> &wf2, OperatorKind op,
                               double lambda) {
  const auto s = detail::analytic_sum<R>(wf1, wf2, op, R(lambda));
  MatrixElement out;
  out.value = to_double(s.value);
  out.op = op;
  out.lambda = lambda;
  out.method = Method::Analytic;
  out.err_est = to_double(s.err_est);
  if constexpr (!is_double_like_v<R>)
    out.err_est += std::abs(out.value) * std::numeric_limits<double>::epsilon() / 2;
  return out;
}

namespace detail {

inline double kernel_at(const RadialValue &v1, const RadialValue &v2, const RadialDerivative &d1,
                        OperatorKind op) {
  switch (op) {
  case OperatorKind::Plain: return v2.F * v1.F + v2.G * v1.G;
  case OperatorKind::Beta: return v2.F * v1.F - v2.G * v1.G;
  case OperatorKind::Alpha: return v2.G * v1.F - v2.F * v1.G;
  case OperatorKind::AlphaBeta: return v2.F * v1.G + v2.G * v1.F;
  case OperatorKind::Deriv: return v2.F * d1.dF + v2.G * d1.dG;
  case OperatorKind::BetaDeriv: return v2.F * d1.dF - v2.G * d1.dG;
  }
  return 0.0;
}

inline MatrixElement quadrature_element(const std::function<double(double)> &integrand,
                                        const RadialWavefunction &wf1,
                                        const RadialWavefunction &wf2, OperatorKind op,
                                        double lambda, double origin_power, double rel_tol) {
  quadrature::Options opt;
  opt.rel_tol = rel_tol;
  const double length = 1.0 / (wf1.q + wf2.q);
  const auto res = quadrature::integrate_half_line_or_throw(integrand, length, origin_power, opt);
  return {res.value, op, lambda, Method::Quadrature, res.err_est};
}

} // namespace detail

/// Element of r^lambda by quadrature. The power and the wavefunction
/// envelopes are combined in log space so tiny and huge radii stay finite.
inline MatrixElement element_quadrature(const RadialWavefunction &wf1,
                                        const RadialWavefunction &wf2, OperatorKind op,
                                        double lambda, double rel_tol = 1e-10) {
  detail::require_same_system(wf1, wf2);
  detail::require_convergent(wf1, wf2, op, lambda);
  const bool deriv = is_derivative(op);
  auto integrand = [&](double r) {
    const double log_env = wf1.log_norm + wf2.log_norm + (wf1.w + wf2.w + lambda) * std::log(r) -
                           (wf1.q + wf2.q) * r;
    if (log_env < -745.0) return 0.0;
    const double env = std::exp(log_env);
    // Polynomial parts only; the envelope is applied once.
    RadialValue p1{detail::horner(wf1.a, r), detail::horner(wf1.b, r)};
    RadialValue p2{detail::horner(wf2.a, r), detail::horner(wf2.b, r)};
    RadialDerivative d1;
    if (deriv) {
      const double fac = wf1.w / r - wf1.q;
      d1.dF = fac * p1.F + detail::horner_derivative(wf1.a, r);
      d1.dG = fac * p1.G + detail::horner_derivative(wf1.b, r);
    }
    return env * detail::kernel_at(p1, p2, d1, op);
  };
  return detail::quadrature_element(integrand, wf1, wf2, op, lambda,
                                    origin_exponent(wf1, wf2, op, lambda) + 1.0, rel_tol);
}

/// Element of an arbitrary radial function f by quadrature. `f_origin_power`
/// is the power of r that f behaves like at the origin; it only shapes the
/// node distribution. The reported lambda is NaN.
inline MatrixElement element_quadrature(const RadialWavefunction &wf1,
                                        const RadialWavefunction &wf2, OperatorKind op,
                                        const std::function<double(double)> &f,
                                        double rel_tol = 1e-10, double f_origin_power = 0.0) {
  detail::require_same_system(wf1, wf2);
  const double p = origin_exponent(wf1, wf2, op, f_origin_power) + 1.0;
  if (!(p > 0.0))
    throw Error(ErrorKind::DivergentIntegral, "integrand is not integrable at the origin");
  const bool deriv = is_derivative(op);
  auto integrand = [&](double r) {
    const auto v1 = evaluate(wf1, r);
    const auto v2 = evaluate(wf2, r);
    const auto d1 = deriv ? evaluate_derivative(wf1, r) : RadialDerivative{};
    const double k = detail::kernel_at(v1, v2, d1, op);
    return k == 0.0 ? 0.0 : k * f(r);
  };
  return detail::quadrature_element(integrand, wf1, wf2, op,
                                    std::numeric_limits<double>::quiet_NaN(), p, rel_tol);
}

} // namespace dirac
