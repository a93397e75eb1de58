#pragma once
// Closed-form Dirac-Coulomb bound states as terminating power series.
//
// The radial system solved here (reduced functions F, G; V = -g/r):
//   F' = -(kappa/r) F + (E + m + g/r) G
//   G' =  (kappa/r) G - (E - m + g/r) F
// With F = r^w e^{-qr} sum a_i r^i and G = r^w e^{-qr} sum b_i r^i the
// coefficients obey, for i >= 1,
//   (w + i + kappa) a_i - g b_i = q a_{i-1} + (E + m) b_{i-1}
//   g a_i + (w + i - kappa) b_i = q b_{i-1} - (E - m) a_{i-1}
// whose determinant is i (2w + i). At i = 0 the indicial equation fixes
// b_0 / a_0 = (w + kappa) / g. The series terminates at degree n_r exactly
// when E is an eigenvalue.

#include "dirac/errors.hpp"
#include "dirac/real.hpp"
#include "dirac/specfun.hpp"
#include "dirac/states.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

namespace dirac {

/// Raw series built for an arbitrary trial energy; the last entry of a/b is the
/// would-be coefficient of degree n_r + 1.
template <RealScalar R> struct BasicSeriesExpansion {
  R w = 0;
  R q = 0;
  R energy = 0;
  R binding = 0; // m - E
  std::vector<R> a;
  std::vector<R> b;
  /// |coefficient n_r+1| relative to the largest coefficient, all measured in
  /// the scaled variable q r.
  double trailing_ratio = 0.0;
};
using SeriesExpansion = BasicSeriesExpansion<double>;

inline constexpr double kTerminationTol = 1e-10;

namespace detail {

template <RealScalar R> R horner(std::span<const R> c, const R &r) {
  R acc(0);
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + *it;
  return acc;
}

template <RealScalar R> R horner_derivative(std::span<const R> c, const R &r) {
  R acc(0);
  for (std::size_t i = c.size(); i-- > 1;) acc = acc * r + R(static_cast<int>(i)) * c[i];
  return acc;
}

inline double horner(const std::vector<double> &c, double r) {
  return horner<double>(std::span<const double>(c), r);
}

inline double horner_derivative(const std::vector<double> &c, double r) {
  return horner_derivative<double>(std::span<const double>(c), r);
}

template <RealScalar R>
BasicSeriesExpansion<R> expand(const CoulombSystem &sys, const QuantumState &s, const R &E,
                               const R &binding, const R &q) {
  using std::abs;
  using std::max;
  const R g(sys.coupling());
  const R m(sys.mass);
  const int kappa = s.kappa();
  BasicSeriesExpansion<R> out;
  out.w = w_exponent<R>(sys, s);
  out.q = q;
  out.energy = E;
  out.binding = binding;
  const int N = s.n_r() + 1;
  out.a.assign(N + 1, R(0));
  out.b.assign(N + 1, R(0));
  out.a[0] = 1;
  // w + kappa cancels for kappa < 0; use w + kappa = -g^2 / (w - kappa) there.
  out.b[0] = kappa < 0 ? R(-g / (out.w - kappa)) : R((out.w + kappa) / g);
  for (int i = 1; i <= N; ++i) {
    const R r1 = q * out.a[i - 1] + (E + m) * out.b[i - 1];
    const R r2 = q * out.b[i - 1] + binding * out.a[i - 1];
    const R A = out.w + i + kappa;
    const R D = out.w + i - kappa;
    const R det = i * (2 * out.w + i);
    out.a[i] = (r1 * D + g * r2) / det;
    out.b[i] = (A * r2 - g * r1) / det;
  }
  R biggest(0);
  R scale(1);
  for (int i = 0; i < N; ++i) {
    biggest = max(biggest, R(max(abs(out.a[i]), abs(out.b[i])) * scale));
    scale /= q;
  }
  out.trailing_ratio = to_double(R(max(abs(out.a[N]), abs(out.b[N])) * scale / biggest));
  return out;
}

} // namespace detail

/// Series expansion at a trial energy E (0 < E < m).
inline SeriesExpansion build_series(const CoulombSystem &sys, const QuantumState &s, double E) {
  if (!(E > 0.0 && E < sys.mass))
    throw Error(ErrorKind::DomainError, "trial energy must satisfy 0 < E < m");
  const double binding = sys.mass - E;
  return detail::expand<double>(sys, s, E, binding, std::sqrt(binding * (sys.mass + E)));
}

/// Series expansion at the exact eigenvalue.
template <RealScalar R = double>
BasicSeriesExpansion<R> build_series(const CoulombSystem &sys, const QuantumState &s) {
  const auto p = spectrum<R>(sys, s);
  return detail::expand<R>(sys, s, p.energy, p.binding, p.q);
}

template <RealScalar R> struct BasicRadialWavefunction {
  QuantumState state;
  CoulombSystem sys;
  R w = 0;
  R q = 0;
  R energy = 0;
  R binding = 0;
  std::vector<R> a; // degree n_r, a[0] > 0
  std::vector<R> b;
  R norm = 0;
  R log_norm = 0;

  int kappa() const { return state.kappa(); }
};
using RadialWavefunction = BasicRadialWavefunction<double>;

/// Normalization integral of the unnormalized series, sum (a_i a_k + b_i b_k) Gamma-integrals.
/// Returns its natural log.
template <RealScalar R>
R log_norm_integral(const R &w, const R &q, std::span<const R> a, std::span<const R> b) {
  using std::log;
  const R Q = 2 * q;
  const R base = 2 * w;
  // ratio[p] = Gamma(base + 1 + p) / Gamma(base + 1) / Q^p
  std::vector<R> ratio(a.size() + b.size(), R(1));
  for (std::size_t p = 1; p < ratio.size(); ++p)
    ratio[p] = ratio[p - 1] * (base + static_cast<int>(p)) / Q;
  R sum(0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < a.size(); ++k)
      sum += (a[i] * a[k] + b[i] * b[k]) * ratio[i + k];
  return specfun::ln_gamma(R(base + 1)) - (base + 1) * log(Q) + log(sum);
}

inline double log_norm_integral(double w, double q, const std::vector<double> &a,
                                const std::vector<double> &b) {
  return log_norm_integral<double>(w, q, std::span<const double>(a), std::span<const double>(b));
}

template <RealScalar R = double>
BasicRadialWavefunction<R> solve_radial(const CoulombSystem &sys, const QuantumState &s) {
  using std::exp;
  validate(sys);
  const auto series = build_series<R>(sys, s);
  if (!(series.trailing_ratio <= kTerminationTol))
    throw Error(ErrorKind::QuantizationMismatch,
                "series for " + label(s) + " does not terminate (trailing ratio " +
                    show(series.trailing_ratio) + ")");
  BasicRadialWavefunction<R> wf;
  wf.state = s;
  wf.sys = sys;
  wf.w = series.w;
  wf.q = series.q;
  wf.energy = series.energy;
  wf.binding = series.binding;
  wf.a.assign(series.a.begin(), series.a.end() - 1);
  wf.b.assign(series.b.begin(), series.b.end() - 1);
  wf.log_norm = -log_norm_integral<R>(wf.w, wf.q, wf.a, wf.b) / 2;
  wf.norm = exp(wf.log_norm);
  return wf;
}

struct RadialValue {
  double F = 0.0;
  double G = 0.0;
  bool underflow = false;
};

/// F(r), G(r); the envelope norm r^w e^{-qr} is formed in log space.
inline RadialValue evaluate(const RadialWavefunction &wf, double r) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw Error(ErrorKind::DomainError, "evaluate needs r > 0");
  const double log_env = wf.log_norm + wf.w * std::log(r) - wf.q * r;
  if (log_env < -745.0)
    return {0.0, 0.0, true};
  const double env = std::exp(log_env);
  return {env * detail::horner(wf.a, r), env * detail::horner(wf.b, r), false};
}

struct RadialDerivative {
  double dF = 0.0;
  double dG = 0.0;
};

inline RadialDerivative evaluate_derivative(const RadialWavefunction &wf, double r) {
  if (!(r > 0.0) || !std::isfinite(r))
    throw Error(ErrorKind::DomainError, "evaluate_derivative needs r > 0");
  const double log_env = wf.log_norm + wf.w * std::log(r) - wf.q * r;
  if (log_env < -745.0)
    return {};
  const double env = std::exp(log_env);
  const double fac = wf.w / r - wf.q;
  return {env * (fac * detail::horner(wf.a, r) + detail::horner_derivative(wf.a, r)),
          env * (fac * detail::horner(wf.b, r) + detail::horner_derivative(wf.b, r))};
}

struct OdeResidual {
  double resF = 0.0;
  double resG = 0.0;
  /// Largest individual term entering either residual.
  double scale = 0.0;
};

/// Residual of the radial system with an explicit kappa (lets tests break the convention).
inline OdeResidual ode_residual_with_kappa(const RadialWavefunction &wf, double r, double kappa) {
  const auto v = evaluate(wf, r);
  const auto d = evaluate_derivative(wf, r);
  const double g = wf.sys.coupling();
  const double m = wf.sys.mass;
  const double t1 = kappa / r * v.F;
  const double t2 = (wf.energy + m + g / r) * v.G;
  const double t3 = kappa / r * v.G;
  const double t4 = (g / r - wf.binding) * v.F;
  OdeResidual out;
  out.resF = d.dF + t1 - t2;
  out.resG = d.dG - t3 + t4;
  out.scale = std::max({std::abs(d.dF), std::abs(t1), std::abs(t2), std::abs(d.dG), std::abs(t3),
                        std::abs(t4)});
  return out;
}

inline OdeResidual ode_residual(const RadialWavefunction &wf, double r) {
  return ode_residual_with_kappa(wf, r, wf.kappa());
}

/// Sign changes of F on (0, inf), read off the polynomial factor on a dense
/// log-spaced grid reaching far past the outermost node.
inline int radial_nodes(const RadialWavefunction &wf) {
  int nodes = 0;
  double prev = detail::horner(wf.a, 0.0);
  const double rmax = 60.0 * (wf.state.n_r() + 1) / wf.q;
  const int samples = 20000;
  for (int i = 1; i <= samples; ++i) {
    const double r = rmax * std::pow(1e-8, 1.0 - static_cast<double>(i) / samples);
    const double cur = detail::horner(wf.a, r);
    if ((cur < 0) != (prev < 0)) ++nodes;
    prev = cur;
  }
  return nodes;
}

} // namespace dirac
