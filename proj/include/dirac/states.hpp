#pragma once
// Quantum-number bookkeeping and the Dirac-Coulomb bound spectrum.
//
// Conventions used throughout the library:
//  * hbar = c = 1; lengths in units of 1/mass, energies in units of mass.
//  * The Coulomb potential is V(r) = -g/r with g = Z * alpha.
//  * A bound state is labelled (n, j, eps) with l = j + eps/2 for the large
//    component and kappa = eps (j + 1/2), so 1s_1/2 has kappa = -1.
//  * Half-integers travel as two_j = 2j.

#include "dirac/errors.hpp"
#include "dirac/real.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

namespace dirac {

inline constexpr double kCodataAlpha = 7.2973525693e-3;

struct CoulombSystem {
  int Z = 1;
  double alpha = kCodataAlpha;
  double mass = 1.0;

  double coupling() const { return Z * alpha; }

  /// A system specified directly by its coupling g (Z = 1, alpha = g).
  static CoulombSystem with_coupling(double g, double mass = 1.0) {
    return CoulombSystem{1, g, mass};
  }
};

inline void validate(const CoulombSystem &sys) {
  if (sys.Z < 1 || !(sys.alpha > 0.0) || !(sys.mass > 0.0) || !std::isfinite(sys.alpha) ||
      !std::isfinite(sys.mass))
    throw Error(ErrorKind::NonPhysical, "CoulombSystem needs Z >= 1, alpha > 0, mass > 0");
}

struct QuantumState {
  int n = 1;
  int two_j = 1;
  int eps = -1;

  int kappa() const { return eps * (two_j + 1) / 2; }
  int abs_kappa() const { return (two_j + 1) / 2; }
  /// Orbital angular momentum of the large component.
  int l() const { return (two_j + eps) / 2; }
  /// Number of radial nodes, n - j - 1/2.
  int n_r() const { return n - (two_j + 1) / 2; }
  double j() const { return 0.5 * two_j; }

  friend bool operator==(const QuantumState &, const QuantumState &) = default;
};

inline std::string label(const QuantumState &s) {
  static constexpr const char *spdf = "spdfghiklmnoqrtuv";
  const int l = s.l();
  const char sym = (l >= 0 && l < 17) ? spdf[l] : '?';
  return std::to_string(s.n) + sym + std::to_string(s.two_j) + "/2";
}

inline QuantumState make_state(int n, int two_j, int eps) {
  if (two_j < 1 || two_j % 2 == 0)
    throw Error(ErrorKind::NonPhysical, "two_j must be a positive odd integer");
  if (eps != 1 && eps != -1)
    throw Error(ErrorKind::NonPhysical, "eps must be +1 or -1");
  if (n < 1)
    throw Error(ErrorKind::NonPhysical, "n must be >= 1");
  const QuantumState s{n, two_j, eps};
  if (s.n_r() < 0)
    throw Error(ErrorKind::NonPhysical, "n must satisfy n >= j + 1/2");
  if (s.n_r() == 0 && eps == 1)
    throw Error(ErrorKind::NonPhysical, "nodeless states exist only for eps = -1");
  return s;
}

/// w = sqrt(kappa^2 - g^2), the power of r at the origin.
template <RealScalar R = double> R w_exponent(const CoulombSystem &sys, const QuantumState &s) {
  using std::sqrt;
  const double gd = sys.coupling();
  const int k = s.abs_kappa();
  if (!(gd < k))
    throw Error(ErrorKind::CriticalCoupling,
                "g = " + show(gd) + " >= j + 1/2 for " + label(s));
  const R g(gd);
  return sqrt((R(k) - g) * (R(k) + g));
}

/// Closed-form spectral data of one state:
///   N = sqrt((n_r + w)^2 + g^2),  E = m (n_r + w) / N,
///   m - E = m g^2 / (N (N + n_r + w)),  q = sqrt(m^2 - E^2) = m g / N.
template <RealScalar R> struct Spectrum {
  R g, m, w, shifted, N, energy, binding, q;
};

template <RealScalar R = double>
Spectrum<R> spectrum(const CoulombSystem &sys, const QuantumState &s) {
  using std::sqrt;
  Spectrum<R> p;
  p.g = R(sys.coupling());
  p.m = R(sys.mass);
  p.w = w_exponent<R>(sys, s);
  p.shifted = R(s.n_r()) + p.w;
  p.N = sqrt(p.shifted * p.shifted + p.g * p.g);
  p.energy = p.m * p.shifted / p.N;
  p.binding = p.m * p.g * p.g / (p.N * (p.N + p.shifted));
  p.q = p.m * p.g / p.N;
  return p;
}

inline double energy(const CoulombSystem &sys, const QuantumState &s) {
  return spectrum<double>(sys, s).energy;
}

/// m - E evaluated without cancellation.
inline double binding_energy(const CoulombSystem &sys, const QuantumState &s) {
  return spectrum<double>(sys, s).binding;
}

/// E2 - E1 as a difference of binding energies; stays accurate when both
/// energies sit close to the rest mass.
template <RealScalar R = double>
R energy_gap(const CoulombSystem &sys, const QuantumState &s1, const QuantumState &s2) {
  if (s1.n_r() == s2.n_r() && s1.abs_kappa() == s2.abs_kappa())
    return R(0);
  return spectrum<R>(sys, s1).binding - spectrum<R>(sys, s2).binding;
}

/// Decay constant q = sqrt(m^2 - E^2) = m g / N.
inline double decay_constant(const CoulombSystem &sys, const QuantumState &s) {
  return spectrum<double>(sys, s).q;
}

struct DeltaPair {
  int minus = 0; // eps2 (2 j2 + 1) - eps1 (2 j1 + 1) = 2 (kappa2 - kappa1)
  int plus = 0;  // eps2 (2 j2 + 1) + eps1 (2 j1 + 1) = 2 (kappa2 + kappa1)
};

inline DeltaPair delta_pair(const QuantumState &s1, const QuantumState &s2) {
  const int t1 = s1.eps * (s1.two_j + 1);
  const int t2 = s2.eps * (s2.two_j + 1);
  return {t2 - t1, t2 + t1};
}

/// True iff w1 + w2 + lambda + 1 > 0 (strict).
inline bool validity_exponent(const CoulombSystem &sys, const QuantumState &s1,
                              const QuantumState &s2, double lambda) {
  return w_exponent(sys, s1) + w_exponent(sys, s2) + lambda + 1.0 > 0.0;
}

} // namespace dirac
