#pragma once
// Recurrence relations among <s2| r^lambda |s1> and <s2| beta r^lambda |s1>
// for Dirac-Coulomb bound states, and ladder engines built on them.
//
// With dE = E2 - E1, sE = E2 + E1, D- and D+ from delta_pair(), and the two
// denominators
//   den0 = dE D- - 4 m lambda,   den1 = dE D- - 4 m (lambda - 1),
// the plain track reads
//   c0 <r^l> = c1 <r^(l-1)> + c2 <r^(l-2)> + c3 <r^(l-3)>
//            + d2 <beta r^(l-2)> + d3 <beta r^(l-3)>
// with
//   c0 = sE dE^2 D- / den0          c1 = -2 g dE^2 D- / den1
//   c2 = D- D+ / 4 - l (l-1) sE D- / den0
//   c3 = -2 g (l-1)(l-2) D- / den1
//   d2 = (D- / 2) [(1 - l) + l sE D+ / den0]
//   d3 = g (l-1) D- D+ / den1
// and the beta track reads
//   e0 <beta r^l> = b0 <r^l> + b2 <r^(l-2)> + e1 <beta r^(l-1)> + e2 <beta r^(l-2)>
// with
//   b0 = 4 l (dE^2 - 4 m^2)         b2 = (1 - l)(D-^2 - 4 l^2)
//   e0 = 2 sE den0                  e1 = -4 g den0
//   e2 = (D+ / 2)(D-^2 - 4 l^2).
// The plain track needs D- != 0. For kappa1 == kappa2 the beta track
// collapses onto the single relation
//   (dE^2 - 4 m^2) <r^l> = l (D+/2) <beta r^(l-2)> - 4 m X <beta r^(l-1)>
//                        - 2 m sE <beta r^l> - l (l-1) <r^(l-2)>
// which is carried in two forms: X = 1 (as commonly printed) and X = g.
// Only X = g is consistent with m = g <beta/r> + E <beta> on a diagonal.

#include "dirac/errors.hpp"
#include "dirac/oracle.hpp"
#include "dirac/real.hpp"
#include "dirac/states.hpp"
#include "dirac/wavefunctions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>

namespace dirac {

inline constexpr double kDefaultDenominatorTol = 1e-9;

template <RealScalar R> struct BasicRecurrenceCoefficients {
  int lambda = 0;
  R c0 = 0, c1 = 0, c2 = 0, c3 = 0;
  R d2 = 0, d3 = 0;
  R b0 = 0, b2 = 0, e0 = 0, e1 = 0, e2 = 0;
  std::array<R, 2> denominators{}; // den0, den1
  /// False when D- == 0, in which case c*/d* are left at zero.
  bool plain_track = true;
  /// |den0| or |den1| (or |dE| for the c0 ~ dE^2 factor) below tol * m.
  bool singular = false;
};
using RecurrenceCoefficients = BasicRecurrenceCoefficients<double>;

/// All eleven coefficients, flagging (not throwing on) near-zero denominators.
template <RealScalar R = double>
BasicRecurrenceCoefficients<R> raw_coefficients(const CoulombSystem &sys, const QuantumState &s1,
                                                const QuantumState &s2, int lambda,
                                                double tol_den = kDefaultDenominatorTol) {
  using std::abs;
  const auto p1 = spectrum<R>(sys, s1);
  const auto p2 = spectrum<R>(sys, s2);
  const R m = p1.m;
  const R g = p1.g;
  const R dE = energy_gap<R>(sys, s1, s2);
  const R sE = p1.energy + p2.energy;
  const auto delta = delta_pair(s1, s2);
  const R Dm(delta.minus);
  const R Dp(delta.plus);
  const R l(lambda);

  BasicRecurrenceCoefficients<R> c;
  c.lambda = lambda;
  const R den0 = dE * Dm - 4 * m * l;
  const R den1 = dE * Dm - 4 * m * (l - 1);
  c.denominators = {den0, den1};
  c.plain_track = delta.minus != 0;

  c.b0 = 4 * l * (dE * dE - 4 * m * m);
  c.b2 = (1 - l) * (Dm * Dm - 4 * l * l);
  c.e0 = 2 * sE * den0;
  c.e1 = 4 * g * (4 * m * l - dE * Dm);
  c.e2 = Dp * (Dm * Dm - 4 * l * l) / 2;

  const R tol = R(tol_den) * m;
  if (c.plain_track) {
    c.singular = abs(den0) < tol || abs(den1) < tol || abs(dE) < tol;
    if (den0 != 0 && den1 != 0) {
      c.c0 = sE * dE * dE * Dm / den0;
      c.c1 = -2 * g * dE * dE * Dm / den1;
      c.c2 = Dm * Dp / 4 - l * (l - 1) * sE * Dm / den0;
      c.c3 = -2 * g * (l - 1) * (l - 2) * Dm / den1;
      c.d2 = Dm / 2 * ((1 - l) + l * sE * Dp / den0);
      c.d3 = g * (l - 1) * Dm * Dp / den1;
    }
  } else {
    c.singular = abs(den0) < tol;
  }
  return c;
}

/// Checked coefficients: throws DiagonalCase for D- == 0 and
/// SingularDenominator when a denominator is within tol_den * m of zero.
template <RealScalar R = double>
BasicRecurrenceCoefficients<R> coefficients(const CoulombSystem &sys, const QuantumState &s1,
                                            const QuantumState &s2, int lambda,
                                            double tol_den = kDefaultDenominatorTol) {
  auto c = raw_coefficients<R>(sys, s1, s2, lambda, tol_den);
  if (!c.plain_track)
    throw Error(ErrorKind::DiagonalCase,
                "kappa1 == kappa2: plain-track coefficients need D- != 0");
  if (c.singular)
    throw Error(ErrorKind::SingularDenominator,
                "recurrence denominator vanishes at lambda = " + std::to_string(lambda));
  return c;
}

/// Elements at lambda-1, lambda-2, lambda-3 (index 0, 1, 2).
template <RealScalar R> struct BasicLadderWindow {
  std::array<R, 3> plain{};
  std::array<R, 3> beta{};
};
using LadderWindow = BasicLadderWindow<double>;

/// <r^lambda> from the plain-track relation.
template <RealScalar R>
R step_plain(const BasicRecurrenceCoefficients<R> &c, const BasicLadderWindow<R> &in) {
  if (!c.plain_track)
    throw Error(ErrorKind::DiagonalCase, "step_plain needs D- != 0");
  if (c.singular || c.c0 == 0)
    throw Error(ErrorKind::SingularDenominator,
                "c0 vanishes at lambda = " + std::to_string(c.lambda));
  return (c.c1 * in.plain[0] + c.c2 * in.plain[1] + c.c3 * in.plain[2] + c.d2 * in.beta[1] +
          c.d3 * in.beta[2]) /
         c.c0;
}

/// <beta r^lambda> from the beta-track relation, given the current <r^lambda>.
template <RealScalar R>
R step_beta(const BasicRecurrenceCoefficients<R> &c, const R &plain_now,
            const BasicLadderWindow<R> &in) {
  if (c.singular || c.e0 == 0)
    throw Error(ErrorKind::SingularDenominator,
                "e0 vanishes at lambda = " + std::to_string(c.lambda));
  return (c.b0 * plain_now + c.b2 * in.plain[1] + c.e1 * in.beta[0] + c.e2 * in.beta[1]) / c.e0;
}

enum class DiagonalVariant { Printed, Corrected };

inline std::string_view to_string(DiagonalVariant v) {
  return v == DiagonalVariant::Printed ? "PRINTED" : "CORRECTED";
}

template <RealScalar R> struct BasicDiagonalInputs {
  R beta_now = 0; // <beta r^lambda>
  R beta_m1 = 0;  // <beta r^(lambda-1)>
  R beta_m2 = 0;  // <beta r^(lambda-2)>
  R plain_m2 = 0; // <r^(lambda-2)>
};
using DiagonalInputs = BasicDiagonalInputs<double>;

template <RealScalar R> struct BasicDiagonalStep {
  R printed = 0;
  R corrected = 0;
  R reference = 0; // analytic <r^lambda>
  double printed_residual = 0.0;
  double corrected_residual = 0.0;
  DiagonalVariant selected = DiagonalVariant::Corrected;
  R value = 0;
};
using DiagonalStep = BasicDiagonalStep<double>;

inline constexpr double kVariantTol = 1e-8;

namespace detail {
template <RealScalar R> struct DiagonalTerms {
  R lead;                  // dE^2 - 4 m^2
  std::array<R, 3> common; // terms independent of the variant
  R beta_m1_printed;
  R beta_m1_corrected;
};

template <RealScalar R>
DiagonalTerms<R> diagonal_terms(const CoulombSystem &sys, const QuantumState &s1,
                                const QuantumState &s2, int lambda,
                                const BasicDiagonalInputs<R> &in) {
  const auto p1 = spectrum<R>(sys, s1);
  const auto p2 = spectrum<R>(sys, s2);
  const R m = p1.m;
  const R g = p1.g;
  const R dE = energy_gap<R>(sys, s1, s2);
  const R sE = p1.energy + p2.energy;
  const R Dp(delta_pair(s1, s2).plus);
  const R l(lambda);
  DiagonalTerms<R> t;
  t.lead = dE * dE - 4 * m * m;
  t.common = {l * Dp / 2 * in.beta_m2, -2 * m * sE * in.beta_now, -l * (l - 1) * in.plain_m2};
  t.beta_m1_printed = -4 * m * in.beta_m1;
  t.beta_m1_corrected = -4 * m * g * in.beta_m1;
  return t;
}
} // namespace detail

/// kappa1 == kappa2 relation in both forms. The reference <r^lambda> comes
/// from the analytic oracle; the selected form is the one that reproduces it
/// (the corrected form wins a tie).
template <RealScalar R>
BasicDiagonalStep<R> step_diagonal_kappa(const BasicRadialWavefunction<R> &wf1,
                                         const BasicRadialWavefunction<R> &wf2, int lambda,
                                         const BasicDiagonalInputs<R> &in,
                                         double tol = kVariantTol) {
  using std::abs;
  using std::max;
  if (delta_pair(wf1.state, wf2.state).minus != 0)
    throw Error(ErrorKind::Precondition, "step_diagonal_kappa needs kappa1 == kappa2");
  const auto t = detail::diagonal_terms<R>(wf1.sys, wf1.state, wf2.state, lambda, in);
  const R common = t.common[0] + t.common[1] + t.common[2];
  BasicDiagonalStep<R> out;
  out.printed = (common + t.beta_m1_printed) / t.lead;
  out.corrected = (common + t.beta_m1_corrected) / t.lead;
  out.reference = detail::analytic_sum<R>(wf1, wf2, OperatorKind::Plain, R(lambda)).value;

  auto residual = [&](const R &candidate, const R &beta_term) {
    R scale = abs(out.reference);
    for (const auto &c : t.common) scale = max(scale, R(abs(c / t.lead)));
    scale = max(scale, R(abs(beta_term / t.lead)));
    return scale > 0 ? to_double(R(abs(candidate - out.reference) / scale)) : 0.0;
  };
  out.printed_residual = residual(out.printed, t.beta_m1_printed);
  out.corrected_residual = residual(out.corrected, t.beta_m1_corrected);
  if (out.corrected_residual <= tol) {
    out.selected = DiagonalVariant::Corrected;
  } else if (out.printed_residual <= tol) {
    out.selected = DiagonalVariant::Printed;
  } else {
    throw Error(ErrorKind::VariantUnresolved,
                "neither form matches the oracle at lambda = " + std::to_string(lambda) +
                    " (printed " + show(out.printed_residual) + ", corrected " +
                    show(out.corrected_residual) + ")");
  }
  out.value = out.selected == DiagonalVariant::Corrected ? out.corrected : out.printed;
  return out;
}

// ---------------------------------------------------------------------------
// Ladder tables

enum class Provenance {
  Seed,       // analytic oracle, starting values
  Recurrence, // both tracks from the recurrence
  Fallback,   // analytic oracle at a singular lambda
  Diagonal,   // kappa1 == kappa2: plain from the diagonal relation, beta from the oracle
};

inline std::string_view to_string(Provenance p) {
  switch (p) {
  case Provenance::Seed: return "SEED";
  case Provenance::Recurrence: return "RECURRENCE";
  case Provenance::Fallback: return "FALLBACK";
  case Provenance::Diagonal: return "DIAGONAL";
  }
  return "?";
}

struct LadderEntry {
  double plain = 0.0;
  double beta = 0.0;
  Provenance provenance = Provenance::Seed;
  double err_est = 0.0;
};

struct LadderTable {
  QuantumState s1;
  QuantumState s2;
  std::map<int, LadderEntry> entries;
  /// Drift seen at each oracle cross-check, keyed by lambda.
  std::map<int, double> drift_checks;
  bool descending = false;
};

enum class WorkingPrecision { Double, Quad };

struct LadderOptions {
  int check_every = 3;
  double drift_tol = 1e-6;
  double tol_den = kDefaultDenominatorTol;
  /// Solve the relations for the lowest power instead of the highest. The
  /// downward direction is not known to be stable; use with care.
  bool descending = false;
  /// Seeds, coefficients and steps are carried in this precision; the table
  /// is always reported in double. Forward steps amplify seed rounding by
  /// many orders of magnitude for close-lying levels, so Quad is the default.
  WorkingPrecision precision = WorkingPrecision::Quad;
};

namespace detail {

template <RealScalar R> struct WorkEntry {
  R plain = 0;
  R beta = 0;
  Provenance provenance = Provenance::Seed;
};

/// |value - ref| against max(|ref|, sqrt(eps) * term magnitude): an element
/// that cancels below half the working digits is compared absolutely.
template <RealScalar R> R drift_against(const R &value, const AnalyticSum<R> &ref) {
  using std::abs;
  using std::max;
  using std::sqrt;
  const R floor = sqrt(std::numeric_limits<R>::epsilon()) * ref.magnitude;
  const R scale = max(abs(ref.value), floor);
  return scale > 0 ? R(abs(value - ref.value) / scale) : R(abs(value - ref.value));
}

template <RealScalar R>
WorkEntry<R> oracle_entry(const BasicRadialWavefunction<R> &wf1,
                          const BasicRadialWavefunction<R> &wf2, int lambda, Provenance p,
                          R &rel_err) {
  using std::abs;
  using std::max;
  const auto P = analytic_sum<R>(wf1, wf2, OperatorKind::Plain, R(lambda));
  const auto B = analytic_sum<R>(wf1, wf2, OperatorKind::Beta, R(lambda));
  const R big = max(abs(P.value), abs(B.value));
  if (big > 0) rel_err = max(rel_err, R(max(P.err_est, B.err_est) / big));
  return {P.value, B.value, p};
}

inline void require_gate(const CoulombSystem &sys, const QuantumState &s1, const QuantumState &s2,
                         int lowest) {
  if (!validity_exponent(sys, s1, s2, lowest))
    throw Error(ErrorKind::DivergentIntegral,
                "ladder touches lambda = " + std::to_string(lowest) +
                    ", where w1 + w2 + lambda + 1 <= 0");
}

/// Compare a produced entry with the oracle, record the drift, abort past tolerance.
template <RealScalar R>
R cross_check(LadderTable &table, const WorkEntry<R> &e, const BasicRadialWavefunction<R> &wf1,
              const BasicRadialWavefunction<R> &wf2, int lambda, const LadderOptions &opt) {
  using std::max;
  const auto P = analytic_sum<R>(wf1, wf2, OperatorKind::Plain, R(lambda));
  const auto B = analytic_sum<R>(wf1, wf2, OperatorKind::Beta, R(lambda));
  const R drift = max(drift_against(e.plain, P), drift_against(e.beta, B));
  table.drift_checks[lambda] = to_double(drift);
  if (!(drift <= R(opt.drift_tol)))
    throw Error(ErrorKind::AbortOnDrift, "ladder drifted by " + show(to_double(drift)) +
                                             " at lambda = " + std::to_string(lambda));
  return drift;
}

template <RealScalar R>
void store(LadderTable &table, int lambda, const WorkEntry<R> &e, const R &rel_err) {
  using std::abs;
  using std::max;
  LadderEntry out;
  out.plain = to_double(e.plain);
  out.beta = to_double(e.beta);
  out.provenance = e.provenance;
  const double rounding = std::numeric_limits<double>::epsilon() / 2;
  out.err_est = (to_double(rel_err) + rounding) * std::max(std::abs(out.plain), std::abs(out.beta));
  table.entries[lambda] = out;
}

template <RealScalar R>
void ladder_ascending(LadderTable &table, const BasicRadialWavefunction<R> &wf1,
                      const BasicRadialWavefunction<R> &wf2, int lambda_min, int lambda_max,
                      const LadderOptions &opt) {
  const auto &sys = wf1.sys;
  table = LadderTable{wf1.state, wf2.state, {}, {}, false};
  if (lambda_max < lambda_min)
    return;
  require_gate(sys, wf1.state, wf2.state, lambda_min - 3);

  std::map<int, WorkEntry<R>> work;
  R rel_err(0);
  for (int l = lambda_min - 3; l < lambda_min; ++l) {
    work[l] = oracle_entry(wf1, wf2, l, Provenance::Seed, rel_err);
    store(table, l, work[l], rel_err);
  }

  const bool diagonal = delta_pair(wf1.state, wf2.state).minus == 0;
  int produced = 0;
  for (int l = lambda_min; l <= lambda_max; ++l) {
    const auto &m1 = work.at(l - 1);
    const auto &m2 = work.at(l - 2);
    const auto &m3 = work.at(l - 3);
    WorkEntry<R> e;
    if (diagonal) {
      const R beta_now = analytic_sum<R>(wf1, wf2, OperatorKind::Beta, R(l)).value;
      const auto step = step_diagonal_kappa<R>(
          wf1, wf2, l, BasicDiagonalInputs<R>{beta_now, m1.beta, m2.beta, m2.plain});
      e = {step.value, beta_now, Provenance::Diagonal};
    } else {
      const auto c = raw_coefficients<R>(sys, wf1.state, wf2.state, l, opt.tol_den);
      if (c.singular) {
        work[l] = oracle_entry(wf1, wf2, l, Provenance::Fallback, rel_err);
        store(table, l, work[l], rel_err);
        continue;
      }
      const BasicLadderWindow<R> win{{m1.plain, m2.plain, m3.plain}, {m1.beta, m2.beta, m3.beta}};
      e.plain = step_plain(c, win);
      e.beta = step_beta(c, e.plain, win);
      e.provenance = Provenance::Recurrence;
    }
    work[l] = e;
    ++produced;
    if (produced % opt.check_every == 0 || l == lambda_max) {
      using std::max;
      rel_err = max(rel_err, cross_check(table, e, wf1, wf2, l, opt));
    }
    store(table, l, e, rel_err);
  }
}

template <RealScalar R>
void ladder_descending(LadderTable &table, const BasicRadialWavefunction<R> &wf1,
                       const BasicRadialWavefunction<R> &wf2, int lambda_min, int lambda_max,
                       const LadderOptions &opt) {
  using std::abs;
  using std::max;
  const auto &sys = wf1.sys;
  table = LadderTable{wf1.state, wf2.state, {}, {}, true};
  if (lambda_max < lambda_min)
    return;
  require_gate(sys, wf1.state, wf2.state, lambda_min);
  if (delta_pair(wf1.state, wf2.state).minus == 0)
    throw Error(ErrorKind::DiagonalCase, "the descending ladder needs kappa1 != kappa2");

  std::map<int, WorkEntry<R>> work;
  R rel_err(0);
  for (int l = lambda_max; l > lambda_max - 3 && l >= lambda_min; --l) {
    work[l] = oracle_entry(wf1, wf2, l, Provenance::Seed, rel_err);
    store(table, l, work[l], rel_err);
  }
  int produced = 0;
  for (int mu = lambda_max - 3; mu >= lambda_min; --mu) {
    // Unknowns P(mu), B(mu): plain track at mu+3, beta track at mu+2.
    const auto c = raw_coefficients<R>(sys, wf1.state, wf2.state, mu + 3, opt.tol_den);
    const auto cb = raw_coefficients<R>(sys, wf1.state, wf2.state, mu + 2, opt.tol_den);
    const auto &p3 = work.at(mu + 3);
    const auto &p2 = work.at(mu + 2);
    const auto &p1 = work.at(mu + 1);
    const R r1 = c.c0 * p3.plain - c.c1 * p2.plain - c.c2 * p1.plain - c.d2 * p1.beta;
    const R r2 = cb.e0 * p2.beta - cb.b0 * p2.plain - cb.e1 * p1.beta;
    const R det = c.c3 * cb.e2 - c.d3 * cb.b2;
    const R det_scale = abs(c.c3 * cb.e2) + abs(c.d3 * cb.b2);
    if (c.singular || cb.singular || det_scale == 0 || !(abs(det) > R(1e-12) * det_scale)) {
      work[mu] = oracle_entry(wf1, wf2, mu, Provenance::Fallback, rel_err);
      store(table, mu, work[mu], rel_err);
      continue;
    }
    WorkEntry<R> e;
    e.plain = (r1 * cb.e2 - c.d3 * r2) / det;
    e.beta = (c.c3 * r2 - cb.b2 * r1) / det;
    e.provenance = Provenance::Recurrence;
    work[mu] = e;
    ++produced;
    if (produced % opt.check_every == 0 || mu == lambda_min)
      rel_err = max(rel_err, cross_check(table, e, wf1, wf2, mu, opt));
    store(table, mu, e, rel_err);
  }
}

template <RealScalar R>
void ladder_in(LadderTable &table, const CoulombSystem &sys, const QuantumState &s1,
               const QuantumState &s2, int lambda_min, int lambda_max, const LadderOptions &opt) {
  table = LadderTable{s1, s2, {}, {}, opt.descending};
  const auto wf1 = solve_radial<R>(sys, s1);
  const auto wf2 = solve_radial<R>(sys, s2);
  if (opt.descending)
    ladder_descending(table, wf1, wf2, lambda_min, lambda_max, opt);
  else
    ladder_ascending(table, wf1, wf2, lambda_min, lambda_max, opt);
}

} // namespace detail

/// Contiguous table of (<r^l>, <beta r^l>) for l in [lambda_min, lambda_max].
/// Ascending ladders are seeded at lambda_min-3..lambda_min-1 from the analytic
/// oracle; descending ones at lambda_max-2..lambda_max.
/// Fills `table` as it goes, so on an exception it holds every entry completed
/// before the failure.
inline void ladder_into(LadderTable &table, const CoulombSystem &sys, const QuantumState &s1,
                        const QuantumState &s2, int lambda_min, int lambda_max,
                        const LadderOptions &opt = {}) {
  table = LadderTable{s1, s2, {}, {}, opt.descending};
  if (opt.check_every < 1)
    throw Error(ErrorKind::Precondition, "check_every must be >= 1");
  validate(sys);
  if (opt.precision == WorkingPrecision::Quad)
    detail::ladder_in<quad>(table, sys, s1, s2, lambda_min, lambda_max, opt);
  else
    detail::ladder_in<double>(table, sys, s1, s2, lambda_min, lambda_max, opt);
}

inline LadderTable ladder(const CoulombSystem &sys, const QuantumState &s1,
                          const QuantumState &s2, int lambda_min, int lambda_max,
                          const LadderOptions &opt = {}) {
  LadderTable table;
  ladder_into(table, sys, s1, s2, lambda_min, lambda_max, opt);
  return table;
}

} // namespace dirac
