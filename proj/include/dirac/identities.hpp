#pragma once
// Numerical audit of operator identities between Dirac-Coulomb bound states.
//
// Every relation is written as lhs = rhs with each side a short list of
// terms coef * <s2| O r^p |s1>, the elements taken from the analytic oracle.
// Notation below: P(p) plain, B(p) beta, A(p) alpha, AB(p) alphabeta,
// D(p) deriv, BD(p) betaderiv, all with f = r^p; c = D-/2.
//
// A "d/dr" acting on the full radial spinor psi = u/r differs from d/dr on
// the reduced functions u = (F, G) by -1/r, so such a term is carried as
// D(p) - P(p-1) (or BD(p) - B(p-1)).
//
// The residual is |lhs - rhs|, less the oracle's own error estimate for the
// terms involved, over the largest of |lhs|, |rhs| and the individual term
// magnitudes; a relation whose terms cancel to a small number is judged
// against the size of what cancelled.

#include "dirac/errors.hpp"
#include "dirac/oracle.hpp"
#include "dirac/real.hpp"
#include "dirac/recurrence.hpp"
#include "dirac/states.hpp"
#include "dirac/wavefunctions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace dirac {

enum class RelationId {
  FirstHypervirial,    // (E2-E1) P(l) = l A(l-1) + c AB(l-1)
  SecondHypervirial,   // (E2-E1)^2 P(l) = ...; needs D- != 0
  EnergySquareGap,     // (E2^2-E1^2) P(l) = ...
  AlphaEnergySum,      // (E2+E1) A(l) = ...
  AlphaEnergyGap,      // (E2-E1) A(l) = -l P(l-1) + (D+/2) B(l-1) - 2m AB(l)
  BetaEnergySum,       // (E2+E1) B(l) = l AB(l-1) + c A(l-1) + 2m P(l) - 2g B(l-1)
  SameKappaGap,        // kappa1 == kappa2: (E2-E1) P(l) = l A(l-1)
  SameKappaAlphaGap,   // kappa1 == kappa2, f = r^(l-1) in the alpha relation
  SameKappaBetaSum,    // kappa1 == kappa2: (E2+E1) B(l) = l AB(l-1) + 2m P(l) - 2g B(l-1)
  SameKappaPrinted,    // kappa1 == kappa2 ladder, beta/r coefficient -4m
  SameKappaCorrected,  // kappa1 == kappa2 ladder, beta/r coefficient -4mg
  OrthogonalPrinted,   // previous two at l = 0 with <r^0> = delta(n1, n2)
  OrthogonalCorrected, //
  DiagonalMass,        // m = g <beta/r> + E <beta>
  DiagonalVirial,      // E^2 = m^2 - m g <beta/r>
  BetaExpectation,     // <beta> = E/m
  PlainTrack,          // c0 P(l) = c1 P(l-1) + c2 P(l-2) + c3 P(l-3) + d2 B(l-2) + d3 B(l-3)
  BetaTrack,           // e0 B(l) = b0 P(l) + b2 P(l-2) + e1 B(l-1) + e2 B(l-2)
};

inline constexpr std::array kAllRelations = {
    RelationId::FirstHypervirial,   RelationId::SecondHypervirial,
    RelationId::EnergySquareGap,    RelationId::AlphaEnergySum,
    RelationId::AlphaEnergyGap,     RelationId::BetaEnergySum,
    RelationId::SameKappaGap,       RelationId::SameKappaAlphaGap,
    RelationId::SameKappaBetaSum,   RelationId::SameKappaPrinted,
    RelationId::SameKappaCorrected, RelationId::OrthogonalPrinted,
    RelationId::OrthogonalCorrected, RelationId::DiagonalMass,
    RelationId::DiagonalVirial,     RelationId::BetaExpectation,
    RelationId::PlainTrack,         RelationId::BetaTrack};

/// Report identifiers used in serialized audit output.
inline std::string_view to_string(RelationId id) {
  switch (id) {
  case RelationId::FirstHypervirial: return "EQ6";
  case RelationId::SecondHypervirial: return "EQ8";
  case RelationId::EnergySquareGap: return "EQ9";
  case RelationId::AlphaEnergySum: return "EQ10";
  case RelationId::AlphaEnergyGap: return "EQ11";
  case RelationId::BetaEnergySum: return "EQ12";
  case RelationId::SameKappaGap: return "EQ22";
  case RelationId::SameKappaAlphaGap: return "EQ23";
  case RelationId::SameKappaBetaSum: return "EQ24";
  case RelationId::SameKappaPrinted: return "EQ25_PRINTED";
  case RelationId::SameKappaCorrected: return "EQ25_CORRECTED";
  case RelationId::OrthogonalPrinted: return "EQ26_PRINTED";
  case RelationId::OrthogonalCorrected: return "EQ26_CORRECTED";
  case RelationId::DiagonalMass: return "EQ27";
  case RelationId::DiagonalVirial: return "EQ28";
  case RelationId::BetaExpectation: return "BETA_EXPECTATION";
  case RelationId::PlainTrack: return "EQ17";
  case RelationId::BetaTrack: return "EQ20";
  }
  return "?";
}

inline std::optional<RelationId> parse_relation_id(std::string_view s) {
  for (auto id : kAllRelations)
    if (to_string(id) == s) return id;
  return std::nullopt;
}

enum class Verdict { Pass, Fail };

inline std::string_view to_string(Verdict v) { return v == Verdict::Pass ? "PASS" : "FAIL"; }

inline constexpr double kAuditRelTol = 1e-8;
inline constexpr double kAuditAbsTol = 1e-12;
inline constexpr double kAuditSmallSide = 1e-6;

struct IdentityReport {
  RelationId relation_id = RelationId::FirstHypervirial;
  QuantumState s1;
  QuantumState s2;
  int lambda = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_residual = 0.0;
  Verdict verdict = Verdict::Pass;
};

inline Verdict judge(double lhs, double rhs, double rel_residual) {
  if (rel_residual <= kAuditRelTol) return Verdict::Pass;
  if (std::abs(lhs) < kAuditSmallSide && std::abs(rhs) < kAuditSmallSide &&
      std::abs(lhs - rhs) <= kAuditAbsTol)
    return Verdict::Pass;
  return Verdict::Fail;
}

namespace detail {

template <RealScalar R> struct Term {
  R coef;
  OperatorKind op;
  int power;
};

/// Oracle elements of one ordered pair, computed on demand and memoized.
template <RealScalar R> class ElementCache {
public:
  ElementCache(const BasicRadialWavefunction<R> &wf1, const BasicRadialWavefunction<R> &wf2)
      : wf1_(wf1), wf2_(wf2) {}

  const AnalyticSum<R> &operator()(OperatorKind op, int power) {
    const auto key = std::make_pair(op, power);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    return memo_.emplace(key, analytic_sum<R>(wf1_, wf2_, op, R(power))).first->second;
  }

  const BasicRadialWavefunction<R> &wf1() const { return wf1_; }
  const BasicRadialWavefunction<R> &wf2() const { return wf2_; }

private:
  const BasicRadialWavefunction<R> &wf1_;
  const BasicRadialWavefunction<R> &wf2_;
  std::map<std::pair<OperatorKind, int>, AnalyticSum<R>> memo_;
};

/// Accumulates both sides: the largest |term| and the oracle error budget.
template <RealScalar R> struct Tally {
  R biggest = 0;
  R noise = 0;
};

/// Sum of terms; zero coefficients are skipped so their (possibly divergent)
/// elements are never requested.
template <RealScalar R>
R side_value(ElementCache<R> &el, const std::vector<Term<R>> &terms, R constant, Tally<R> &tally) {
  using std::abs;
  using std::max;
  const R eps = std::numeric_limits<R>::epsilon();
  R sum = constant;
  tally.biggest = max(tally.biggest, R(abs(constant)));
  for (const auto &t : terms) {
    if (t.coef == 0) continue;
    const auto &e = el(t.op, t.power);
    const R v = t.coef * e.value;
    tally.biggest = max(tally.biggest, R(abs(v)));
    tally.noise += abs(t.coef) * e.err_est + 4 * eps * abs(v);
    sum += v;
  }
  return sum;
}

/// The residual is the discrepancy left after removing the oracle's own
/// error estimate, relative to the largest of |lhs|, |rhs| and any term.
template <RealScalar R>
IdentityReport make_report(RelationId id, ElementCache<R> &el, int lambda,
                           const std::vector<Term<R>> &lhs, const std::vector<Term<R>> &rhs,
                           R lhs_constant = R(0), R rhs_constant = R(0)) {
  using std::abs;
  using std::max;
  Tally<R> tally;
  const R l = side_value(el, lhs, lhs_constant, tally);
  const R r = side_value(el, rhs, rhs_constant, tally);
  const R scale = max({R(abs(l)), R(abs(r)), tally.biggest});
  const R excess = max(R(0), R(abs(l - r) - tally.noise));
  IdentityReport out;
  out.relation_id = id;
  out.s1 = el.wf1().state;
  out.s2 = el.wf2().state;
  out.lambda = lambda;
  out.lhs = to_double(l);
  out.rhs = to_double(r);
  out.rel_residual = scale > 0 ? to_double(R(excess / scale)) : 0.0;
  out.verdict = judge(out.lhs, out.rhs, out.rel_residual);
  return out;
}

/// Pair constants shared by all relations.
template <RealScalar R> struct PairData {
  R m, g, E1, E2, dE, sE, Dm, Dp, c;
};

template <RealScalar R>
PairData<R> pair_data(const BasicRadialWavefunction<R> &wf1,
                      const BasicRadialWavefunction<R> &wf2) {
  require_same_system(wf1, wf2);
  const auto &sys = wf1.sys;
  const auto delta = delta_pair(wf1.state, wf2.state);
  PairData<R> p;
  p.m = R(sys.mass);
  p.g = R(sys.coupling());
  p.E1 = wf1.energy;
  p.E2 = wf2.energy;
  p.dE = energy_gap<R>(sys, wf1.state, wf2.state);
  p.sE = p.E1 + p.E2;
  p.Dm = R(delta.minus);
  p.Dp = R(delta.plus);
  p.c = p.Dm / 2;
  return p;
}

constexpr auto P = OperatorKind::Plain;
constexpr auto B = OperatorKind::Beta;
constexpr auto A = OperatorKind::Alpha;
constexpr auto AB = OperatorKind::AlphaBeta;
constexpr auto D = OperatorKind::Deriv;
constexpr auto BD = OperatorKind::BetaDeriv;

template <RealScalar R> void require_same_kappa(const ElementCache<R> &el) {
  if (el.wf1().kappa() != el.wf2().kappa())
    throw Error(ErrorKind::Precondition, "relation needs kappa1 == kappa2");
}

template <RealScalar R> void require_diagonal(const ElementCache<R> &el) {
  if (!(el.wf1().state == el.wf2().state))
    throw Error(ErrorKind::Precondition, "relation needs s1 == s2");
}

template <RealScalar R> IdentityReport first_hypervirial(ElementCache<R> &el, int lambda) {
  const auto p = pair_data(el.wf1(), el.wf2());
  const R l(lambda);
  return make_report<R>(RelationId::FirstHypervirial, el, lambda, {{p.dE, P, lambda}},
                        {{l, A, lambda - 1}, {p.c, AB, lambda - 1}});
}

template <RealScalar R> IdentityReport second_hypervirial(ElementCache<R> &el, int lambda) {
  const auto p = pair_data(el.wf1(), el.wf2());
  if (p.Dm == 0)
    throw Error(ErrorKind::Precondition, "this relation needs kappa1 != kappa2");
  const R l(lambda);
  return make_report<R>(RelationId::SecondHypervirial, el, lambda, {{p.dE * p.dE, P, lambda}},
                        {{-p.c, B, lambda - 2},
                         {-l * (l - 1), P, lambda - 2},
                         {-p.c * l, B, lambda - 2},
                         {-2 * p.c, BD, lambda - 1},
                         {2 * p.c, B, lambda - 2},
                         {p.Dp / 2 * l, B, lambda - 2},
                         {p.c * p.c, P, lambda - 2},
                         {-2 * p.m * l, AB, lambda - 1},
                         {-2 * p.m * p.c, A, lambda - 1}});
}

template <RealScalar R> IdentityReport energy_square_gap(ElementCache<R> &el, int lambda) {
  const auto p = pair_data(el.wf1(), el.wf2());
  const R l(lambda);
  return make_report<R>(RelationId::EnergySquareGap, el, lambda, {{p.dE * p.sE, P, lambda}},
                        {{-2 * l, P, lambda - 2},
                         {p.c, B, lambda - 2},
                         {-l * (l - 1), P, lambda - 2},
                         {-2 * l, D, lambda - 1},
                         {2 * l, P, lambda - 2},
                         {p.Dp * p.Dm / 4, P, lambda - 2},
                         {-2 * p.g * l, A, lambda - 2},
                         {-2 * p.g * p.c, AB, lambda - 2}});
}

template <RealScalar R> IdentityReport alpha_energy_sum(ElementCache<R> &el, int lambda) {
  const auto p = pair_data(el.wf1(), el.wf2());
  const R l(lambda);
  return make_report<R>(RelationId::AlphaEnergySum, el, lambda, {{p.sE, A, lambda}},
                        {{R(-2), P, lambda - 1},
                         {-l, P, lambda - 1},
                         {R(-2), D, lambda},
                         {R(2), P, lambda - 1},
                         {p.c, B, lambda - 1},
                         {-2 * p.g, A, lambda - 1}});
}

template <RealScalar R>
IdentityReport alpha_energy_gap(ElementCache<R> &el, int lambda, RelationId id) {
  const auto p = pair_data(el.wf1(), el.wf2());
  const R l(lambda);
  return make_report<R>(id, el, lambda, {{p.dE, A, lambda}},
                        {{-l, P, lambda - 1}, {p.Dp / 2, B, lambda - 1}, {-2 * p.m, AB, lambda}});
}

template <RealScalar R> IdentityReport beta_energy_sum(ElementCache<R> &el, int lambda) {
  const auto p = pair_data(el.wf1(), el.wf2());
  const R l(lambda);
  return make_report<R>(RelationId::BetaEnergySum, el, lambda, {{p.sE, B, lambda}},
                        {{l, AB, lambda - 1},
                         {p.c, A, lambda - 1},
                         {2 * p.m, P, lambda},
                         {-2 * p.g, B, lambda - 1}});
}

template <RealScalar R> IdentityReport same_kappa_gap(ElementCache<R> &el, int lambda) {
  require_same_kappa(el);
  const auto p = pair_data(el.wf1(), el.wf2());
  return make_report<R>(RelationId::SameKappaGap, el, lambda, {{p.dE, P, lambda}},
                        {{R(lambda), A, lambda - 1}});
}

template <RealScalar R> IdentityReport same_kappa_beta_sum(ElementCache<R> &el, int lambda) {
  require_same_kappa(el);
  const auto p = pair_data(el.wf1(), el.wf2());
  const R l(lambda);
  return make_report<R>(RelationId::SameKappaBetaSum, el, lambda, {{p.sE, B, lambda}},
                        {{l, AB, lambda - 1}, {2 * p.m, P, lambda}, {-2 * p.g, B, lambda - 1}});
}

template <RealScalar R>
IdentityReport same_kappa_ladder(ElementCache<R> &el, int lambda, DiagonalVariant v) {
  require_same_kappa(el);
  const auto p = pair_data(el.wf1(), el.wf2());
  const R l(lambda);
  const R x = v == DiagonalVariant::Corrected ? p.g : R(1);
  return make_report<R>(v == DiagonalVariant::Corrected ? RelationId::SameKappaCorrected
                                                        : RelationId::SameKappaPrinted,
                        el, lambda, {{p.dE * p.dE - 4 * p.m * p.m, P, lambda}},
                        {{l * p.Dp / 2, B, lambda - 2},
                         {-4 * p.m * x, B, lambda - 1},
                         {-2 * p.m * p.sE, B, lambda},
                         {-l * (l - 1), P, lambda - 2}});
}

template <RealScalar R>
IdentityReport orthogonality_rule(ElementCache<R> &el, DiagonalVariant v) {
  require_same_kappa(el);
  const auto p = pair_data(el.wf1(), el.wf2());
  const R x = v == DiagonalVariant::Corrected ? p.g : R(1);
  const R delta = el.wf1().state.n == el.wf2().state.n ? R(1) : R(0);
  return make_report<R>(v == DiagonalVariant::Corrected ? RelationId::OrthogonalCorrected
                                                        : RelationId::OrthogonalPrinted,
                        el, 0, {}, {{-4 * p.m * x, B, -1}, {-2 * p.m * p.sE, B, 0}},
                        (p.dE * p.dE - 4 * p.m * p.m) * delta);
}

template <RealScalar R> IdentityReport diagonal_mass(ElementCache<R> &el) {
  require_diagonal(el);
  const auto p = pair_data(el.wf1(), el.wf2());
  return make_report<R>(RelationId::DiagonalMass, el, 0, {}, {{p.g, B, -1}, {p.E1, B, 0}}, p.m);
}

template <RealScalar R> IdentityReport diagonal_virial(ElementCache<R> &el) {
  require_diagonal(el);
  const auto p = pair_data(el.wf1(), el.wf2());
  return make_report<R>(RelationId::DiagonalVirial, el, 0, {}, {{-p.m * p.g, B, -1}},
                        p.E1 * p.E1, p.m * p.m);
}

template <RealScalar R> IdentityReport beta_expectation(ElementCache<R> &el) {
  require_diagonal(el);
  const auto p = pair_data(el.wf1(), el.wf2());
  return make_report<R>(RelationId::BetaExpectation, el, 0, {{R(1), B, 0}}, {}, R(0),
                        p.E1 / p.m);
}

template <RealScalar R>
IdentityReport plain_track(ElementCache<R> &el, int lambda, double tol_den) {
  const auto c = coefficients<R>(el.wf1().sys, el.wf1().state, el.wf2().state, lambda, tol_den);
  return make_report<R>(RelationId::PlainTrack, el, lambda, {{c.c0, P, lambda}},
                        {{c.c1, P, lambda - 1},
                         {c.c2, P, lambda - 2},
                         {c.c3, P, lambda - 3},
                         {c.d2, B, lambda - 2},
                         {c.d3, B, lambda - 3}});
}

template <RealScalar R>
IdentityReport beta_track(ElementCache<R> &el, int lambda, double tol_den) {
  const auto c =
      raw_coefficients<R>(el.wf1().sys, el.wf1().state, el.wf2().state, lambda, tol_den);
  if (c.singular || c.e0 == 0)
    throw Error(ErrorKind::SingularDenominator,
                "beta-track denominator vanishes at lambda = " + std::to_string(lambda));
  return make_report<R>(RelationId::BetaTrack, el, lambda, {{c.e0, B, lambda}},
                        {{c.b0, P, lambda},
                         {c.b2, P, lambda - 2},
                         {c.e1, B, lambda - 1},
                         {c.e2, B, lambda - 2}});
}

} // namespace detail

// ---------------------------------------------------------------------------
// Public audit operations. Wavefunctions carry their system; both must share it.

template <RealScalar R>
IdentityReport audit_first_hypervirial(const BasicRadialWavefunction<R> &wf1,
                                       const BasicRadialWavefunction<R> &wf2, int lambda) {
  detail::ElementCache<R> el(wf1, wf2);
  return detail::first_hypervirial(el, lambda);
}

/// The second-order family: the squared-gap relation (kappa1 != kappa2 only;
/// Precondition otherwise), then the energy-square, alpha and beta relations.
template <RealScalar R>
std::vector<IdentityReport> audit_second_order(const BasicRadialWavefunction<R> &wf1,
                                               const BasicRadialWavefunction<R> &wf2,
                                               int lambda) {
  detail::ElementCache<R> el(wf1, wf2);
  std::vector<IdentityReport> out;
  out.push_back(detail::second_hypervirial(el, lambda));
  out.push_back(detail::energy_square_gap(el, lambda));
  out.push_back(detail::alpha_energy_sum(el, lambda));
  out.push_back(detail::alpha_energy_gap(el, lambda, RelationId::AlphaEnergyGap));
  out.push_back(detail::beta_energy_sum(el, lambda));
  return out;
}

/// Same-kappa starting relations; the alpha relation is taken with f = r^(lambda-1).
template <RealScalar R>
std::vector<IdentityReport> audit_diagonal_starters(const BasicRadialWavefunction<R> &wf1,
                                                    const BasicRadialWavefunction<R> &wf2,
                                                    int lambda) {
  detail::ElementCache<R> el(wf1, wf2);
  detail::require_same_kappa(el);
  std::vector<IdentityReport> out;
  out.push_back(detail::same_kappa_gap(el, lambda));
  auto alpha = detail::alpha_energy_gap(el, lambda - 1, RelationId::SameKappaAlphaGap);
  alpha.lambda = lambda;
  out.push_back(alpha);
  out.push_back(detail::same_kappa_beta_sum(el, lambda));
  return out;
}

/// Same-kappa ladder relation in both forms.
template <RealScalar R>
std::vector<IdentityReport> audit_same_kappa_ladder(const BasicRadialWavefunction<R> &wf1,
                                                    const BasicRadialWavefunction<R> &wf2,
                                                    int lambda) {
  detail::ElementCache<R> el(wf1, wf2);
  return {detail::same_kappa_ladder(el, lambda, DiagonalVariant::Printed),
          detail::same_kappa_ladder(el, lambda, DiagonalVariant::Corrected)};
}

/// The orthogonality rule (both forms) for every same-kappa pair with n1 != n2,
/// and the diagonal mass, virial and <beta> relations for every state.
template <RealScalar R>
std::vector<IdentityReport> audit_ps_and_virial(const std::vector<BasicRadialWavefunction<R>> &wfs) {
  std::vector<IdentityReport> out;
  for (std::size_t i = 0; i < wfs.size(); ++i) {
    detail::ElementCache<R> el(wfs[i], wfs[i]);
    out.push_back(detail::diagonal_mass(el));
    out.push_back(detail::diagonal_virial(el));
    out.push_back(detail::beta_expectation(el));
  }
  for (std::size_t i = 0; i < wfs.size(); ++i)
    for (std::size_t k = 0; k < wfs.size(); ++k) {
      if (i == k || wfs[i].kappa() != wfs[k].kappa() || wfs[i].state.n == wfs[k].state.n)
        continue;
      detail::ElementCache<R> el(wfs[i], wfs[k]);
      out.push_back(detail::orthogonality_rule(el, DiagonalVariant::Printed));
      out.push_back(detail::orthogonality_rule(el, DiagonalVariant::Corrected));
    }
  return out;
}

/// Both ladder relations evaluated on oracle inputs. The plain track needs
/// kappa1 != kappa2; singular denominators raise SingularDenominator.
template <RealScalar R>
std::vector<IdentityReport> audit_recurrence(const BasicRadialWavefunction<R> &wf1,
                                             const BasicRadialWavefunction<R> &wf2, int lambda,
                                             double tol_den = kDefaultDenominatorTol) {
  detail::ElementCache<R> el(wf1, wf2);
  std::vector<IdentityReport> out;
  if (wf1.kappa() != wf2.kappa()) out.push_back(detail::plain_track(el, lambda, tol_den));
  out.push_back(detail::beta_track(el, lambda, tol_den));
  return out;
}

// Double-precision conveniences taking the system and labels directly.

inline IdentityReport audit_first_hypervirial(const CoulombSystem &sys, const QuantumState &s1,
                                              const QuantumState &s2, int lambda) {
  return audit_first_hypervirial(solve_radial(sys, s1), solve_radial(sys, s2), lambda);
}

inline std::vector<IdentityReport> audit_second_order(const CoulombSystem &sys,
                                                      const QuantumState &s1,
                                                      const QuantumState &s2, int lambda) {
  return audit_second_order(solve_radial(sys, s1), solve_radial(sys, s2), lambda);
}

inline std::vector<IdentityReport> audit_diagonal_starters(const CoulombSystem &sys,
                                                           const QuantumState &s1,
                                                           const QuantumState &s2, int lambda) {
  return audit_diagonal_starters(solve_radial(sys, s1), solve_radial(sys, s2), lambda);
}

inline std::vector<IdentityReport> audit_same_kappa_ladder(const CoulombSystem &sys,
                                                           const QuantumState &s1,
                                                           const QuantumState &s2, int lambda) {
  return audit_same_kappa_ladder(solve_radial(sys, s1), solve_radial(sys, s2), lambda);
}

inline std::vector<IdentityReport> audit_ps_and_virial(const CoulombSystem &sys,
                                                       const std::vector<QuantumState> &states) {
  std::vector<RadialWavefunction> wfs;
  for (const auto &s : states) wfs.push_back(solve_radial(sys, s));
  return audit_ps_and_virial(wfs);
}

// ---------------------------------------------------------------------------
// Standard grid

struct AuditGrid {
  std::vector<int> charges{1, 20, 80};
  int n_max = 4;
  int lambda_min = 0;
  int lambda_max = 3;
  double alpha = kCodataAlpha;
  double mass = 1.0;
};

/// All bound states with n <= n_max, ordered by (n, two_j, eps).
inline std::vector<QuantumState> states_up_to(int n_max) {
  std::vector<QuantumState> out;
  for (int n = 1; n <= n_max; ++n)
    for (int two_j = 1; two_j < 2 * n; two_j += 2)
      for (int eps : {-1, 1}) {
        const QuantumState s{n, two_j, eps};
        if (s.n_r() == 0 && eps == 1) continue;
        out.push_back(s);
      }
  return out;
}

struct AuditRecord {
  int Z = 1;
  IdentityReport report;
};

namespace detail {

/// Minimal power of r each relation family touches, for the convergence gate.
inline bool gate_ok(const CoulombSystem &sys, const QuantumState &s1, const QuantumState &s2,
                    int lowest_power) {
  return validity_exponent(sys, s1, s2, lowest_power);
}

template <RealScalar R, class Fn> void try_add(std::vector<AuditRecord> &out, int Z, Fn &&fn) {
  try {
    for (auto &r : fn()) out.push_back({Z, r});
  } catch (const Error &e) {
    if (e.kind() != ErrorKind::SingularDenominator) throw;
  }
}

} // namespace detail

/// Grid states bound at charge Z, solved, in grid order.
template <RealScalar R = double>
std::vector<BasicRadialWavefunction<R>> grid_wavefunctions(int Z, const AuditGrid &grid = {}) {
  const CoulombSystem sys{Z, grid.alpha, grid.mass};
  std::vector<BasicRadialWavefunction<R>> wfs;
  for (const auto &s : states_up_to(grid.n_max)) {
    if (!(sys.coupling() < s.abs_kappa())) continue;
    wfs.push_back(solve_radial<R>(sys, s));
  }
  return wfs;
}

/// Every relation that applies to one pair (wf1 before wf2 in grid order, or
/// wf1 == wf2) over the grid's lambda range. Relations are included only where
/// every element they touch converges; the order is fixed.
template <RealScalar R = double>
std::vector<AuditRecord> audit_pair(int Z, const BasicRadialWavefunction<R> &wf1,
                                    const BasicRadialWavefunction<R> &wf2,
                                    const AuditGrid &grid = {}) {
  const auto &sys = wf1.sys;
  std::vector<AuditRecord> out;
  const auto &s1 = wf1.state;
  const auto &s2 = wf2.state;
  const bool same_kappa = s1.kappa() == s2.kappa();
  detail::ElementCache<R> el(wf1, wf2);
  for (int l = grid.lambda_min; l <= grid.lambda_max; ++l) {
    // Lowest powers: first-order l-1; second-order l-2 (l-1 for d/dr at l-1).
    if (detail::gate_ok(sys, s1, s2, l - 1))
      out.push_back({Z, detail::first_hypervirial(el, l)});
    if (detail::gate_ok(sys, s1, s2, l - 2)) {
      if (!same_kappa) out.push_back({Z, detail::second_hypervirial(el, l)});
      out.push_back({Z, detail::energy_square_gap(el, l)});
    }
    if (detail::gate_ok(sys, s1, s2, l - 1)) {
      out.push_back({Z, detail::alpha_energy_sum(el, l)});
      out.push_back({Z, detail::alpha_energy_gap(el, l, RelationId::AlphaEnergyGap)});
      out.push_back({Z, detail::beta_energy_sum(el, l)});
    }
    if (same_kappa) {
      if (detail::gate_ok(sys, s1, s2, l - 2)) {
        out.push_back({Z, detail::same_kappa_gap(el, l)});
        auto alpha = detail::alpha_energy_gap(el, l - 1, RelationId::SameKappaAlphaGap);
        alpha.lambda = l;
        out.push_back({Z, alpha});
        out.push_back({Z, detail::same_kappa_beta_sum(el, l)});
        out.push_back({Z, detail::same_kappa_ladder(el, l, DiagonalVariant::Printed)});
        out.push_back({Z, detail::same_kappa_ladder(el, l, DiagonalVariant::Corrected)});
      }
    }
    if (detail::gate_ok(sys, s1, s2, l - 3)) {
      detail::try_add<R>(out, Z, [&] {
        std::vector<IdentityReport> r;
        if (!same_kappa)
          r.push_back(detail::plain_track(el, l, kDefaultDenominatorTol));
        return r;
      });
    }
    if (detail::gate_ok(sys, s1, s2, l - 2)) {
      detail::try_add<R>(out, Z, [&] {
        return std::vector<IdentityReport>{
            detail::beta_track(el, l, kDefaultDenominatorTol)};
      });
    }
  }
  if (s1 == s2) {
    out.push_back({Z, detail::diagonal_mass(el)});
    out.push_back({Z, detail::diagonal_virial(el)});
    out.push_back({Z, detail::beta_expectation(el)});
  } else if (same_kappa && s1.n != s2.n) {
    out.push_back({Z, detail::orthogonality_rule(el, DiagonalVariant::Printed)});
    out.push_back({Z, detail::orthogonality_rule(el, DiagonalVariant::Corrected)});
  }
  return out;
}

/// Audit of one charge over every pair s1 <= s2 in grid order.
template <RealScalar R = double>
std::vector<AuditRecord> audit_charge(int Z, const AuditGrid &grid = {}) {
  const auto wfs = grid_wavefunctions<R>(Z, grid);
  std::vector<AuditRecord> out;
  for (std::size_t i = 0; i < wfs.size(); ++i)
    for (std::size_t k = i; k < wfs.size(); ++k) {
      auto part = audit_pair<R>(Z, wfs[i], wfs[k], grid);
      out.insert(out.end(), part.begin(), part.end());
    }
  return out;
}

template <RealScalar R = double> std::vector<AuditRecord> audit_grid(const AuditGrid &grid = {}) {
  std::vector<AuditRecord> out;
  for (int Z : grid.charges) {
    auto part = audit_charge<R>(Z, grid);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

} // namespace dirac
