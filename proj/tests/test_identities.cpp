#include "dirac/identities.hpp"

#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <map>

using namespace dirac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ErrorKind kind_of(auto &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  return ErrorKind::Precondition;
}

const IdentityReport &find(const std::vector<IdentityReport> &rs, RelationId id) {
  for (const auto &r : rs)
    if (r.relation_id == id) return r;
  throw std::runtime_error("relation missing");
}

struct Tally {
  int pass = 0, fail = 0;
};

std::map<RelationId, Tally> tally(const std::vector<AuditRecord> &records) {
  std::map<RelationId, Tally> out;
  for (const auto &rec : records) {
    auto &t = out[rec.report.relation_id];
    (rec.report.verdict == Verdict::Pass ? t.pass : t.fail)++;
  }
  return out;
}

const std::vector<AuditRecord> &standard_grid() {
  static const auto records = audit_grid();
  return records;
}

} // namespace

TEST_CASE("relation ids round-trip", "[identities]") {
  for (auto id : kAllRelations) CHECK(parse_relation_id(to_string(id)) == id);
  CHECK(to_string(RelationId::OrthogonalCorrected) == "EQ26_CORRECTED");
  CHECK_FALSE(parse_relation_id("EQ99").has_value());
}

TEST_CASE("verdict thresholds", "[identities]") {
  CHECK(judge(1.0, 1.0, 1e-8) == Verdict::Pass);
  CHECK(judge(1.0, 1.0, 1.1e-8) == Verdict::Fail);
  CHECK(judge(1e-7, 1e-7 + 1e-13, 0.5) == Verdict::Pass);
  CHECK(judge(1e-7, 1e-7 + 1e-11, 0.5) == Verdict::Fail);
  CHECK(judge(2e-6, 2e-6 + 1e-13, 0.5) == Verdict::Fail);
}

TEST_CASE("first hypervirial relation", "[identities]") {
  const CoulombSystem sys{1};
  const auto s1 = make_state(1, 1, -1);
  const auto s2 = make_state(2, 1, -1);
  const auto r = audit_first_hypervirial(sys, s1, s2, 1);
  CHECK(r.verdict == Verdict::Pass);
  CHECK(r.relation_id == RelationId::FirstHypervirial);
  CHECK(r.lambda == 1);
  CHECK(r.s1 == s1);
  CHECK(r.s2 == s2);

  // Equal energies: the right-hand terms cancel.
  for (int l : {1, 2, 3}) {
    const auto d = audit_first_hypervirial(sys, s2, s2, l);
    CHECK(d.lhs == 0.0);
    CHECK(d.verdict == Verdict::Pass);
    CHECK(std::abs(d.rhs) <= 1e-12);
  }
  CHECK(audit_first_hypervirial(sys, make_state(3, 3, -1), make_state(3, 3, 1), 1).verdict ==
        Verdict::Pass);

  // Power -4 is past the gate for 1s at Z = 1.
  CHECK(kind_of([&] { audit_first_hypervirial(sys, s1, s1, -3); }) ==
        ErrorKind::DivergentIntegral);
}

TEST_CASE("second-order family", "[identities]") {
  const CoulombSystem sys{20};
  const auto rs = audit_second_order(sys, make_state(2, 1, -1), make_state(3, 3, -1), 0);
  REQUIRE(rs.size() == 5);
  CHECK(find(rs, RelationId::AlphaEnergySum).verdict == Verdict::Pass);
  CHECK(find(rs, RelationId::AlphaEnergyGap).verdict == Verdict::Pass);
  CHECK(find(rs, RelationId::BetaEnergySum).verdict == Verdict::Pass);
  CHECK(kind_of([&] { audit_second_order(sys, make_state(1, 1, -1), make_state(2, 1, -1), 2); }) ==
        ErrorKind::Precondition);
}

TEST_CASE("beta energy-sum relation for 1s at g = 0.5 is 1.5 = 1.5", "[identities]") {
  const auto sys = CoulombSystem::with_coupling(0.5);
  const auto wf = solve_radial(sys, make_state(1, 1, -1));
  detail::ElementCache<double> el(wf, wf);
  const auto r = detail::beta_energy_sum(el, 0);
  CHECK_THAT(r.lhs, WithinRel(1.5, 1e-14));
  CHECK_THAT(r.rhs, WithinRel(1.5, 1e-14));
  CHECK(r.verdict == Verdict::Pass);
}

TEST_CASE("same-kappa starters", "[identities]") {
  const CoulombSystem sys{1};
  const auto s1 = make_state(1, 1, -1);
  const auto s2 = make_state(2, 1, -1);
  const auto rs = audit_diagonal_starters(sys, s1, s2, 1);
  REQUIRE(rs.size() == 3);
  for (const auto &r : rs) CHECK(r.verdict == Verdict::Pass);

  const auto d = audit_diagonal_starters(sys, s2, s2, 2);
  CHECK(find(d, RelationId::SameKappaGap).lhs == 0.0);
  CHECK(std::abs(find(d, RelationId::SameKappaGap).rhs) <= 1e-12);

  const auto h = CoulombSystem::with_coupling(0.5);
  const auto one = audit_diagonal_starters(h, s1, s1, 0);
  CHECK_THAT(find(one, RelationId::SameKappaBetaSum).lhs, WithinRel(1.5, 1e-14));

  CHECK(kind_of([&] { audit_diagonal_starters(sys, s1, make_state(2, 1, 1), 1); }) ==
        ErrorKind::Precondition);
}

TEST_CASE("diagonal closed forms for 1s at g = 0.5", "[identities]") {
  const auto sys = CoulombSystem::with_coupling(0.5);
  const auto rs = audit_ps_and_virial(sys, {make_state(1, 1, -1)});
  REQUIRE(rs.size() == 3);
  const auto &virial = find(rs, RelationId::DiagonalVirial);
  CHECK_THAT(virial.lhs, WithinRel(0.75, 1e-14));
  CHECK_THAT(virial.rhs, WithinRel(0.75, 1e-14));
  const auto &beta = find(rs, RelationId::BetaExpectation);
  CHECK_THAT(beta.lhs, WithinRel(std::sqrt(0.75), 1e-14));
  CHECK(find(rs, RelationId::DiagonalMass).verdict == Verdict::Pass);
}

TEST_CASE("orthogonality rule: only the g-corrected form holds for 1s-2s", "[identities]") {
  const CoulombSystem sys{1};
  const auto rs = audit_ps_and_virial(sys, {make_state(1, 1, -1), make_state(2, 1, -1)});
  int corrected = 0, printed = 0;
  for (const auto &r : rs) {
    if (r.relation_id == RelationId::OrthogonalCorrected) {
      ++corrected;
      CHECK(r.verdict == Verdict::Pass);
    }
    if (r.relation_id == RelationId::OrthogonalPrinted) {
      ++printed;
      CHECK(r.verdict == Verdict::Fail);
      CHECK(r.rel_residual > 1e-3);
    }
  }
  CHECK(corrected == 2);
  CHECK(printed == 2);
}

TEST_CASE("recurrence relations on oracle inputs", "[identities]") {
  const auto sys = CoulombSystem::with_coupling(0.5);
  const auto rs = audit_recurrence(solve_radial(sys, make_state(1, 1, -1)),
                                   solve_radial(sys, make_state(2, 3, -1)), 3);
  REQUIRE(rs.size() == 2);
  for (const auto &r : rs) CHECK(r.verdict == Verdict::Pass);
  CHECK(kind_of([&] {
          audit_recurrence(solve_radial(sys, make_state(2, 1, -1)),
                           solve_radial(sys, make_state(2, 1, 1)), 0);
        }) == ErrorKind::SingularDenominator);
}

TEST_CASE("standard grid verdicts", "[identities][grid]") {
  const auto t = tally(standard_grid());
  for (auto id :
       {RelationId::FirstHypervirial, RelationId::AlphaEnergySum, RelationId::AlphaEnergyGap,
        RelationId::BetaEnergySum, RelationId::SameKappaGap, RelationId::SameKappaAlphaGap,
        RelationId::SameKappaBetaSum, RelationId::DiagonalMass, RelationId::DiagonalVirial,
        RelationId::BetaExpectation, RelationId::SameKappaCorrected,
        RelationId::OrthogonalCorrected}) {
    CAPTURE(to_string(id));
    REQUIRE(t.count(id) == 1);
    CHECK(t.at(id).pass > 0);
    CHECK(t.at(id).fail == 0);
  }
  for (auto id : {RelationId::SecondHypervirial, RelationId::EnergySquareGap,
                  RelationId::PlainTrack, RelationId::BetaTrack}) {
    CAPTURE(to_string(id));
    CHECK(t.count(id) == 1);
  }
  CHECK(t.at(RelationId::SameKappaPrinted).fail > 0);
  CHECK(t.at(RelationId::OrthogonalPrinted).fail > 0);
  CHECK(t.at(RelationId::SameKappaPrinted).pass + t.at(RelationId::SameKappaPrinted).fail ==
        t.at(RelationId::SameKappaCorrected).pass);
  for (const auto &rec : standard_grid()) {
    CHECK(rec.report.rel_residual >= 0.0);
    CHECK(rec.report.verdict == judge(rec.report.lhs, rec.report.rhs, rec.report.rel_residual));
  }
}

TEST_CASE("residuals are invariant under relabeling", "[identities][metamorphic]") {
  for (int Z : testing::kCharges) {
    const auto wfs = grid_wavefunctions(Z);
    int compared = 0;
    for (std::size_t i = 0; i < wfs.size(); i += 3)
      for (std::size_t k = i + 1; k < wfs.size(); k += 2) {
        const auto a = audit_pair(Z, wfs[i], wfs[k]);
        const auto b = audit_pair(Z, wfs[k], wfs[i]);
        REQUIRE(a.size() == b.size());
        for (std::size_t m = 0; m < a.size(); ++m) {
          const auto &x = a[m].report;
          const auto &y = b[m].report;
          CAPTURE(Z, label(x.s1), label(x.s2), to_string(x.relation_id), x.lambda);
          REQUIRE(x.relation_id == y.relation_id);
          CHECK(std::abs(x.rel_residual - y.rel_residual) <= 1e-12);
          CHECK(x.verdict == y.verdict);
          ++compared;
        }
      }
    CHECK(compared > 100);
  }
}

TEST_CASE("a perturbed wavefunction is caught", "[identities][mutation]") {
  const CoulombSystem sys{20};
  const auto wf1 = solve_radial(sys, make_state(2, 1, -1));
  const auto clean = solve_radial(sys, make_state(3, 3, 1));
  auto bent = clean;
  bent.b[0] *= 1.0 + 1e-6;
  auto count_fail = [&](const RadialWavefunction &wf2) {
    int fails = 0;
    for (const auto &rec : audit_pair(20, wf1, wf2))
      fails += rec.report.verdict == Verdict::Fail &&
               rec.report.relation_id != RelationId::SameKappaPrinted;
    return fails;
  };
  CHECK(count_fail(clean) == 0);
  CHECK(count_fail(bent) > 0);
  CHECK(audit_first_hypervirial(wf1, bent, 2).verdict == Verdict::Fail);
}

TEST_CASE("audit is deterministic", "[identities]") {
  const auto a = audit_charge(80);
  const auto b = audit_charge(80);
  REQUIRE(a.size() == b.size());
  bool same = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto &x = a[i].report;
    const auto &y = b[i].report;
    same = same && x.relation_id == y.relation_id && x.lambda == y.lambda &&
           std::memcmp(&x.lhs, &y.lhs, sizeof(double)) == 0 &&
           std::memcmp(&x.rhs, &y.rhs, sizeof(double)) == 0 &&
           std::memcmp(&x.rel_residual, &y.rel_residual, sizeof(double)) == 0;
  }
  CHECK(same);
}
