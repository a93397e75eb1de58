#include "dirac/states.hpp"

#include "oracle/frozen_values.hpp"
#include "test_support.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace dirac;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("make_state maps (j, eps) to kappa and l", "[states]") {
  const auto s = make_state(1, 1, -1);
  CHECK(s.kappa() == -1);
  CHECK(s.l() == 0);
  CHECK(s.n_r() == 0);
  CHECK(label(s) == "1s1/2");

  const auto p12 = make_state(2, 1, 1);
  CHECK(p12.kappa() == 1);
  CHECK(p12.l() == 1);
  CHECK(label(p12) == "2p1/2");

  const auto d52 = make_state(3, 5, -1);
  CHECK(d52.kappa() == -3);
  CHECK(d52.l() == 2);
  CHECK(label(make_state(4, 7, -1)) == "4f7/2");
}

TEST_CASE("make_state rejects labels that are not bound states", "[states]") {
  auto kind_of = [](auto &&fn) {
    try {
      fn();
    } catch (const Error &e) {
      return e.kind();
    }
    return ErrorKind::Precondition;
  };
  CHECK(kind_of([] { make_state(1, 3, -1); }) == ErrorKind::NonPhysical); // n < j + 1/2
  CHECK(kind_of([] { make_state(1, 2, -1); }) == ErrorKind::NonPhysical); // even 2j
  CHECK(kind_of([] { make_state(1, 1, 0); }) == ErrorKind::NonPhysical);
  CHECK(kind_of([] { make_state(0, 1, -1); }) == ErrorKind::NonPhysical);
  CHECK(kind_of([] { make_state(1, 1, 1); }) == ErrorKind::NonPhysical); // nodeless needs eps = -1
  CHECK_NOTHROW(make_state(2, 1, 1));
}

TEST_CASE("nodeless energies follow E = m w / (j + 1/2)", "[states]") {
  for (double g : {0.1, 0.5, 0.9})
    for (int two_j = 1; two_j <= 7; two_j += 2) {
      const auto sys = CoulombSystem::with_coupling(g, 2.5);
      const QuantumState s{(two_j + 1) / 2, two_j, -1};
      const double k = (two_j + 1) / 2.0;
      const double expected = sys.mass * std::sqrt(k * k - g * g) / k;
      CHECK(testing::rel_diff(energy(sys, s), expected) <= 1e-14);
    }
}

TEST_CASE("energies match the arbitrary-precision reference", "[states][frozen]") {
  CHECK_THAT(energy(CoulombSystem{1}, make_state(1, 1, -1)),
             WithinRel(frozen::kEnergy_k1s_Z1, 1e-15));
  CHECK_THAT(energy(CoulombSystem{1}, make_state(2, 1, -1)),
             WithinRel(frozen::kEnergy_k2s_Z1, 1e-15));
  CHECK_THAT(energy(CoulombSystem{80}, make_state(3, 5, -1)),
             WithinRel(frozen::kEnergy_k3d5_Z80, 1e-15));
}

TEST_CASE("1s at g = 0.5", "[states]") {
  const auto sys = CoulombSystem::with_coupling(0.5);
  CHECK_THAT(energy(sys, make_state(1, 1, -1)), WithinRel(std::sqrt(0.75), 1e-15));
  CHECK_THAT(decay_constant(sys, make_state(1, 1, -1)), WithinRel(0.5, 1e-15));
}

TEST_CASE("levels are degenerate in the sign of kappa", "[states]") {
  for (int Z : testing::kCharges) {
    const CoulombSystem sys{Z};
    CHECK(energy(sys, make_state(2, 1, -1)) == energy(sys, make_state(2, 1, 1)));
    CHECK(energy_gap(sys, make_state(3, 3, -1), make_state(3, 3, 1)) == 0.0);
    CHECK(energy(sys, make_state(3, 1, -1)) < energy(sys, make_state(3, 3, -1)));
  }
}

TEST_CASE("energy gap via binding energies matches the direct difference", "[states]") {
  const CoulombSystem sys{80};
  const auto s1 = make_state(1, 1, -1);
  const auto s2 = make_state(4, 7, -1);
  CHECK_THAT(energy_gap(sys, s1, s2), WithinRel(energy(sys, s2) - energy(sys, s1), 1e-12));
  CHECK(energy_gap(sys, s2, s1) == -energy_gap(sys, s1, s2));
  // At Z = 1 the direct difference loses about five digits; the quad gap is the referee.
  const CoulombSystem h{1};
  const double gap = energy_gap(h, s1, s2);
  CHECK_THAT(gap, WithinRel(static_cast<double>(energy_gap<quad>(h, s1, s2)), 1e-15));
  CHECK_THAT(binding_energy(h, s1), WithinRel(h.mass - energy(h, s1), 1e-9));
}

TEST_CASE("delta_pair uses 2(kappa2 -+ kappa1)", "[states]") {
  const auto d = delta_pair(make_state(1, 1, -1), make_state(2, 3, -1));
  CHECK(d.minus == -2);
  CHECK(d.plus == -6);
  const auto e = delta_pair(make_state(2, 1, 1), make_state(2, 1, -1));
  CHECK(e.minus == -4);
  CHECK(e.plus == 0);
}

TEST_CASE("validity gate is strict", "[states]") {
  const auto sys = CoulombSystem::with_coupling(0.5);
  const auto s = make_state(1, 1, -1);
  const double w = std::sqrt(0.75);
  CHECK(validity_exponent(sys, s, s, -1.0));
  CHECK(validity_exponent(sys, s, s, -2.0 * w - 1.0 + 1e-9));
  CHECK_FALSE(validity_exponent(sys, s, s, -2.0 * w - 1.0));
  CHECK_FALSE(validity_exponent(sys, s, s, -3.0));
}

TEST_CASE("critical coupling and bad systems are refused", "[states]") {
  CHECK_THROWS_AS(energy(CoulombSystem::with_coupling(1.0), make_state(1, 1, -1)), Error);
  CHECK_NOTHROW(energy(CoulombSystem::with_coupling(1.0), make_state(2, 3, -1)));
  CHECK_THROWS_AS(validate(CoulombSystem{0}), Error);
  CHECK_THROWS_AS(validate(CoulombSystem{1, kCodataAlpha, -1.0}), Error);
}
