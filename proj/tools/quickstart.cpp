// Library tour: spectrum, one element two ways, a short ladder, one audited relation.
#include "dirac/identities.hpp"
#include "dirac/oracle.hpp"
#include "dirac/recurrence.hpp"
#include "dirac/states.hpp"
#include "dirac/wavefunctions.hpp"

#include <cstdio>

int main() {
  using namespace dirac;
  const auto sys = CoulombSystem::with_coupling(0.5);
  const auto s1 = make_state(1, 1, -1); // 1s1/2
  const auto s2 = make_state(2, 3, -1); // 2p3/2

  std::printf("E(1s) = %.15f m, E(2p3/2) = %.15f m\n", energy(sys, s1), energy(sys, s2));

  const auto wf1 = solve_radial(sys, s1);
  const auto wf2 = solve_radial(sys, s2);
  const auto a = element_analytic(wf1, wf2, OperatorKind::Plain, 2.0);
  const auto q = element_quadrature(wf1, wf2, OperatorKind::Plain, 2.0);
  std::printf("<2p3/2| r^2 |1s>: analytic %.15g, quadrature %.15g\n", a.value, q.value);

  const auto table = ladder(sys, s1, s2, 0, 6);
  for (const auto &[l, e] : table.entries)
    std::printf("  lambda %2d  plain %-22.15g beta %-22.15g %s\n", l, e.plain, e.beta,
                std::string(to_string(e.provenance)).c_str());

  const auto r = audit_first_hypervirial(sys, s1, s2, 1);
  std::printf("%s: lhs %.15g rhs %.15g residual %.2g %s\n",
              std::string(to_string(r.relation_id)).c_str(), r.lhs, r.rhs, r.rel_residual,
              std::string(to_string(r.verdict)).c_str());
}
