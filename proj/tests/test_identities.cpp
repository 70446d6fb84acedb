#include "hypolab/centering.hpp"
#include "hypolab/identities.hpp"

#include <doctest.h>

using namespace hypolab;

TEST_SUITE("identities") {
  TEST_CASE("random fields are deterministic and band-limited") {
    BasisPtr b = build_basis(1, 12, 6, 1.0);
    const Vec f = random_field(*b, 7, 3, 6, 3);
    CHECK(f == random_field(*b, 7, 3, 6, 3));
    CHECK(f != random_field(*b, 7, 4, 6, 3));
    for (long i = 0; i < b->size(); ++i) {
      const long h = i / b->F();
      const int k = RBasis::wave(int(i % b->F()));
      if (b->max_degree(h) >= 6 || k > 3) CHECK(f(i) == 0.0);
    }
  }

  TEST_CASE("transport identities hold on the non-gradient preset") {
    const ProblemSpec raw = make_preset(PresetName::tilted_nongradient);
    CenteringOptions co;
    co.tol = 1e-12;
    const ProblemSpec s = calibrate_centering(raw, Vec::Zero(2), co).spec;
    IdentitySuiteOptions o;
    o.n_fields = 5;
    const auto checks = transport_identities(s, Vec::Zero(2), o);
    CHECK(checks.size() == 15);
    for (const auto& c : checks) {
      INFO(c.name << " " << c.index << " rel " << c.rel);
      CHECK(c.pass());
    }
  }

  TEST_CASE("full suite passes with solved densities and correctors") {
    const ProblemSpec raw = make_preset(PresetName::tilted_nongradient);
    CenteringOptions co;
    co.tol = 1e-12;
    const ProblemSpec s = calibrate_centering(raw, Vec::Zero(2), co).spec;
    IdentitySuiteOptions o;
    o.n_fields = 4;
    const IdentitySuite suite = identity_suite(s, make_preset(PresetName::gradient_drift), Vec::Zero(2), o);
    for (const auto& c : suite.checks) {
      INFO(c.name << " " << c.index << " rel " << c.rel);
      CHECK(c.pass());
    }
    CHECK(suite.worst().size() == 5);
  }
}
