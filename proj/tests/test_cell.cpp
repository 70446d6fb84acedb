#include "hypolab/cell.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypolab;

TEST_SUITE("cell") {
  TEST_CASE("overdamped corrector of a gradient drift: 1 + chi' = e^V / <e^V>") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    const ChiResult chi = solve_chi(s, Vec::Zero(1), rbasis_for(s, 24));
    CHECK(chi.residual < 1e-10);
    const double eV = std::cyl_bessel_i(0.0, 1.0);  // <e^{cos 2 pi r}>
    for (double r : {0.0, 0.2, 0.5, 0.71}) {
      const double lhs = 1.0 + chi.chi[0].grad(testutil::vec({r}))(0);
      CHECK(lhs == doctest::Approx(std::exp(std::cos(kTwoPi * r)) / eV).epsilon(1e-10));
    }
    // zero rho0-mean
    const double mean = testutil::midpoint(
        [&](double r) { return chi.chi[0].eval(testutil::vec({r})) * chi.rho0.eval(testutil::vec({r})); }, 0, 1, 256);
    CHECK(std::abs(mean) < 1e-12);
  }

  TEST_CASE("hypoelliptic corrector for constant coefficients is sqrt(m) p / lambda") {
    ProblemSpec s = make_preset(PresetName::constant_coeff);
    for (double lam : {1.0, 2.0}) {
      s.lambda = Profile::constant(lam);
      s.lambda_lo = s.lambda_hi = lam;
      BasisPtr b = basis_for(s, 12, 4);
      for (double m : {1.0, 0.1, 0.01}) {
        const PhiResult phi = solve_phi(s, Vec::Zero(1), m, b);
        const Vec p = testutil::vec({0.7});
        const Vec r = testutil::vec({0.3});
        CHECK(phi.phi.eval(p, r) == doctest::Approx(std::sqrt(m) * 0.7 / lam).epsilon(1e-12));
        Vec expect = Vec::Zero(b->size());
        expect(b->p_index(0)) = std::sqrt(m) * std::sqrt(s.beta) / lam;
        CHECK((phi.phi.comp[0] - expect).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }

  TEST_CASE("remainder routes agree and the corrector identity holds") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    const Vec q = Vec::Zero(1);
    BasisPtr b = basis_for(s, 32, 16);
    const ChiResult chi = solve_chi(s, q, b->r_ptr());
    const Expansion ex = expansion_terms(s, q, b, chi);
    CHECK(ex.degree0_mismatch < 1e-10);
    for (double m : {0.1, 0.02}) {
      const PhiResult phi = solve_phi(s, q, m, b);
      const Remainder rem = remainder_psi3(s, q, phi, ex, chi.rho0);
      CHECK(rem.route_agreement < 1e-7);
      CHECK(rem.identity_rel(0) < 1e-6);
      CHECK(std::abs(rem.mean_rho_m) < 1e-10);
    }
  }

  TEST_CASE("remainder decays faster than sqrt(m)") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    const auto rows = psi3_sweep(s, Vec::Zero(1), {0.1, 0.01}, 32, 16);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].norm < rows[0].norm);
    CHECK(std::log(rows[0].norm / rows[1].norm) / std::log(10.0) > 1.0);
  }

  TEST_CASE("cell metric vanishes for constant coefficients") {
    const ProblemSpec s = make_preset(PresetName::constant_coeff);
    BasisPtr b = basis_for(s, 12, 4);
    const ChiResult chi = solve_chi(s, Vec::Zero(1), b->r_ptr());
    const PhiResult phi = solve_phi(s, Vec::Zero(1), 0.1, b);
    CHECK(cell_metric(s, Vec::Zero(1), phi, chi) < 1e-12);
  }
}
