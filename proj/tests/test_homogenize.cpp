#include "hypolab/centering.hpp"
#include "hypolab/homogenize.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypolab;

TEST_SUITE("homogenize") {
  TEST_CASE("limit coefficients of the gradient drift follow the Lifson-Jackson product") {
    for (double beta : {1.0, 0.5}) {
      for (double lam : {1.0, 2.0}) {
        ProblemSpec s = make_preset(PresetName::gradient_drift);
        s.beta = beta;
        s.lambda = Profile::constant(lam);
        s.lambda_lo = s.lambda_hi = lam;
        const double Z = testutil::lifson_jackson_product(beta);
        CHECK(Z == doctest::Approx(std::pow(std::cyl_bessel_i(0.0, 1.0 / beta), 2)).epsilon(1e-12));
        const Coeffs c0 = coeffs_0(s, Vec::Zero(1), rbasis_for(s, 24));
        CHECK(c0.r(0) == doctest::Approx(1.0 / (lam * Z)).epsilon(1e-10));
        CHECK(c0.Q(0, 0) == doctest::Approx(2.0 * beta / (lam * Z)).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("drift is linear in c and the mobility does not see c") {
    ProblemSpec s = make_preset(PresetName::gradient_drift);
    const Vec q = Vec::Zero(1);
    BasisPtr b = basis_for(s, 24, 12);
    const Coeffs a = coeffs_m(s, q, 0.1, b);
    s.c = {s.c[0].scaled(-2.5)};
    const Coeffs c = coeffs_m(s, q, 0.1, b);
    CHECK(c.r(0) == doctest::Approx(-2.5 * a.r(0)).epsilon(1e-12));
    CHECK(c.Q(0, 0) == doctest::Approx(a.Q(0, 0)).epsilon(1e-12));
  }

  TEST_CASE("constant coefficients are exact at every mass") {
    const ProblemSpec s = make_preset(PresetName::constant_coeff);
    BasisPtr b = basis_for(s, 12, 4);
    for (double m : {1.0, 0.1, 0.01}) {
      const Coeffs c = coeffs_m(s, Vec::Zero(1), m, b);
      CHECK(std::abs(c.r(0) - 1.0) < 1e-12);
      CHECK(std::abs(c.Q(0, 0) - 2.0) < 1e-12);
    }
  }

  TEST_CASE("coefficient-space and collocation integrals agree") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    BasisPtr b = basis_for(s, 24, 12);
    const PhiResult phi = solve_phi(s, Vec::Zero(1), 0.1, b);
    const Coeffs a = coeffs_from_phi(s, Vec::Zero(1), phi);
    const Coeffs c = coeffs_collocation(s, Vec::Zero(1), phi);
    CHECK(std::abs(a.r(0) - c.r(0)) < 1e-10);
    CHECK(std::abs(a.Q(0, 0) - c.Q(0, 0)) < 1e-10);
  }

  TEST_CASE("finite-mass coefficients approach the limit monotonically") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    const MassSweep ms = mass_sweep(s, Vec::Zero(1), {0.5, 0.1, 0.02}, 32, 16, false);
    CHECK(ms.monotone_r);
    CHECK(ms.monotone_Q);
    for (const auto& row : ms.rows) CHECK(row.at_m.min_eig > 0);
  }

  TEST_CASE("two-dimensional mobility is symmetric positive definite") {
    const ProblemSpec raw = make_preset(PresetName::tilted_nongradient);
    CenteringOptions o;
    o.target = CenteringTarget::hypoelliptic;
    o.mass = 0.1;
    o.hermite_N = 16;
    o.fourier_K = 8;
    o.tol = 1e-12;
    const ProblemSpec s = calibrate_centering(raw, Vec::Zero(2), o).spec;
    const Coeffs c = coeffs_m(s, Vec::Zero(2), 0.1, basis_for(s, 16, 8));
    CHECK(c.asymmetry < 1e-8);
    CHECK(c.min_eig > 0);
  }

  TEST_CASE("coefficient table interpolates and refuses to extrapolate") {
    ProblemSpec s = make_preset(PresetName::constant_coeff);
    s.q_grid = {testutil::vec({0.0}), testutil::vec({1.0})};
    const CoeffTable t = coeff_table(s, 0.1, 12, 4, false);
    CHECK(t.interpolate(testutil::vec({0.5}), false).r(0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(t.interpolate(testutil::vec({1.5}), false), ExtrapolationError);
  }
}
