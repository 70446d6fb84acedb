#include "hypolab/ldp.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypolab;

namespace {

Coeffs scalar_coeffs(double r, double Q) {
  Coeffs c;
  c.r = testutil::vec({r});
  c.Q = Mat::Constant(1, 1, Q);
  return c;
}

}  // namespace

TEST_SUITE("ldp") {
  TEST_CASE("local rate of a scalar Gaussian") {
    CHECK(local_rate(testutil::vec({3.0}), scalar_coeffs(1.0, 2.0)) == doctest::Approx(1.0));
    CHECK(local_rate(testutil::vec({1.0}), scalar_coeffs(1.0, 2.0)) == 0.0);
    Coeffs c;
    c.r = Vec::Zero(2);
    c.Q = Mat::Identity(2, 2) * 4.0;
    CHECK(local_rate(testutil::vec({2.0, 2.0}), c) == doctest::Approx(1.0));
  }

  TEST_CASE("action of constant-coefficient paths") {
    const ProblemSpec s = make_preset(PresetName::constant_coeff);
    const CoeffTable t = coeff_table(s, 0.1, 12, 4, false);
    const auto straight = DiscretePath::sample([](double x) { return testutil::vec({2.0 * x}); }, 1.0, 100);
    // (2 - 1)^2 / (2 Q), Q = 2
    CHECK(action(straight, t, ActionKind::S_m) == doctest::Approx(0.25).epsilon(1e-13));
    CHECK(action(straight, t, ActionKind::S_0) == doctest::Approx(0.25).epsilon(1e-13));
    const auto along = DiscretePath::sample([](double x) { return testutil::vec({x}); }, 1.0, 50);
    CHECK(std::abs(action(along, t, ActionKind::S_m)) < 1e-15);
  }

  TEST_CASE("action scales quadratically in the deviation from the mean path") {
    const ProblemSpec s = make_preset(PresetName::constant_coeff);
    const CoeffTable t = coeff_table(s, 0.1, 12, 4, false);
    auto path = [](double a) {
      return DiscretePath::sample([a](double x) { return testutil::vec({x + a * std::sin(kPi * x)}); }, 1.0, 80);
    };
    const double s1 = action(path(0.3), t, ActionKind::S_m), s2 = action(path(0.6), t, ActionKind::S_m);
    CHECK(s2 == doctest::Approx(4 * s1).epsilon(1e-12));
  }

  TEST_CASE("action refuses paths that leave the coefficient grid") {
    ProblemSpec s = make_preset(PresetName::constant_coeff);
    s.q_grid = {testutil::vec({-1.0}), testutil::vec({1.0})};
    const CoeffTable t = coeff_table(s, 0.1, 12, 4, false);
    const auto far = DiscretePath::sample([](double x) { return testutil::vec({3.0 * x}); }, 1.0, 10);
    CHECK_THROWS_AS(action(far, t, ActionKind::S_m), ExtrapolationError);
  }

  TEST_CASE("constant-coefficient control is the constant sqrt(2)") {
    // z = (1/sqrt m) sigma (sqrt m / lambda) Q^{-1} (nu - r) = sqrt2 * (3 - 1) / 2
    const ProblemSpec s = make_preset(PresetName::constant_coeff);
    BasisPtr b = basis_for(s, 12, 4);
    const PhiResult phi = solve_phi(s, Vec::Zero(1), 0.1, b);
    const Coeffs c = coeffs_from_phi(s, Vec::Zero(1), phi);
    const ControlField z(s, Vec::Zero(1), phi, c, testutil::vec({3.0}));
    for (double p : {-1.3, 0.0, 2.1})
      CHECK(z.eval(testutil::vec({p}), testutil::vec({0.4}))(0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    const ControlIdentity id = control_identity(s, Vec::Zero(1), phi, c, testutil::vec({3.0}));
    CHECK(id.rhs == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(id.rel < 1e-12);
    const ControlField zero(s, Vec::Zero(1), phi, c, c.r);
    CHECK(zero.is_zero());
  }

  TEST_CASE("control identity for the gradient drift") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    BasisPtr b = basis_for(s, 32, 16);
    const PhiResult phi = solve_phi(s, Vec::Zero(1), 0.1, b);
    const Coeffs c = coeffs_from_phi(s, Vec::Zero(1), phi);
    for (double nu : {-0.5, 2.0}) {
      const ControlIdentity id = control_identity(s, Vec::Zero(1), phi, c, testutil::vec({nu}));
      CHECK(id.rel < 1e-6);
      CHECK(id.rhs == doctest::Approx(local_rate(testutil::vec({nu}), c) * 2).epsilon(1e-12));
    }
  }
}
