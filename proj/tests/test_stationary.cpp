#include "hypolab/centering.hpp"
#include "hypolab/config.hpp"
#include "hypolab/stationary.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypolab;

namespace {

ProblemSpec calibrated_tilted() {
  const ProblemSpec s = make_preset(PresetName::tilted_nongradient);
  CenteringOptions o;
  o.tol = 1e-12;
  return calibrate_centering(s, Vec::Zero(2), o).spec;
}

}  // namespace

TEST_SUITE("stationary") {
  TEST_CASE("overdamped density of a gradient drift is the Gibbs density") {
    for (double beta : {1.0, 0.5}) {
      ProblemSpec s = make_preset(PresetName::gradient_drift);
      s.beta = beta;
      const RField rho0 = solve_rho0(s, Vec::Zero(1), rbasis_for(s, 24));
      const double Z = std::cyl_bessel_i(0.0, 1.0 / beta);
      for (double r : {0.0, 0.1, 0.37, 0.5, 0.83}) {
        const double gibbs = std::exp(-std::cos(kTwoPi * r) / beta) / Z;
        CHECK(rho0.eval(testutil::vec({r})) == doctest::Approx(gibbs).epsilon(1e-11));
      }
    }
  }

  TEST_CASE("overdamped density with a net flux matches the quadrature formula") {
    // b = sin(2 pi r) + 0.5, beta = 1: rho(r) ~ e^{U(r)} int_r^{r+1} e^{-U}, U' = b
    const std::string text =
        "[problem]\ndim = 1\n[coefficients.b]\nmode = component=0 k=1 cos=0 sin=1\noffset = 0.5\nfree = false\n";
    const ProblemSpec s = parse_config(text);
    const RField rho0 = solve_rho0(s, Vec::Zero(1), rbasis_for(s, 24));
    auto U = [](double r) { return (1.0 - std::cos(kTwoPi * r)) / kTwoPi + 0.5 * r; };
    auto rho = [&](double r) {
      return std::exp(U(r)) * testutil::simpson([&](double x) { return std::exp(-U(x)); }, r, r + 1, 2000);
    };
    const double Z = testutil::midpoint(rho, 0, 1, 400);
    for (double r : {0.05, 0.3, 0.55, 0.9}) CHECK(rho0.eval(testutil::vec({r})) == doctest::Approx(rho(r) / Z).epsilon(1e-9));
  }

  TEST_CASE("gradient drift gives the product measure at every mass") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    BasisPtr b = basis_for(s, 24, 12);
    for (double m : {0.5, 0.05, 0.005}) {
      const DensitySet ds = solve_rho_m(s, Vec::Zero(1), m, b);
      CHECK(ds.norms.L2 < 1e-10);
      CHECK(std::abs(ds.zero_mean) < 1e-12);
    }
  }

  TEST_CASE("density deviation routes agree and satisfy the gradient identity") {
    const ProblemSpec s = calibrated_tilted();
    BasisPtr b = basis_for(s, 16, 8);
    const DensitySet ds = solve_rho_m(s, Vec::Zero(2), 0.1, b);
    CHECK(ds.norms.L2 > 1e-3);
    CHECK(ds.route_agreement < 1e-5);
    CHECK(std::abs(ds.zero_mean) < 1e-10);
    const auto [lhs, rhs] = gradient_identity(s, Vec::Zero(2), ds);
    CHECK(std::abs(lhs - rhs) <= 1e-7 * std::max(std::abs(lhs), std::abs(rhs)));
  }

  TEST_CASE("density deviation shrinks along a mass sweep") {
    const ProblemSpec s = calibrated_tilted();
    const HypoSweep sw = hypocoercivity_sweep(s, Vec::Zero(2), {0.5, 0.1, 0.02}, basis_for(s, 16, 8));
    CHECK(sw.monotone);
    CHECK(sw.slope > 0);
  }

  TEST_CASE("log-log slope of a power law") {
    std::vector<double> x{1, 0.1, 0.01}, y;
    for (double v : x) y.push_back(3 * std::pow(v, 1.5));
    CHECK(fit_loglog_slope(x, y) == doctest::Approx(1.5).epsilon(1e-12));
  }
}
