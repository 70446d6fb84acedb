#include "hypolab/dynamics.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace hypolab;

namespace {

ProblemSpec free_particle() {
  ProblemSpec s = make_preset(PresetName::constant_coeff);
  s.c = {Series{}};
  return s;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double mean_of(const std::vector<Vec>& v, int a = 0) {
  double s = 0;
  for (const Vec& x : v) s += x(a);
  return s / double(v.size());
}

double var_of(const std::vector<Vec>& v, int a = 0) {
  const double m = mean_of(v, a);
  double s = 0;
  for (const Vec& x : v) s += (x(a) - m) * (x(a) - m);
  return s / double(v.size() - 1);
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("step sizes above h_max are rejected") {
    const ProblemSpec s = make_preset(PresetName::constant_coeff);
    SimConfig c;
    c.n_paths = 4;
    c.h = 1.01 * h_max_underdamped(s.eps, s.delta, s.mass);
    CHECK_THROWS_AS(simulate(s, c), ParameterError);
    c.system = System::overdamped;
    c.h = 1.01 * h_max_overdamped(s.eps, s.delta);
    CHECK_THROWS_AS(simulate(s, c), ParameterError);
  }

  TEST_CASE("ensembles do not depend on the thread count") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    SimConfig c;
    c.n_paths = 600;
    c.T = 0.2;
    c.seed = 3;
    c.jobs = 1;
    const PathEnsemble a = simulate(s, c);
    c.jobs = 4;
    const PathEnsemble b = simulate(s, c);
    for (long i = 0; i < c.n_paths; ++i) CHECK(a.q_T[i](0) == b.q_T[i](0));
  }

  TEST_CASE("a zero control reproduces the uncontrolled paths bit for bit") {
    const ProblemSpec s = make_preset(PresetName::constant_coeff);
    BasisPtr b = basis_for(s, 12, 4);
    const PhiResult phi = solve_phi(s, Vec::Zero(1), s.mass, b);
    const Coeffs co = coeffs_from_phi(s, Vec::Zero(1), phi);
    const ControlField zero(s, Vec::Zero(1), phi, co, co.r);
    SimConfig c;
    c.n_paths = 100;
    c.T = 0.2;
    const PathEnsemble a = simulate(s, c);
    c.control = &zero;
    const PathEnsemble z = simulate(s, c);
    for (long i = 0; i < c.n_paths; ++i) {
      CHECK(a.q_T[i](0) == z.q_T[i](0));
      CHECK(z.log_weight[i] == 0.0);
    }
  }

  TEST_CASE("free particle terminal law is the integrated OU Gaussian") {
    // q_T = (eps / (delta sqrt m)) int p dt with stationary OU p of rate gamma and variance beta
    const ProblemSpec s = free_particle();
    SimConfig c;
    c.eps = 0.1;
    c.delta = 0.05;
    c.m = 0.1;
    c.T = 1.0;
    c.step_factor = 0.1;
    c.n_paths = 4000;
    c.seed = 21;
    c.record_points = 1;
    const PathEnsemble e = simulate(s, c);
    const double gamma = 1.0 * c.eps / (c.m * c.delta * c.delta);
    const double var = 2 * s.beta * c.eps / 1.0 * (c.T - (1 - std::exp(-gamma * c.T)) / gamma);
    const long n = c.n_paths;
    CHECK(std::abs(var_of(e.q_T) - var) < 4 * var * std::sqrt(2.0 / n));
    std::vector<double> z;
    for (const Vec& q : e.q_T) z.push_back(q(0) / std::sqrt(var));
    std::sort(z.begin(), z.end());
    double ks = 0;
    for (long i = 0; i < n; ++i) {
      const double F = normal_cdf(z[i]);
      ks = std::max({ks, std::abs(F - double(i) / n), std::abs(F - double(i + 1) / n)});
    }
    CHECK(ks < 1.63 / std::sqrt(double(n)));  // 1% Kolmogorov-Smirnov level
  }

  TEST_CASE("halving the step leaves the terminal mean unchanged") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    SimConfig c;
    c.n_paths = 1000;
    c.T = 0.5;
    c.record_points = 1;
    c.step_factor = 0.5;
    const PathEnsemble a = simulate(s, c);
    c.step_factor = 0.25;
    const PathEnsemble b = simulate(s, c);
    const double se = std::sqrt((var_of(a.q_T) + var_of(b.q_T)) / c.n_paths);
    CHECK(std::abs(mean_of(a.q_T) - mean_of(b.q_T)) < 4 * se);
  }

  TEST_CASE("occupation measure has unit mass per time and a zero residual for constants") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    SimConfig c;
    c.n_paths = 50;
    c.T = 0.5;
    c.occupation = true;
    c.tests = {OccupationTest::constant(1), OccupationTest::momentum(1, 0)};
    const PathEnsemble e = simulate(s, c);
    CHECK(std::abs(e.mass_per_time - 1.0) < 1e-12);
    CHECK(e.occ_mean(0) == 0.0);
    CHECK(e.occ_abs(0) == 0.0);
    CHECK(e.window > 0);
    CHECK(e.window < c.T);
  }

  TEST_CASE("generator on test functions matches finite differences of the vector field") {
    // g = p: L^m g = -(lambda/m) p + (1/sqrt m) b(r)
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    const double m = 0.1, p = 0.8, r = 0.3;
    const double v = generator_on_test(s, Vec::Zero(1), m, OccupationTest::momentum(1, 0), testutil::vec({p}),
                                       testutil::vec({r}));
    const double b = kTwoPi * std::sin(kTwoPi * r);
    CHECK(v == doctest::Approx(-p / m + b / std::sqrt(m)).epsilon(1e-13));
  }

  TEST_CASE("law of large numbers for constant coefficients") {
    const ProblemSpec s = make_preset(PresetName::constant_coeff);
    const CoeffTable t = coeff_table(s, s.mass, 12, 4, false);
    SimConfig c;
    c.n_paths = 300;
    c.T = 0.5;
    const LLNResult r = lln_check(s, c, t);
    CHECK(r.ode_qT(0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(r.terminal_z < 4);
  }
}
