#include "hypolab/importance.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace hypolab;

namespace {

struct Controlled {
  ProblemSpec spec = make_preset(PresetName::constant_coeff);
  PhiResult phi;
  Coeffs coeffs;
  explicit Controlled(double m) {
    spec.mass = m;
    phi = solve_phi(spec, Vec::Zero(1), m, basis_for(spec, 12, 4));
    coeffs = coeffs_from_phi(spec, Vec::Zero(1), phi);
  }
  ControlField control(double nu) const { return ControlField(spec, Vec::Zero(1), phi, coeffs, testutil::vec({nu})); }
};

}  // namespace

TEST_SUITE("importance") {
  TEST_CASE("whole-space event has probability one") {
    const Controlled k(0.1);
    SimConfig c;
    c.n_paths = 200;
    c.T = 0.2;
    const ISEstimate plain = is_estimate(k.spec, c, Event::whole_space());
    CHECK(plain.estimate == 1.0);
    CHECK(plain.std_error == 0.0);
    const ControlField z = k.control(3.0);
    c.control = &z;
    const ISEstimate w = is_estimate(k.spec, c, Event::whole_space());
    CHECK(w.self_normalized == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(w.estimate - 1.0) < 4 * w.std_error);
  }

  TEST_CASE("fewer than 100 samples are rejected") {
    const Controlled k(0.1);
    SimConfig c;
    c.n_paths = 99;
    CHECK_THROWS_AS(is_estimate(k.spec, c, Event::whole_space()), ParameterError);
  }

  TEST_CASE("zero control reproduces plain Monte Carlo") {
    const Controlled k(0.1);
    SimConfig c;
    c.n_paths = 300;
    c.T = 0.3;
    const Event ev = Event::terminal_at_least(0, 0.35);
    const ISEstimate a = is_estimate(k.spec, c, ev);
    const ControlField z = k.control(k.coeffs.r(0));
    c.control = &z;
    const ISEstimate b = is_estimate(k.spec, c, ev);
    CHECK(a.estimate == b.estimate);
    CHECK(a.hits == b.hits);
  }

  TEST_CASE("importance sampling and plain Monte Carlo agree on a one-sigma event") {
    const Controlled k(0.1);
    SimConfig c;
    c.n_paths = 4000;
    c.T = 0.5;
    c.record_points = 1;
    const double thr = 1.0 * c.T + std::sqrt(k.spec.eps * 2.0 * c.T);
    const Event ev = Event::terminal_at_least(0, thr);
    const ISEstimate plain = is_estimate(k.spec, c, ev);
    const ControlField z = k.control(thr / c.T);
    c.control = &z;
    c.seed = 2;
    const ISEstimate is = is_estimate(k.spec, c, ev);
    CHECK(std::abs(plain.estimate - is.estimate) < 4 * std::hypot(plain.std_error, is.std_error));
    CHECK(is.std_error < plain.std_error);
  }
}
