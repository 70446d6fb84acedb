#include "hypolab/centering.hpp"
#include "hypolab/config.hpp"
#include "hypolab/problem.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <string>

using namespace hypolab;

TEST_SUITE("model") {
  TEST_CASE("presets round-trip through the config format") {
    for (auto p : {PresetName::constant_coeff, PresetName::gradient_drift, PresetName::tilted_nongradient}) {
      const ProblemSpec s = make_preset(p);
      const std::string text = canonical_config(s);
      const ProblemSpec back = parse_config(text);
      CHECK(canonical_config(back) == text);
      CHECK(back.dim == s.dim);
      const Vec q = Vec::Zero(s.dim);
      const Vec r = Vec::Constant(s.dim, 0.137);
      for (int l = 0; l < s.dim; ++l) {
        CHECK(back.b[l].eval(q, r) == doctest::Approx(s.b[l].eval(q, r)).epsilon(1e-15));
        CHECK(back.c[l].eval(q, r) == doctest::Approx(s.c[l].eval(q, r)).epsilon(1e-15));
      }
    }
  }

  TEST_CASE("config errors carry the line number") {
    const std::string text = "[problem]\ndim = 1\nbogus = 3\n";
    try {
      parse_config(text, "t.ini");
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("t.ini:3") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config("[problem]\ndim = 3\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nowhere]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[coefficients.b]\nmode = component=0 k=1,2 cos=1\n"), ConfigError);
  }

  TEST_CASE("profiles evaluate as written") {
    const Profile p = parse_profile("poly(1, 2, 3)");
    CHECK(p(testutil::vec({2.0})) == doctest::Approx(1 + 4 + 12));
    CHECK(p.gradient(testutil::vec({2.0}))(0) == doctest::Approx(2 + 12));
    const Profile t = parse_profile("table(0:1, 1:3)");
    CHECK(t(testutil::vec({0.25})) == doctest::Approx(1.5));
  }

  TEST_CASE("check_conditions accepts the gradient preset and flags a bad scale ordering") {
    ProblemSpec s = make_preset(PresetName::gradient_drift);
    const ConditionReport ok = check_conditions(s);
    CHECK(ok.all_ok());
    CHECK(ok.centering_residual.cwiseAbs().maxCoeff() < 1e-12);
    s.delta = s.eps;
    const ConditionReport bad = check_conditions(s);
    CHECK_FALSE(bad.scale_ok);
    CHECK_FALSE(bad.flags.empty());
  }

  TEST_CASE("check_conditions flags a non-positive friction") {
    ProblemSpec s = make_preset(PresetName::constant_coeff);
    s.lambda = Profile::polynomial({-1.0, 1.0});
    s.lambda_lo = 0.1;
    s.lambda_hi = 2.0;
    s.q_grid = {testutil::vec({0.0}), testutil::vec({2.0})};
    CHECK_FALSE(check_conditions(s).lambda_ok);
  }

  TEST_CASE("centering calibration of the tilted drift matches the Bessel value") {
    // rho0 ~ exp(-cos 2 pi r1): <sin> = 0 and <cos 4 pi r1> = I2(1)/I0(1)
    const ProblemSpec s = make_preset(PresetName::tilted_nongradient);
    CenteringOptions o;
    o.tol = 1e-13;
    const CenteringResult cr = calibrate_centering(s, Vec::Zero(2), o);
    const double expect = -0.15 * (1.0 - std::cyl_bessel_i(2.0, 1.0) / std::cyl_bessel_i(0.0, 1.0));
    CHECK(cr.offset(1) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(std::abs(cr.offset(0)) < 1e-12);
    CHECK(cr.residual.cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("in one dimension centering reduces to a zero-mean drift") {
    const std::string text =
        "[problem]\ndim = 1\n[coefficients.b]\nmode = component=0 k=1 cos=0 sin=1\n"
        "mode = component=0 k=2 cos=0.3 sin=0\noffset = 0.4\nfree = true\n";
    const ProblemSpec s = parse_config(text);
    const CenteringResult cr = calibrate_centering(s, Vec::Zero(1), {});
    CHECK(std::abs(cr.offset(0)) < 1e-9);
  }
}
