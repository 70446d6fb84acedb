#include "hypolab/spectral.hpp"
#include "hypolab/stationary.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace hypolab;

TEST_SUITE("spectral") {
  TEST_CASE("Hermite functions are orthonormal for the Gaussian weight") {
    for (double beta : {1.0, 2.5}) {
      const int N = 20;
      const hermite::Rule rule = hermite::gauss(N + 2, beta);
      CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
      Mat G = Mat::Zero(N, N);
      std::vector<double> h(N);
      for (long k = 0; k < rule.nodes.size(); ++k) {
        hermite::eval(N, beta, rule.nodes(k), h.data());
        for (int i = 0; i < N; ++i)
          for (int j = 0; j < N; ++j) G(i, j) += rule.weights(k) * h[i] * h[j];
      }
      CHECK((G - Mat::Identity(N, N)).cwiseAbs().maxCoeff() < 1e-11);
    }
  }

  TEST_CASE("Hermite derivative and p-multiplication matrices match finite differences") {
    const double beta = 1.7, x = 0.43, e = 1e-6;
    const int N = 8;
    std::vector<double> h(N), hp(N), hm(N);
    hermite::eval(N, beta, x, h.data());
    hermite::eval(N, beta, x + e, hp.data());
    hermite::eval(N, beta, x - e, hm.data());
    const Mat D = hermite::d_dp(N + 1, beta);
    std::vector<double> h1(N + 1);
    hermite::eval(N + 1, beta, x, h1.data());
    for (int n = 0; n < N; ++n) {
      double viaD = 0;
      for (int k = 0; k < N + 1; ++k) viaD += D(k, n) * h1[k];
      CHECK(viaD == doctest::Approx((hp[n] - hm[n]) / (2 * e)).epsilon(1e-7));
    }
  }

  TEST_CASE("generator at unit mass is A + B") {
    const ProblemSpec s = make_preset(PresetName::gradient_drift);
    BasisPtr b = build_basis(1, 10, 4, s.beta);
    const Vec q = Vec::Zero(1);
    const SpMat L = assemble_generator(b, s, q, 1.0).mat;
    const SpMat AB = assemble_A(b).mat + assemble_B(b, s, q).mat;
    CHECK(Mat(L - AB).cwiseAbs().maxCoeff() < 1e-13);
    const double m = 0.04;
    const SpMat Lm = assemble_generator(b, s, q, m).mat;
    const SpMat ref = assemble_A(b).mat / m + assemble_B(b, s, q).mat / std::sqrt(m);
    CHECK(Mat(Lm - ref).cwiseAbs().maxCoeff() < 1e-11);
  }

  TEST_CASE("A is diagonal with eigenvalue minus the total Hermite degree") {
    BasisPtr b = build_basis(2, 6, 2, 1.3);
    const Mat A(assemble_A(b).mat);
    for (long i = 0; i < b->size(); ++i) {
      const long h = i / b->F();
      CHECK(A(i, i) == doctest::Approx(-double(b->total_degree(h))));
      CHECK((A.row(i).cwiseAbs().sum() - std::abs(A(i, i))) < 1e-13);
    }
  }

  TEST_CASE("spectral gap of A + p d_r is one at two truncations") {
    // b == 0: the k != 0 Fourier sectors have spectrum -n - (2 pi k)^2, the k = 0 sector is pure OU
    const ProblemSpec s = make_preset(PresetName::constant_coeff);
    CHECK(spectral_gap(s, Vec::Zero(1), build_basis(1, 8, 3, 1.0)) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(spectral_gap(s, Vec::Zero(1), build_basis(1, 12, 5, 1.0)) == doctest::Approx(1.0).epsilon(1e-9));
  }

  TEST_CASE("Fourier basis derivative acts on sines and cosines") {
    const RBasis rb({3});
    const Mat D = rb.deriv_dense(0);
    const double r = 0.21;
    Vec v = rb.eval(testutil::vec({r}));
    // f = sqrt2 sin(2 pi 2 r) has index 4 (layout 1, cos1, sin1, cos2, sin2, ...)
    Vec e = Vec::Zero(rb.size());
    e(4) = 1.0;
    const double deriv = v.dot(D * e);
    CHECK(deriv == doctest::Approx(std::sqrt(2.0) * 2 * kTwoPi * std::cos(2 * kTwoPi * r)).epsilon(1e-13));
  }

  TEST_CASE("collocation integrates products of basis functions exactly") {
    BasisPtr b = build_basis(2, 5, 2, 1.0);
    const Collocation col(b);
    CHECK(col.weights().sum() == doctest::Approx(1.0).epsilon(1e-14));
    const long D = b->size();
    Mat V(col.points(), D);
    for (long i = 0; i < D; ++i) {
      Vec e = Vec::Zero(D);
      e(i) = 1.0;
      V.col(i) = col.values(e);
    }
    const Mat G = V.transpose() * col.weights().asDiagonal() * V;
    CHECK((G - Mat::Identity(D, D)).cwiseAbs().maxCoeff() < 1e-12);
  }

  TEST_CASE("tensor files round-trip") {
    const auto path = std::filesystem::temp_directory_path() / "hypolab_tensor_test.bin";
    const std::vector<long> shape{3, 4};
    std::vector<double> vals(12);
    for (int i = 0; i < 12; ++i) vals[i] = std::sin(1.0 + i) * std::pow(10.0, i - 6);
    write_tensor(path.string(), "field", shape, vals);
    std::string label;
    std::vector<long> shape2;
    std::vector<double> vals2;
    read_tensor(path.string(), label, shape2, vals2);
    CHECK(label == "field");
    CHECK(shape2 == shape);
    CHECK(vals2 == vals);
    std::filesystem::remove(path);
  }

  TEST_CASE("basis rejects an oversized truncation") {
    const long cap = TensorBasis::memory_cap();
    TensorBasis::memory_cap() = 1000;
    CHECK_THROWS(build_basis(2, 40, 16, 1.0));
    TensorBasis::memory_cap() = cap;
  }
}
