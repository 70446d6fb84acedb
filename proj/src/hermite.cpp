#include "hypolab/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace hypolab::hermite {

void eval(int N, double beta, double x, double* out) {
  const double y = x / std::sqrt(beta);
  out[0] = 1.0;
  if (N > 1) out[1] = y;
  for (int n = 1; n + 1 < N; ++n) out[n + 1] = (y * out[n] - std::sqrt(double(n)) * out[n - 1]) / std::sqrt(n + 1.0);
}

void eval_deriv(int N, double beta, double /*x*/, const double* h, double* out) {
  out[0] = 0.0;
  for (int n = 1; n < N; ++n) out[n] = std::sqrt(n / beta) * h[n - 1];
}

Mat p_mult(int N, double beta) {
  Mat P = Mat::Zero(N, N);
  const double s = std::sqrt(beta);
  for (int n = 0; n < N; ++n) {
    if (n + 1 < N) P(n + 1, n) = s * std::sqrt(n + 1.0);
    if (n >= 1) P(n - 1, n) = s * std::sqrt(double(n));
  }
  return P;
}

Mat d_dp(int N, double beta) {
  Mat D = Mat::Zero(N, N);
  for (int n = 1; n < N; ++n) D(n - 1, n) = std::sqrt(n / beta);
  return D;
}

Rule gauss(int n, double beta) {
  Mat J = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = std::sqrt(double(k));
  Eigen::SelfAdjointEigenSolver<Mat> es(J, Eigen::EigenvaluesOnly);
  Rule r;
  r.nodes = es.eigenvalues();
  r.weights.resize(n);
  std::vector<double> h(n);
  for (int i = 0; i < n; ++i) {
    // Newton polish on He_n using the orthonormal recurrence.
    double x = r.nodes(i);
    for (int it = 0; it < 3; ++it) {
      std::vector<double> hh(n + 1);
      eval(n + 1, 1.0, x, hh.data());
      const double f = hh[n];
      const double fp = std::sqrt(double(n)) * hh[n - 1];
      if (fp == 0.0) break;
      x -= f / fp;
    }
    r.nodes(i) = x;
    eval(n, 1.0, x, h.data());
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += h[k] * h[k];
    r.weights(i) = 1.0 / s;
  }
  r.weights /= r.weights.sum();
  r.nodes *= std::sqrt(beta);
  return r;
}

double triple(int a, int b, int c) {
  const int tot = a + b + c;
  if (tot % 2) return 0.0;
  const int s = tot / 2;
  if (s < a || s < b || s < c) return 0.0;
  const double lg = 0.5 * (std::lgamma(a + 1.0) + std::lgamma(b + 1.0) + std::lgamma(c + 1.0)) -
                    std::lgamma(s - a + 1.0) - std::lgamma(s - b + 1.0) - std::lgamma(s - c + 1.0);
  return std::exp(lg);
}

}  // namespace hypolab::hermite
