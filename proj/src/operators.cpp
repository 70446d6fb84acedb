#include "hypolab/spectral.hpp"

#include <cmath>
#include <iostream>

namespace hypolab {

SpMat sparse_from_dense(const Mat& m, double rel_drop) {
  const double tol = rel_drop * m.cwiseAbs().maxCoeff();
  std::vector<Triplet> t;
  for (long j = 0; j < m.cols(); ++j)
    for (long i = 0; i < m.rows(); ++i)
      if (m(i, j) != 0.0 && std::abs(m(i, j)) > tol) t.emplace_back(i, j, m(i, j));
  SpMat s(m.rows(), m.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

SpMat kron(const SpMat& a, const SpMat& b) {
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(a.nonZeros()) * b.nonZeros());
  for (int ja = 0; ja < a.outerSize(); ++ja)
    for (SpMat::InnerIterator ia(a, ja); ia; ++ia)
      for (int jb = 0; jb < b.outerSize(); ++jb)
        for (SpMat::InnerIterator ib(b, jb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(), ia.value() * ib.value());
  SpMat s(a.rows() * b.rows(), a.cols() * b.cols());
  s.setFromTriplets(t.begin(), t.end());
  return s;
}

namespace {

SpMat identity(long n) {
  SpMat I(n, n);
  I.setIdentity();
  return I;
}

// 1D Hermite matrix X acting on p-axis `axis`, identity on the others.
SpMat hermite_op(const TensorBasis& b, int axis, const Mat& X) {
  SpMat out = identity(1);
  for (int a = 0; a < b.dim(); ++a) {
    SpMat f = a == axis ? sparse_from_dense(X, 0.0) : identity(b.N());
    out = kron(out, f);
  }
  return out;
}

SpMat hermite_op2(const TensorBasis& b, int ax1, const Mat& X1, int ax2, const Mat& X2) {
  if (ax1 == ax2) return hermite_op(b, ax1, X1 * X2);
  SpMat out = identity(1);
  for (int a = 0; a < b.dim(); ++a) {
    SpMat f = a == ax1 ? sparse_from_dense(X1, 0.0) : a == ax2 ? sparse_from_dense(X2, 0.0) : identity(b.N());
    out = kron(out, f);
  }
  return out;
}

SpMat degree_diag(const TensorBasis& b) {
  SpMat Dg(b.hermite_size(), b.hermite_size());
  std::vector<Triplet> t;
  for (long h = 0; h < b.hermite_size(); ++h) t.emplace_back(h, h, double(b.total_degree(h)));
  Dg.setFromTriplets(t.begin(), t.end());
  return Dg;
}

std::vector<int> spec_bw(const ProblemSpec& spec, int extra_factor = 1) {
  std::vector<int> bw(spec.dim);
  for (int a = 0; a < spec.dim; ++a) bw[a] = extra_factor * spec.bandwidth(a);
  return bw;
}

double b_comp(const ProblemSpec& spec, const Vec& q, const Vec& r, int l) {
  return spec.b[l].eval(q, r) + spec.b_offset[l];
}

}  // namespace

Vec project_series(const RBasis& rb, const Series& s, const Vec& q, double offset) {
  std::vector<int> bw(rb.dim());
  for (int a = 0; a < rb.dim(); ++a) bw[a] = s.bandwidth(a);
  const auto M = rb.grid_for(bw);
  return rb.project(M, rb.sample(M, [&](const Vec& r) { return s.eval(q, r) + offset; }));
}

bool drift_exceeds_truncation(const RBasis& rb, const ProblemSpec& spec) {
  for (int a = 0; a < rb.dim(); ++a)
    if (spec.bandwidth(a) > rb.K(a) && rb.K(a) > 0) return true;
  return false;
}

Mat r_galerkin(const RBasis& rb, const std::function<double(const Vec&)>& g, const std::vector<int>& g_bw,
               RWeight w) {
  std::vector<int> bw(rb.dim());
  for (int a = 0; a < rb.dim(); ++a) {
    bw[a] = a < static_cast<int>(g_bw.size()) ? g_bw[a] : 0;
    if (w) bw[a] += w->basis->K(a);
  }
  const auto M = rb.grid_for(bw);
  Vec vals = rb.sample(M, g);
  if (w) {
    if (w->basis->Ks() != rb.Ks()) throw BasisError("spectral", "weight field basis mismatch");
    vals.array() *= rb.on_grid(M, w->coef).array();
  }
  return rb.galerkin(M, vals);
}

Mat assemble_L0(const RBasis& rb, const ProblemSpec& spec, const Vec& q, RWeight w) {
  const int d = rb.dim();
  if (drift_exceeds_truncation(rb, spec))
    std::cerr << "warning: drift bandwidth exceeds Fourier truncation; Galerkin projection applies\n";
  const double lam = lambda_at(spec, q);
  const auto bw = spec_bw(spec);
  const int F = rb.size();
  Mat L = Mat::Zero(F, F);
  for (int a = 0; a < d; ++a) {
    Mat Mb = r_galerkin(rb, [&](const Vec& r) { return b_comp(spec, q, r, a); }, bw, w);
    L += (1.0 / lam) * Mb * rb.deriv_dense(a);
  }
  if (spec.sigma_mode == SigmaMode::fluctuation_dissipation) {
    Mat Mw = w ? r_galerkin(rb, [](const Vec&) { return 1.0; }, {}, w) : Mat::Identity(F, F);
    for (int a = 0; a < d; ++a) {
      const Mat Da = rb.deriv_dense(a);
      L += (spec.beta / lam) * Mw * Da * Da;
    }
  } else {
    const auto bw2 = spec_bw(spec, 2);
    for (int a = 0; a < d; ++a)
      for (int c = 0; c < d; ++c) {
        Mat Ma = r_galerkin(
            rb, [&](const Vec& r) { return eval_coefficients(spec, q, r).alpha(a, c); }, bw2, w);
        L += (0.5 / (lam * lam)) * Ma * rb.deriv_dense(a) * rb.deriv_dense(c);
      }
  }
  return L;
}

OperatorMatrix assemble_A(BasisPtr basis, RWeight w) {
  const RBasis& rb = basis->r();
  SpMat Mw = w ? sparse_from_dense(r_galerkin(rb, [](const Vec&) { return 1.0; }, {}, w)) : identity(rb.size());
  OperatorMatrix op{basis, kron(-degree_diag(*basis), Mw), "A"};
  return op;
}

OperatorMatrix assemble_B(BasisPtr basis, const ProblemSpec& spec, const Vec& q, RWeight w) {
  const TensorBasis& b = *basis;
  const RBasis& rb = b.r();
  if (spec.dim != b.dim()) throw BasisError("spectral", "basis dimension does not match problem");
  if (drift_exceeds_truncation(rb, spec))
    std::cerr << "warning: drift bandwidth exceeds Fourier truncation; Galerkin projection applies\n";
  const Mat P = hermite::p_mult(b.N(), b.beta());
  const Mat Dp = hermite::d_dp(b.N(), b.beta());
  const auto bw = spec_bw(spec);
  Mat Mw = w ? r_galerkin(rb, [](const Vec&) { return 1.0; }, {}, w) : Mat::Identity(rb.size(), rb.size());
  SpMat B(b.size(), b.size());
  for (int a = 0; a < b.dim(); ++a) {
    if (rb.K(a) > 0) B += kron(hermite_op(b, a, P), sparse_from_dense(Mw * rb.deriv_dense(a)));
    Mat Mb = r_galerkin(rb, [&](const Vec& r) { return b_comp(spec, q, r, a); }, bw, w);
    B += kron(hermite_op(b, a, Dp), sparse_from_dense(Mb));
  }
  B.prune(0.0);
  return {basis, B, "B"};
}

OperatorMatrix assemble_generator(BasisPtr basis, const ProblemSpec& spec, const Vec& q, double m, RWeight w) {
  if (!(m > 0)) throw ParameterError("spectral", "mass m must be positive");
  const double lam = lambda_at(spec, q);
  OperatorMatrix B = assemble_B(basis, spec, q, w);
  SpMat L;
  if (spec.sigma_mode == SigmaMode::fluctuation_dissipation) {
    L = (lam / m) * assemble_A(basis, w).mat + (1.0 / std::sqrt(m)) * B.mat;
  } else {
    const TensorBasis& b = *basis;
    const RBasis& rb = b.r();
    const Mat P = hermite::p_mult(b.N(), b.beta());
    const Mat Dp = hermite::d_dp(b.N(), b.beta());
    Mat Mw = w ? r_galerkin(rb, [](const Vec&) { return 1.0; }, {}, w) : Mat::Identity(rb.size(), rb.size());
    SpMat fast(b.size(), b.size());
    for (int a = 0; a < b.dim(); ++a) fast += kron(hermite_op(b, a, -lam * P * Dp), sparse_from_dense(Mw));
    const auto bw2 = spec_bw(spec, 2);
    for (int a = 0; a < b.dim(); ++a)
      for (int c = 0; c < b.dim(); ++c) {
        Mat Ma = r_galerkin(
            rb, [&](const Vec& r) { return 0.5 * eval_coefficients(spec, q, r).alpha(a, c); }, bw2, w);
        fast += kron(hermite_op2(b, a, Dp, c, Dp), sparse_from_dense(Ma));
      }
    L = (1.0 / m) * fast + (1.0 / std::sqrt(m)) * B.mat;
  }
  L.prune(0.0);
  return {basis, L, "L_m"};
}

OperatorMatrix assemble_generator_adjoint(BasisPtr basis, const ProblemSpec& spec, const Vec& q, double m) {
  OperatorMatrix L = assemble_generator(basis, spec, q, m);
  return {basis, SpMat(L.mat.transpose()), "L_m_adjoint"};
}

OperatorMatrix grad_p(BasisPtr basis, int axis) {
  const TensorBasis& b = *basis;
  return {basis, kron(hermite_op(b, axis, hermite::d_dp(b.N(), b.beta())), identity(b.F())),
          "grad_p_" + std::to_string(axis)};
}

OperatorMatrix grad_r(BasisPtr basis, int axis) {
  const TensorBasis& b = *basis;
  return {basis, kron(identity(b.hermite_size()), b.r().deriv(axis)), "grad_r_" + std::to_string(axis)};
}

OperatorMatrix mult_p(BasisPtr basis, int axis) {
  const TensorBasis& b = *basis;
  return {basis, kron(hermite_op(b, axis, hermite::p_mult(b.N(), b.beta())), identity(b.F())),
          "mult_p_" + std::to_string(axis)};
}

OperatorMatrix mult_h_p(BasisPtr basis, const ProblemSpec& spec, const Vec& q, const RField& rho0) {
  const TensorBasis& b = *basis;
  const RBasis& rb = b.r();
  const Mat P = hermite::p_mult(b.N(), b.beta());
  SpMat out(b.size(), b.size());
  for (int a = 0; a < b.dim(); ++a) {
    RField drho{rho0.basis, rb.deriv_dense(a) * rho0.coef};
    std::vector<int> bw(b.dim());
    for (int c = 0; c < b.dim(); ++c) bw[c] = spec.bandwidth(c) + rb.K(c);
    Mat Mh = r_galerkin(
        rb,
        [&](const Vec& r) { return rho0.eval(r) * b_comp(spec, q, r, a) / spec.beta - drho.eval(r); }, bw,
        nullptr);
    out += kron(hermite_op(b, a, P), sparse_from_dense(Mh));
  }
  out.prune(0.0);
  return {basis, out, "mult_h_p"};
}

SpMat gram(BasisPtr basis, const RField& w) {
  const RBasis& rb = basis->r();
  return kron(identity(basis->hermite_size()),
              sparse_from_dense(r_galerkin(rb, [](const Vec&) { return 1.0; }, {}, &w)));
}

}  // namespace hypolab
