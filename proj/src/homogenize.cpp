#include "hypolab/homogenize.hpp"

#include "hypolab/centering.hpp"
#include "hypolab/parallel.hpp"
#include "hypolab/stationary.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace hypolab {

namespace {

Coeffs finalize(Vec r, Mat Q, const char* what) {
  Coeffs c;
  c.r = std::move(r);
  c.asymmetry = 0.5 * (Q - Q.transpose()).cwiseAbs().maxCoeff();
  c.Q = 0.5 * (Q + Q.transpose());
  if (!c.Q.allFinite() || !c.r.allFinite()) throw TruncationError("homogenize", std::string(what) + " not finite");
  c.min_eig = Eigen::SelfAdjointEigenSolver<Mat>(c.Q, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  if (!(c.min_eig > 0)) {
    std::ostringstream os;
    os << what << " not positive definite (smallest eigenvalue " << c.min_eig << ")";
    throw TruncationError("homogenize", os.str());
  }
  return c;
}

Vec block_apply(const TensorBasis& b, const Mat& M, const Vec& x) {
  Vec y(x.size());
  const long F = b.F();
  for (long h = 0; h < b.hermite_size(); ++h) y.segment(h * F, F) = M * x.segment(h * F, F);
  return y;
}

std::vector<int> spec_bw(const ProblemSpec& spec) {
  std::vector<int> bw(spec.dim);
  for (int a = 0; a < spec.dim; ++a) bw[a] = spec.bandwidth(a);
  return bw;
}

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

Coeffs coeffs_collocation(const ProblemSpec& spec, const Vec& q, const PhiResult& phi) {
  BasisPtr basis = phi.phi.basis;
  const int d = spec.dim;
  const double m = phi.m;
  int extra = 0;
  for (int a = 0; a < d; ++a) extra = std::max(extra, 2 * spec.bandwidth(a));
  Collocation col(basis, extra);
  const Vec gv = col.values(phi.g.comp[0]);
  const long P = col.p_points(), R = col.r_points();
  std::vector<CoeffValues> cv(R);
  for (long ir = 0; ir < R; ++ir) cv[ir] = eval_coefficients(spec, q, col.r_point(ir));
  std::vector<Vec> dphi(d * d);  // l*d + a
  for (int l = 0; l < d; ++l)
    for (int a = 0; a < d; ++a) dphi[l * d + a] = col.values_dp(phi.phi.comp[l], a);
  const Vec& w = col.weights();

  Vec r = Vec::Zero(d);
  Mat Q = Mat::Zero(d, d);
  Mat G(d, d);
  for (long ip = 0; ip < P; ++ip)
    for (long ir = 0; ir < R; ++ir) {
      const long x = ip * R + ir;
      const double wx = w(x) * gv(x);
      for (int l = 0; l < d; ++l)
        for (int a = 0; a < d; ++a) G(l, a) = dphi[l * d + a](x);
      r += wx * (G * cv[ir].c);
      Q += wx * (G * cv[ir].alpha * G.transpose());
    }
  return finalize(r / std::sqrt(m), Q / m, "Q_m");
}

Coeffs coeffs_from_phi(const ProblemSpec& spec, const Vec& q, const PhiResult& phi) {
  if (spec.sigma_mode != SigmaMode::fluctuation_dissipation) return coeffs_collocation(spec, q, phi);
  BasisPtr basis = phi.phi.basis;
  const TensorBasis& b = *basis;
  const int d = spec.dim;
  const double m = phi.m, lam = lambda_at(spec, q);
  const Vec& g = phi.g.comp[0];
  const auto bw = spec_bw(spec);

  std::vector<Vec> dphi(d * d);
  for (int a = 0; a < d; ++a) {
    const SpMat Dp = grad_p(basis, a).mat;
    for (int l = 0; l < d; ++l) dphi[l * d + a] = Dp * phi.phi.comp[l];
  }
  Vec r = Vec::Zero(d);
  for (int a = 0; a < d; ++a) {
    const Mat Mc = r_galerkin(
        b.r(), [&](const Vec& x) { return spec.c[a].eval(q, x); }, bw);
    const Vec cg = block_apply(b, Mc, g);
    for (int l = 0; l < d; ++l) r(l) += dphi[l * d + a].dot(cg);
  }
  Mat Q = Mat::Zero(d, d);
  for (int l = 0; l < d; ++l)
    for (int k = l; k < d; ++k) {
      double s = 0;
      for (int a = 0; a < d; ++a) s += triple_integral(b, dphi[l * d + a], dphi[k * d + a], g);
      Q(l, k) = Q(k, l) = 2.0 * spec.beta * lam / m * s;
    }
  return finalize(r / std::sqrt(m), Q, "Q_m");
}

Coeffs coeffs_m(const ProblemSpec& spec, const Vec& q, double m, BasisPtr basis) {
  return coeffs_from_phi(spec, q, solve_phi(spec, q, m, basis));
}

Coeffs coeffs_from_chi(const ProblemSpec& spec, const Vec& q, const ChiResult& chi) {
  const RBasis& rb = *chi.rho0.basis;
  const int d = spec.dim;
  const double lam = lambda_at(spec, q);
  std::vector<int> M(d);
  for (int a = 0; a < d; ++a) M[a] = 3 * rb.K(a) + 2 * spec.bandwidth(a) + 1;
  const long R = RBasis::grid_count(M);
  const Vec rho = rb.on_grid(M, chi.rho0.coef);
  std::vector<Vec> dchi(d * d);  // l*d + a: d chi_l / d r_a
  for (int l = 0; l < d; ++l)
    for (int a = 0; a < d; ++a)
      dchi[l * d + a] = rb.K(a) > 0 ? rb.on_grid(M, rb.deriv(a) * chi.chi[l].coef) : Vec::Zero(R);

  Vec r = Vec::Zero(d);
  Mat Q = Mat::Zero(d, d);
  Mat J(d, d);
  for (long x = 0; x < R; ++x) {
    const CoeffValues cv = eval_coefficients(spec, q, rb.grid_point(M, x));
    for (int l = 0; l < d; ++l)
      for (int a = 0; a < d; ++a) J(l, a) = (l == a ? 1.0 : 0.0) + dchi[l * d + a](x);
    r += rho(x) * (J * cv.c);
    Q += rho(x) * (J * cv.alpha * J.transpose());
  }
  return finalize(r / (lam * R), Q / (lam * lam * R), "Q_0");
}

Coeffs coeffs_0(const ProblemSpec& spec, const Vec& q, std::shared_ptr<const RBasis> rb) {
  return coeffs_from_chi(spec, q, solve_chi(spec, q, std::move(rb)));
}

MassSweep mass_sweep(const ProblemSpec& spec, const Vec& q, const std::vector<double>& m_list, int N, int K,
                     bool recalibrate, int jobs) {
  BasisPtr basis = basis_for(spec, N, K);
  MassSweep out;
  out.q = q;
  out.at_0 = coeffs_0(spec, q, basis->r_ptr());
  out.rows.resize(m_list.size());
  parallel_for(m_list.size(), jobs, [&](std::size_t i) {
    const double m = m_list[i];
    ProblemSpec sm = spec;
    if (recalibrate && spec.has_free_offset()) {
      CenteringOptions co;
      co.target = CenteringTarget::hypoelliptic;
      co.hermite_N = N;
      co.fourier_K = K;
      co.mass = m;
      co.tol = 1e-12;
      sm = calibrate_centering(spec, q, co).spec;
    }
    MassSweepRow& row = out.rows[i];
    row.m = m;
    row.at_m = coeffs_m(sm, q, m, basis);
    row.diff_r = max_abs(Vec(row.at_m.r - out.at_0.r));
    row.diff_Q = max_abs(Mat(row.at_m.Q - out.at_0.Q));
    row.offset.resize(spec.dim);
    for (int l = 0; l < spec.dim; ++l) row.offset(l) = sm.b_offset[l];
  });
  std::vector<double> xs, yr, yQ;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    const auto& row = out.rows[i];
    xs.push_back(row.m);
    yr.push_back(std::max(row.diff_r, 1e-300));
    yQ.push_back(std::max(row.diff_Q, 1e-300));
    if (i > 0) {
      if (!(row.diff_r < out.rows[i - 1].diff_r)) out.monotone_r = false;
      if (!(row.diff_Q < out.rows[i - 1].diff_Q)) out.monotone_Q = false;
    }
  }
  out.slope_r = fit_loglog_slope(xs, yr);
  out.slope_Q = fit_loglog_slope(xs, yQ);
  return out;
}

Coeffs CoeffTable::interpolate(const Vec& q, bool limit) const {
  const auto& tab = limit ? at_0 : at_m;
  if (tab.empty()) throw ParameterError("ldp", "empty coefficient table");
  if (tab.size() == 1) return tab[0];
  std::vector<std::size_t> order(q_grid.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto i, auto j) { return q_grid[i](0) < q_grid[j](0); });
  const double x = q(0), lo = q_grid[order.front()](0), hi = q_grid[order.back()](0);
  const double slack = 1e-12 * std::max(1.0, hi - lo);
  if (x < lo - slack || x > hi + slack) {
    std::ostringstream os;
    os << "q = " << x << " outside the coefficient grid [" << lo << ", " << hi << "]";
    throw ExtrapolationError("ldp", os.str());
  }
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const double x0 = q_grid[order[k]](0), x1 = q_grid[order[k + 1]](0);
    if (x <= x1 + slack || k + 2 == order.size()) {
      const double t = x1 > x0 ? std::clamp((x - x0) / (x1 - x0), 0.0, 1.0) : 0.0;
      const Coeffs& A = tab[order[k]];
      const Coeffs& B = tab[order[k + 1]];
      Coeffs c;
      c.r = (1 - t) * A.r + t * B.r;
      c.Q = (1 - t) * A.Q + t * B.Q;
      c.asymmetry = std::max(A.asymmetry, B.asymmetry);
      c.min_eig = Eigen::SelfAdjointEigenSolver<Mat>(c.Q, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
      return c;
    }
  }
  return tab[order.back()];
}

CoeffTable coeff_table(const ProblemSpec& spec, double m, int N, int K, bool recalibrate, int jobs) {
  CoeffTable t;
  t.m = m;
  t.q_grid = spec.q_grid.empty() ? std::vector<Vec>{spec.q0} : spec.q_grid;
  t.at_m.resize(t.q_grid.size());
  t.at_0.resize(t.q_grid.size());
  BasisPtr basis = basis_for(spec, N, K);
  parallel_for(t.q_grid.size(), jobs, [&](std::size_t i) {
    const Vec& q = t.q_grid[i];
    ProblemSpec s0 = spec, sm = spec;
    if (spec.has_free_offset()) {
      CenteringOptions co;
      co.fourier_K = K;
      co.hermite_N = N;
      co.tol = 1e-12;
      s0 = sm = calibrate_centering(spec, q, co).spec;
      if (recalibrate) {
        co.target = CenteringTarget::hypoelliptic;
        co.mass = m;
        sm = calibrate_centering(s0, q, co).spec;
      }
    }
    t.at_0[i] = coeffs_0(s0, q, basis->r_ptr());
    t.at_m[i] = coeffs_m(sm, q, m, basis);
  });
  return t;
}

}  // namespace hypolab
