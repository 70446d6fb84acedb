#include "hypolab/stationary.hpp"

#include "hypolab/linsolve.hpp"
#include "hypolab/parallel.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace hypolab {

namespace {

Vec b_coefficients(const RBasis& rb, const ProblemSpec& spec, const Vec& q, int l) {
  return project_series(rb, spec.b[l], q, spec.b_offset[l]);
}

// Solves (I (x) M) x = y block by block.
Vec block_solve(const TensorBasis& b, const Eigen::LLT<Mat>& llt, const Vec& y) {
  Vec x(y.size());
  const long F = b.F();
  for (long h = 0; h < b.hermite_size(); ++h) x.segment(h * F, F) = llt.solve(y.segment(h * F, F));
  return x;
}

double quad_form(const SpMat& G, const Vec& x) { return x.dot(G * x); }

void require_fd(const ProblemSpec& spec) {
  if (spec.sigma_mode != SigmaMode::fluctuation_dissipation)
    throw ParameterError("stationary", "small-mass density solves require fluctuation_dissipation mode");
}

}  // namespace

RField solve_rho0(const ProblemSpec& spec, const Vec& q, std::shared_ptr<const RBasis> rb, Rho0Info* info) {
  const Mat L0 = assemble_L0(*rb, spec, q);
  const long F = rb->size();
  const Mat Lt = L0.transpose();

  Eigen::BDCSVD<Mat> svd(Lt);
  const Vec s = svd.singularValues();
  if (F > 1 && s(F - 2) <= 1e-10 * std::max(1.0, s(0)))
    throw SolverError("stationary", "null space of the overdamped generator is not one-dimensional");

  Mat Bd = Mat::Zero(F + 1, F + 1);
  Bd.topLeftCorner(F, F) = Lt;
  Bd(0, F) = 1.0;
  Bd(F, 0) = 1.0;
  Vec rhs = Vec::Zero(F + 1);
  rhs(F) = 1.0;
  const Vec sol = Bd.fullPivLu().solve(rhs);
  RField rho{rb, sol.head(F)};

  const double res = (Lt * rho.coef).norm();
  std::vector<int> fine(rb->dim());
  for (int a = 0; a < rb->dim(); ++a) fine[a] = 2 * rb->K(a) + 8;
  const double mn = rb->on_grid(rb->grid_for(fine), rho.coef).minCoeff();
  if (info) *info = {res, mn};
  if (res > 1e-10 * std::max(1.0, L0.cwiseAbs().maxCoeff()))
    throw SolverError("stationary", "rho0 residual " + std::to_string(res) + " above tolerance");
  if (!(mn > 0)) throw SolverError("stationary", "rho0 is not strictly positive on the collocation grid");
  return rho;
}

std::vector<RField> defect_field(const ProblemSpec& spec, const Vec& q, const RField& rho0, double rho_floor) {
  const RBasis& rb = *rho0.basis;
  std::vector<int> bw(rb.dim());
  for (int a = 0; a < rb.dim(); ++a) bw[a] = rb.K(a) + spec.bandwidth(a);
  const auto M = rb.grid_for(bw);
  std::vector<RField> h;
  for (int a = 0; a < spec.dim; ++a) {
    RField drho{rho0.basis, rb.deriv_dense(a) * rho0.coef};
    const Vec rv = rb.on_grid(M, rho0.coef), dv = rb.on_grid(M, drho.coef);
    Vec vals(rv.size());
    for (long i = 0; i < rv.size(); ++i) {
      const Vec r = rb.grid_point(M, i);
      vals(i) = (spec.b[a].eval(q, r) + spec.b_offset[a]) / spec.beta - dv(i) / std::max(rv(i), rho_floor);
    }
    h.push_back({rho0.basis, rb.project(M, vals)});
  }
  return h;
}

Vec centering_residual(const ProblemSpec& spec, const Vec& q, const SpectralField& g) {
  const TensorBasis& b = *g.basis;
  Vec out(spec.dim);
  const Vec g0 = hermite_block0(b, g.comp[0]);
  for (int l = 0; l < spec.dim; ++l) out(l) = b_coefficients(b.r(), spec, q, l).dot(g0);
  return out;
}

Vec centering_residual0(const ProblemSpec& spec, const Vec& q, const RField& rho0) {
  Vec out(spec.dim);
  for (int l = 0; l < spec.dim; ++l) out(l) = b_coefficients(*rho0.basis, spec, q, l).dot(rho0.coef);
  return out;
}

SpectralField solve_invariant(const ProblemSpec& spec, const Vec& q, double m, BasisPtr basis, double* residual) {
  const SpMat Lt = SpMat(assemble_generator(basis, spec, q, m).mat.transpose());
  const long D = basis->size();
  Vec e0 = Vec::Zero(D);
  e0(0) = 1.0;
  Vec mu;
  Vec g = solve_bordered(Lt, {e0}, {e0}, Vec::Zero(D), Vec::Ones(1), &mu);
  if (residual) *residual = (Lt * g).norm();
  SpectralField f = SpectralField::zeros(basis);
  f.comp[0] = g;
  return f;
}

DensitySet solve_rho_m(const ProblemSpec& spec, const Vec& q, double m, BasisPtr basis,
                       const StationaryOptions& opt) {
  require_fd(spec);
  const TensorBasis& b = *basis;
  DensitySet ds;
  ds.basis = basis;
  ds.m = m;
  ds.rho0 = solve_rho0(spec, q, b.r_ptr());
  ds.h = defect_field(spec, q, ds.rho0);
  const long D = b.size();

  const SpMat G = gram(basis, ds.rho0);
  const Mat Mrho = r_galerkin(b.r(), [](const Vec&) { return 1.0; }, {}, &ds.rho0);
  Eigen::LLT<Mat> llt(Mrho);
  if (llt.info() != Eigen::Success) throw SolverError("stationary", "rho0 Gram matrix not positive definite");
  Vec e0 = Vec::Zero(D);
  e0(0) = 1.0;

  // Route 1: plain Galerkin null vector of (L^m)^T, then divide by rho0 in the weighted sense.
  ds.g = solve_invariant(spec, q, m, basis, &ds.nullspace_residual);
  ds.rho_m_tilde = SpectralField::zeros(basis);
  ds.rho_m_tilde.comp[0] = block_solve(b, llt, ds.g.comp[0]);
  ds.delta_m_route1 = SpectralField::zeros(basis);
  ds.delta_m_route1.comp[0] = ds.rho_m_tilde.comp[0] - e0;

  // Route 2: rho0-weighted Galerkin of the delta equation with <1, delta>_{rho0} = 0 appended.
  ds.delta_m = SpectralField::zeros(basis);
  if (opt.both_routes) {
    const double lam = lambda_at(spec, q), sm = std::sqrt(m);
    const SpMat H = mult_h_p(basis, spec, q, ds.rho0).mat;
    const SpMat T = lam * assemble_A(basis, &ds.rho0).mat - sm * assemble_B(basis, spec, q, &ds.rho0).mat + sm * H;
    const Vec rhs = -sm * (H * e0);
    const Vec c = G * e0;
    Vec mu;
    ds.delta_m.comp[0] = solve_bordered(T, {c}, {c}, rhs, Vec::Zero(1), &mu);
    ds.route2_multiplier = mu(0);
    const Vec diff = ds.delta_m.comp[0] - ds.delta_m_route1.comp[0];
    ds.route_agreement = std::sqrt(std::max(0.0, quad_form(G, diff)));
    if (ds.route_agreement > opt.route_fail)
      throw ConsistencyError("stationary", "delta^m routes disagree by " + std::to_string(ds.route_agreement) +
                                               " (raise the truncation)");
  } else {
    ds.delta_m.comp[0] = ds.delta_m_route1.comp[0];
  }

  const Vec& dm = ds.delta_m.comp[0];
  ds.zero_mean = (G * e0).dot(dm);
  double gp = 0, gr = 0;
  for (int a = 0; a < b.dim(); ++a) {
    gp += quad_form(G, grad_p(basis, a).mat * dm);
    if (b.r().K(a) > 0) gr += quad_form(G, grad_r(basis, a).mat * dm);
  }
  const double l2 = std::max(0.0, quad_form(G, dm));
  ds.norms = {std::sqrt(l2), std::sqrt(l2 + gp + gr), std::sqrt(gp), std::sqrt(gr)};
  ds.centering_residual_m = centering_residual(spec, q, ds.g);
  return ds;
}

std::pair<double, double> gradient_identity(const ProblemSpec& spec, const Vec& q, const DensitySet& dens) {
  const TensorBasis& b = *dens.basis;
  int extra = 0;
  for (int a = 0; a < b.dim(); ++a) extra = std::max(extra, spec.bandwidth(a));
  Collocation col(dens.basis, extra, 0);
  const Vec rho = col.r_values([&](const Vec& r) { return dens.rho0.eval(r); });
  const Vec& dm = dens.delta_m.comp[0];
  const Vec dv = col.values(dm);
  // p . (rho0 h) = sum_a p_a (rho0 b_a / beta - d_a rho0), no division by rho0
  Vec phrho = Vec::Zero(col.points());
  for (int a = 0; a < b.dim(); ++a) {
    const RField drho{dens.rho0.basis, b.r().deriv_dense(a) * dens.rho0.coef};
    const Vec w = col.r_values([&](const Vec& r) {
      return dens.rho0.eval(r) * (spec.b[a].eval(q, r) + spec.b_offset[a]) / spec.beta - drho.eval(r);
    });
    phrho.array() += col.p_coordinate(a).array() * w.array();
  }
  double gp2 = 0;
  for (int a = 0; a < b.dim(); ++a) {
    const Vec g = col.values_dp(dm, a);
    gp2 += col.integrate((g.array().square() * rho.array()).matrix());
  }
  const double lam = lambda_at(spec, q), sm = std::sqrt(dens.m);
  const double lhs = lam * spec.beta * gp2;
  const double rhs = 0.5 * sm * col.integrate((phrho.array() * dv.array().square()).matrix()) +
                     sm * col.integrate((phrho.array() * dv.array()).matrix());
  return {lhs, rhs};
}

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return 0.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

HypoSweep hypocoercivity_sweep(const ProblemSpec& spec, const Vec& q, const std::vector<double>& m_list,
                               BasisPtr basis, const StationaryOptions& opt, int jobs) {
  for (std::size_t i = 1; i < m_list.size(); ++i)
    if (!(m_list[i] < m_list[i - 1])) throw ParameterError("stationary", "m-list must be strictly descending");
  std::vector<HypoRow> rows(m_list.size());
  parallel_for(m_list.size(), jobs, [&](std::size_t i) {
    const DensitySet ds = solve_rho_m(spec, q, m_list[i], basis, opt);
    const auto [lhs, rhs] = gradient_identity(spec, q, ds);
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-18});
    rows[i] = {m_list[i], ds.norms, 0.0, std::abs(lhs - rhs) / scale, ds.route_agreement, ds.zero_mean};
  });

  HypoSweep out;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    xs.push_back(rows[i].m);
    ys.push_back(std::max(rows[i].norms.L2, 1e-300));
    rows[i].slope_so_far = fit_loglog_slope(xs, ys);
    if (i > 0 && !(rows[i].norms.L2 < rows[i - 1].norms.L2)) out.monotone = false;
  }
  out.slope = fit_loglog_slope(xs, ys);
  out.rows = std::move(rows);
  return out;
}

double spectral_gap(const ProblemSpec& spec, const Vec& q, BasisPtr basis) {
  const Mat L = Mat(assemble_generator(basis, spec, q, 1.0).mat);
  Eigen::EigenSolver<Mat> es(L, false);
  if (es.info() != Eigen::Success) throw SolverError("stationary", "eigensolver did not converge");
  const Eigen::VectorXcd mu = es.eigenvalues();
  long izero = 0;
  for (long i = 1; i < mu.size(); ++i)
    if (std::abs(mu(i)) < std::abs(mu(izero))) izero = i;
  double best = -std::numeric_limits<double>::infinity();
  for (long i = 0; i < mu.size(); ++i)
    if (i != izero) best = std::max(best, mu(i).real());
  return -best;
}

}  // namespace hypolab
