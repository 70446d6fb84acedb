#include "hypolab/cell.hpp"

#include "hypolab/centering.hpp"
#include "hypolab/linsolve.hpp"
#include "hypolab/parallel.hpp"
#include "hypolab/stationary.hpp"

#include <cmath>
#include <sstream>

namespace hypolab {

namespace {

double quad_form(const SpMat& G, const Vec& x) { return std::max(0.0, x.dot(G * x)); }

Vec embed0(const TensorBasis& b, const Vec& rcoef) {
  Vec v = Vec::Zero(b.size());
  v.head(b.F()) = rcoef;
  return v;
}

// Inverse of A on Hermite degrees >= 1; degree 0 mapped to 0.
Vec apply_A_inverse(const TensorBasis& b, const Vec& x) {
  Vec y = Vec::Zero(x.size());
  const long F = b.F();
  for (long h = 1; h < b.hermite_size(); ++h) y.segment(h * F, F) = -x.segment(h * F, F) / b.total_degree(h);
  return y;
}

}  // namespace

ChiResult solve_chi(const ProblemSpec& spec, const Vec& q, std::shared_ptr<const RBasis> rb, double solvability_tol) {
  ChiResult out;
  out.rho0 = solve_rho0(spec, q, rb);
  const Mat L0 = assemble_L0(*rb, spec, q);
  const long F = rb->size();
  const double lam = lambda_at(spec, q);
  Mat Bd = Mat::Zero(F + 1, F + 1);
  Bd.topLeftCorner(F, F) = L0;
  Bd.block(0, F, F, 1) = out.rho0.coef;
  Bd.block(F, 0, 1, F) = out.rho0.coef.transpose();
  const auto lu = Bd.fullPivLu();
  out.solvability.resize(spec.dim);
  for (int l = 0; l < spec.dim; ++l) {
    const Vec bc = project_series(*rb, spec.b[l], q, spec.b_offset[l]);
    out.solvability(l) = bc.dot(out.rho0.coef) / lam;
    if (std::abs(out.solvability(l)) > solvability_tol) {
      std::ostringstream os;
      os << "overdamped cell problem not solvable: centering residual int b_" << l << " rho0 = "
         << out.solvability(l) * lam;
      throw SolvabilityError("cell", os.str());
    }
    Vec rhs = Vec::Zero(F + 1);
    rhs.head(F) = -bc / lam;
    const Vec sol = lu.solve(rhs);
    out.chi.push_back({rb, sol.head(F)});
    out.residual = std::max(out.residual, (L0 * sol.head(F) + bc / lam).norm());
  }
  return out;
}

PhiResult solve_phi(const ProblemSpec& spec, const Vec& q, double m, BasisPtr basis, double solvability_tol) {
  const TensorBasis& b = *basis;
  const double lam = lambda_at(spec, q), sm = std::sqrt(m);
  PhiResult out;
  out.m = m;
  out.g = solve_invariant(spec, q, m, basis);
  const Vec& g = out.g.comp[0];
  const SpMat M = assemble_generator(basis, spec, q, m).mat;
  SparseLU lu(bordered(M, {g}, {g}));
  out.phi = SpectralField::zeros(basis, spec.dim);
  out.psi = SpectralField::zeros(basis, spec.dim);
  out.solvability.resize(spec.dim);
  const long D = b.size();
  for (int l = 0; l < spec.dim; ++l) {
    const Vec rhs = embed0(b, -project_series(b.r(), spec.b[l], q, spec.b_offset[l]) / lam);
    out.solvability(l) = -g.dot(rhs);
    if (std::abs(out.solvability(l)) > solvability_tol) {
      std::ostringstream os;
      os << "hypoelliptic cell problem not solvable at m = " << m << ": int b_" << l
         << " rho^m = " << out.solvability(l) * lam << " (calibrate centering for this m)";
      throw SolvabilityError("cell", os.str());
    }
    Vec full = Vec::Zero(D + 1);
    full.head(D) = rhs;
    const Vec psi = lu.solve(full).head(D);
    const double rn = rhs.norm();
    out.residual = std::max(out.residual, (M * psi - rhs).norm() / (rn > 0 ? rn : 1.0));
    out.psi.comp[l] = psi;
    Vec phi = psi;
    phi(b.p_index(l)) += sm / lam * std::sqrt(b.beta());
    phi(0) -= g.dot(phi) / g(0);
    out.phi.comp[l] = phi;
  }
  return out;
}

SpectralField scaled_grad_p(const PhiResult& phi) {
  const int d = phi.phi.basis->dim();
  SpectralField out = SpectralField::zeros(phi.phi.basis, d * d);
  for (int a = 0; a < d; ++a) {
    const SpMat Dp = grad_p(phi.phi.basis, a).mat;
    for (int l = 0; l < d; ++l) out.comp[l * d + a] = Dp * phi.phi.comp[l] / std::sqrt(phi.m);
  }
  return out;
}

SpectralField embed_chi(BasisPtr basis, const ChiResult& chi) {
  std::vector<Vec> rc;
  for (const auto& c : chi.chi) rc.push_back(c.coef);
  return SpectralField::from_r(basis, rc);
}

Expansion expansion_terms(const ProblemSpec& spec, const Vec& q, BasisPtr basis, const ChiResult& chi,
                          double mismatch_tol) {
  const TensorBasis& b = *basis;
  const RBasis& rb = b.r();
  const int d = spec.dim;
  const double lam = lambda_at(spec, q), sb = std::sqrt(b.beta());
  const SpMat A = assemble_A(basis).mat;
  const SpMat B = assemble_B(basis, spec, q).mat;

  Expansion ex;
  ex.psi0 = embed_chi(basis, chi);
  ex.psi1 = SpectralField::zeros(basis, d);
  ex.psi2 = SpectralField::zeros(basis, d);

  Mat Bd;
  Eigen::FullPivLU<Mat> lu;
  const long F = rb.size();
  const Mat L0 = assemble_L0(rb, spec, q);
  Bd = Mat::Zero(F + 1, F + 1);
  Bd.topLeftCorner(F, F) = L0;
  Bd.block(0, F, F, 1) = chi.rho0.coef;
  Bd.block(F, 0, 1, F) = chi.rho0.coef.transpose();
  lu.compute(Bd);

  for (int l = 0; l < d; ++l) {
    Vec& p1 = ex.psi1.comp[l];
    for (int a = 0; a < d; ++a) {
      if (rb.K(a) == 0) continue;
      p1.segment(b.p_index(a), F) += sb / lam * (rb.deriv(a) * chi.chi[l].coef);
    }
    ex.first_order_residual = std::max(ex.first_order_residual, (B * ex.psi0.comp[l] + lam * (A * p1)).norm());

    const Vec bc = embed0(b, project_series(rb, spec.b[l], q, spec.b_offset[l]));
    const Vec w = -bc / lam - B * p1;
    const double mis = w.head(F).norm();
    ex.degree0_mismatch = std::max(ex.degree0_mismatch, mis);
    if (mis > mismatch_tol * std::max(1.0, bc.norm()))
      throw ConsistencyError("cell", "second-order expansion inconsistent: centering/chi mismatch " +
                                         std::to_string(mis));
    Vec p2 = apply_A_inverse(b, w) / lam;
    // gauge: degree-0 part from solvability at the next order
    const Vec t = B * apply_A_inverse(b, B * p2);
    Vec rhs = Vec::Zero(F + 1);
    rhs.head(F) = t.head(F) / lam;
    const Vec sol = lu.solve(rhs);
    p2.head(F) = sol.head(F);
    ex.gauge_multiplier = std::max(ex.gauge_multiplier, std::abs(sol(F)));
    ex.psi2.comp[l] = p2;
  }
  return ex;
}

Remainder remainder_psi3(const ProblemSpec& spec, const Vec& q, const PhiResult& phi, const Expansion& ex,
                         const RField& rho0, double route_tol) {
  BasisPtr basis = phi.psi.basis;
  const TensorBasis& b = *basis;
  const int d = spec.dim;
  const double m = phi.m, sm = std::sqrt(m), lam = lambda_at(spec, q);
  const long D = b.size();
  const Vec& g = phi.g.comp[0];
  const SpMat M = assemble_generator(basis, spec, q, m).mat;
  const SpMat B = assemble_B(basis, spec, q).mat;
  const SpMat G = gram(basis, rho0);
  SparseLU lu(bordered(M, {g}, {g}));
  Collocation col(basis);
  const Vec gv = col.values(g);

  Remainder out;
  out.psi3_sub = SpectralField::zeros(basis, d);
  out.psi3_direct = SpectralField::zeros(basis, d);
  out.norm_L2_rho0.resize(d);
  out.grad_norm_rho_m.resize(d);
  out.identity_lhs.resize(d);
  out.identity_rhs.resize(d);
  out.identity_rel.resize(d);
  out.half_constant_ratio.resize(d);
  for (int l = 0; l < d; ++l) {
    const Vec expansion = ex.psi0.comp[l] + sm * ex.psi1.comp[l] + m * ex.psi2.comp[l];
    const Vec sub = phi.psi.comp[l] - expansion;
    out.psi3_sub.comp[l] = sub;
    const Vec BPsi2 = B * ex.psi2.comp[l];
    Vec full = Vec::Zero(D + 1);
    full.head(D) = -sm * BPsi2;
    full(D) = -g.dot(expansion);
    const Vec direct = lu.solve(full).head(D);
    out.psi3_direct.comp[l] = direct;
    out.route_agreement = std::max(out.route_agreement, std::sqrt(quad_form(G, sub - direct)));
    out.expansion_consistency =
        std::max(out.expansion_consistency, std::abs(std::sqrt(quad_form(G, phi.psi.comp[l] - expansion)) -
                                                     std::sqrt(quad_form(G, sub))));
    out.norm_L2_rho0(l) = std::sqrt(quad_form(G, sub));

    double lhs = 0;
    for (int a = 0; a < d; ++a) {
      const Vec v = col.values_dp(sub, a);
      lhs += col.integrate((v.array().square() * gv.array()).matrix()) / m;
    }
    const double inner = col.integrate((col.values(BPsi2).array() * col.values(sub).array() * gv.array()).matrix());
    out.grad_norm_rho_m(l) = std::sqrt(std::max(0.0, lhs));
    out.identity_lhs(l) = lhs;
    out.identity_rhs(l) = sm / (lam * spec.beta) * inner;
    const double scale = std::max({std::abs(lhs), std::abs(out.identity_rhs(l)), 1e-300});
    out.identity_rel(l) = std::abs(lhs - out.identity_rhs(l)) / scale;
    out.half_constant_ratio(l) = inner != 0.0 ? lhs / (0.5 * sm * inner) : 0.0;
    out.mean_rho_m = std::max(out.mean_rho_m, std::abs(g.dot(sub)));
  }
  if (out.route_agreement > route_tol)
    throw TruncationError("cell", "Psi3 subtraction and direct routes disagree by " +
                                      std::to_string(out.route_agreement));
  return out;
}

double cell_metric(const ProblemSpec& spec, const Vec& q, const PhiResult& phi, const ChiResult& chi) {
  BasisPtr basis = phi.phi.basis;
  const TensorBasis& b = *basis;
  const int d = spec.dim;
  const double lam = lambda_at(spec, q);
  const SpMat G = gram(basis, chi.rho0);
  const SpectralField gp = scaled_grad_p(phi);
  double s = 0;
  for (int l = 0; l < d; ++l)
    for (int a = 0; a < d; ++a) {
      Vec target = Vec::Zero(b.F());
      if (b.r().K(a) > 0) target = b.r().deriv(a) * chi.chi[l].coef;
      if (a == l) target(0) += 1.0;
      s += quad_form(G, gp.comp[l * d + a] - embed0(b, target / lam));
    }
  return std::sqrt(s);
}

std::vector<CellMetricRow> cell_convergence_metric(const ProblemSpec& spec, const Vec& q,
                                                   const std::vector<double>& m_list, int N, int K,
                                                   bool recalibrate, int jobs) {
  BasisPtr basis = basis_for(spec, N, K);
  const ChiResult chi = solve_chi(spec, q, basis->r_ptr());
  std::vector<CellMetricRow> rows(m_list.size());
  parallel_for(m_list.size(), jobs, [&](std::size_t i) {
    const double m = m_list[i];
    ProblemSpec sm = spec;
    if (recalibrate) {
      CenteringOptions co;
      co.target = CenteringTarget::hypoelliptic;
      co.hermite_N = N;
      co.fourier_K = K;
      co.mass = m;
      co.tol = 1e-12;
      sm = calibrate_centering(spec, q, co).spec;
    }
    const PhiResult phi = solve_phi(sm, q, m, basis);
    Vec off(spec.dim);
    for (int l = 0; l < spec.dim; ++l) off(l) = sm.b_offset[l];
    rows[i] = {m, cell_metric(sm, q, phi, chi), off, phi.solvability * lambda_at(sm, q)};
  });
  return rows;
}

std::vector<Psi3Row> psi3_sweep(const ProblemSpec& spec, const Vec& q, const std::vector<double>& m_list, int N,
                                int K, int jobs) {
  BasisPtr basis = basis_for(spec, N, K);
  const ChiResult chi = solve_chi(spec, q, basis->r_ptr());
  const Expansion ex = expansion_terms(spec, q, basis, chi);
  std::vector<Psi3Row> rows(m_list.size());
  parallel_for(m_list.size(), jobs, [&](std::size_t i) {
    const PhiResult phi = solve_phi(spec, q, m_list[i], basis);
    const Remainder rem = remainder_psi3(spec, q, phi, ex, chi.rho0);
    rows[i] = {m_list[i],
               rem.norm_L2_rho0.maxCoeff(),
               rem.grad_norm_rho_m.maxCoeff(),
               rem.route_agreement,
               rem.identity_rel.maxCoeff(),
               rem.half_constant_ratio(0)};
  });
  return rows;
}

}  // namespace hypolab
