#include "hypolab/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hypolab {

void DiscretePath::validate() const {
  if (!(dt > 0) || !std::isfinite(dt)) throw ParameterError("ldp", "path time step must be positive");
  if (nodes.size() < 2) throw ParameterError("ldp", "path needs at least two nodes");
  for (const auto& x : nodes)
    if (!x.allFinite()) throw ParameterError("ldp", "path has non-finite values");
}

DiscretePath DiscretePath::sample(const std::function<Vec(double)>& phi, double T, int n) {
  if (n < 1) throw ParameterError("ldp", "path needs at least one interval");
  DiscretePath p;
  p.dt = T / n;
  for (int k = 0; k <= n; ++k) p.nodes.push_back(phi(T * k / n));
  return p;
}

double local_rate(const Vec& nu, const Coeffs& c) {
  Eigen::LLT<Mat> llt(c.Q);
  if (llt.info() != Eigen::Success) throw SolverError("ldp", "Q is singular or not positive definite");
  const Vec e = nu - c.r;
  return 0.5 * e.dot(llt.solve(e));
}

double action(const DiscretePath& path, const CoeffTable& table, ActionKind which) {
  path.validate();
  const bool limit = which == ActionKind::S_0;
  double s = 0;
  Coeffs left = table.interpolate(path.nodes[0], limit);
  for (std::size_t k = 0; k + 1 < path.nodes.size(); ++k) {
    const Coeffs right = table.interpolate(path.nodes[k + 1], limit);
    const Vec v = (path.nodes[k + 1] - path.nodes[k]) / path.dt;
    s += 0.5 * path.dt * (local_rate(v, left) + local_rate(v, right));
    left = right;
  }
  return s;
}

ControlField::ControlField(const ProblemSpec& spec, const Vec& q, const PhiResult& phi, const Coeffs& coeffs,
                           const Vec& nu)
    : spec_(spec), q_(q), nu_(nu), d_(spec.dim) {
  BasisPtr basis = phi.phi.basis;
  const TensorBasis& b = *basis;
  if (d_ > 2) throw ParameterError("ldp", "control field supports d <= 2");
  Eigen::LLT<Mat> llt(coeffs.Q);
  if (llt.info() != Eigen::Success) throw SolverError("ldp", "Q_m is singular or not positive definite");
  w_ = llt.solve(nu - coeffs.r);
  beta_ = b.beta();

  std::vector<Vec> C(d_, Vec::Zero(b.size()));
  for (int a = 0; a < d_; ++a) {
    const SpMat Dp = grad_p(basis, a).mat;
    for (int l = 0; l < d_; ++l) C[a] += w_(l) / std::sqrt(phi.m) * (Dp * phi.phi.comp[l]);
  }
  double scale = 0;
  for (const auto& c : C) scale = std::max(scale, c.cwiseAbs().maxCoeff());
  const double drop = 1e-14 * scale;
  const RBasis& rb = b.r();
  kmax_.assign(d_, 0);
  const int n1 = d_ == 2 ? rb.axis_size(1) : 1;
  for (long idx = 0; idx < b.size(); ++idx) {
    bool keep = false;
    for (int a = 0; a < d_; ++a) keep = keep || std::abs(C[a](idx)) > drop;
    if (!keep) continue;
    Term t;
    const long h = idx / b.F(), f = idx % b.F();
    t.n = b.hermite_index(h);
    t.f = d_ == 2 ? std::vector<int>{int(f / n1), int(f % n1)} : std::vector<int>{int(f)};
    for (int a = 0; a < 2; ++a) t.v[a] = a < d_ ? C[a](idx) : 0.0;
    for (int a = 0; a < d_; ++a) {
      nmax_ = std::max(nmax_, t.n[a]);
      kmax_[a] = std::max(kmax_[a], RBasis::wave(t.f[a]));
      if (t.f[a] != 0) r_free_ = false;
    }
    terms_.push_back(t);
  }
  zero_ = terms_.empty() || scale == 0.0;
  if (nmax_ >= 64 || *std::max_element(kmax_.begin(), kmax_.end()) > 64)
    throw SizeError("ldp", "control field evaluation supports Hermite degree < 64 and K <= 64");

  for (int a = 0; a < d_; ++a) sigma_constant_ = sigma_constant_ && spec.r_axis_inactive(a);
  if (spec.sigma_mode == SigmaMode::fluctuation_dissipation) sigma_constant_ = true;
  if (sigma_constant_) sigma_const_ = eval_coefficients(spec, q, Vec::Zero(d_)).sigma;
}

void ControlField::covector_into(const double* p, const double* r, double* out) const {
  for (int a = 0; a < d_; ++a) out[a] = 0.0;
  if (zero_) return;
  double H[2][64];
  double Fv[2][129];
  for (int a = 0; a < d_; ++a) {
    hermite::eval(nmax_ + 1, beta_, p[a], H[a]);
    RBasis::eval_axis(kmax_[a], r[a], Fv[a]);
  }
  for (const auto& t : terms_) {
    double basis_val = 1.0;
    for (int a = 0; a < d_; ++a) basis_val *= H[a][t.n[a]] * Fv[a][t.f[a]];
    for (int a = 0; a < d_; ++a) out[a] += t.v[a] * basis_val;
  }
}

void ControlField::eval_into(const double* p, const double* r, double* z) const {
  double c[2];
  covector_into(p, r, c);
  if (sigma_constant_) {
    for (int a = 0; a < d_; ++a) {
      z[a] = 0.0;
      for (int l = 0; l < d_; ++l) z[a] += sigma_const_(l, a) * c[l];
    }
    return;
  }
  Vec rv(d_);
  for (int a = 0; a < d_; ++a) rv(a) = r[a];
  const Mat sig = eval_coefficients(spec_, q_, rv).sigma;
  for (int a = 0; a < d_; ++a) {
    z[a] = 0.0;
    for (int l = 0; l < d_; ++l) z[a] += sig(l, a) * c[l];
  }
}

Vec ControlField::covector(const Vec& p, const Vec& r) const {
  Vec out(d_);
  covector_into(p.data(), r.data(), out.data());
  return out;
}

Vec ControlField::eval(const Vec& p, const Vec& r) const {
  Vec out(d_);
  eval_into(p.data(), r.data(), out.data());
  return out;
}

std::string ControlField::describe() const {
  std::ostringstream os;
  os.precision(10);
  os << "feedback nu=(";
  for (int a = 0; a < nu_.size(); ++a) os << (a ? "," : "") << nu_(a);
  os << ") Qinv(nu-r)=(";
  for (int a = 0; a < w_.size(); ++a) os << (a ? "," : "") << w_(a);
  os << ") terms=" << terms_.size();
  return os.str();
}

ControlIdentity control_identity(const ProblemSpec& spec, const Vec& q, const PhiResult& phi, const Coeffs& coeffs,
                                 const Vec& nu) {
  BasisPtr basis = phi.phi.basis;
  const int d = spec.dim;
  int extra = 0;
  for (int a = 0; a < d; ++a) extra = std::max(extra, 2 * spec.bandwidth(a));
  Collocation col(basis, extra);
  Eigen::LLT<Mat> llt(coeffs.Q);
  if (llt.info() != Eigen::Success) throw SolverError("ldp", "Q_m is singular or not positive definite");
  const Vec e = nu - coeffs.r;
  const Vec w = llt.solve(e);
  const Vec gv = col.values(phi.g.comp[0]);
  std::vector<Vec> dphi(d * d);
  for (int l = 0; l < d; ++l)
    for (int a = 0; a < d; ++a) dphi[l * d + a] = col.values_dp(phi.phi.comp[l], a);
  const long P = col.p_points(), R = col.r_points();
  std::vector<Mat> sig(R);
  for (long ir = 0; ir < R; ++ir) sig[ir] = eval_coefficients(spec, q, col.r_point(ir)).sigma;
  const double sm = std::sqrt(phi.m);
  double lhs = 0;
  Vec cv(d);
  for (long ip = 0; ip < P; ++ip)
    for (long ir = 0; ir < R; ++ir) {
      const long x = ip * R + ir;
      for (int a = 0; a < d; ++a) {
        cv(a) = 0;
        for (int l = 0; l < d; ++l) cv(a) += dphi[l * d + a](x) * w(l);
      }
      const Vec z = sig[ir].transpose() * cv / sm;
      lhs += col.weights()(x) * gv(x) * z.squaredNorm();
    }
  ControlIdentity out;
  out.lhs = lhs;
  out.rhs = e.dot(w);
  const double scale = std::max({std::abs(out.lhs), std::abs(out.rhs), 1e-300});
  out.rel = std::abs(out.lhs - out.rhs) / scale;
  return out;
}

}  // namespace hypolab
