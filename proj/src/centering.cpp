#include "hypolab/centering.hpp"

#include "hypolab/stationary.hpp"

#include <cmath>
#include <sstream>

namespace hypolab {

namespace {

struct Residual {
  const ProblemSpec& base;
  const Vec& q;
  const CenteringOptions& opt;
  double mass;

  ProblemSpec with(const Vec& a) const {
    ProblemSpec s = base;
    for (int l = 0; l < s.dim; ++l) s.b_offset[l] = a(l);
    return s;
  }
  Vec rho0(const ProblemSpec& s) const {
    return centering_residual0(s, q, solve_rho0(s, q, rbasis_for(s, opt.fourier_K)));
  }
  Vec rho_m(const ProblemSpec& s) const {
    return centering_residual(s, q, solve_invariant(s, q, mass, basis_for(s, opt.hermite_N, opt.fourier_K)));
  }
  Vec operator()(const Vec& a) const {
    const ProblemSpec s = with(a);
    return opt.target == CenteringTarget::overdamped ? rho0(s) : rho_m(s);
  }
};

double max_free(const Vec& R, const std::vector<int>& free) {
  double m = 0;
  for (int l : free) m = std::max(m, std::abs(R(l)));
  return m;
}

}  // namespace

CenteringResult calibrate_centering(const ProblemSpec& spec, const Vec& q, const CenteringOptions& opt) {
  spec.validate();
  const double mass = opt.mass > 0 ? opt.mass : spec.mass;
  if (opt.target == CenteringTarget::hypoelliptic && spec.sigma_mode != SigmaMode::fluctuation_dissipation)
    throw CalibrationError("model", "hypoelliptic centering target needs fluctuation_dissipation mode");
  Residual res{spec, q, opt, mass};
  std::vector<int> free;
  for (int l = 0; l < spec.dim; ++l)
    if (spec.b_offset_free[l]) free.push_back(l);
  if (free.empty()) throw CalibrationError("model", "no free constant mode in b");
  const Vec bound = drift_sup_norm(spec, q);

  Vec a(spec.dim);
  for (int l = 0; l < spec.dim; ++l) a(l) = spec.b_offset[l];
  Vec R = res(a);
  int it = 0;

  if (max_free(R, free) > opt.tol && free.size() == 1) {
    // Illinois regula falsi on the bracket [-|b|_inf, |b|_inf]
    const int l = free[0];
    const double B = bound(l);
    auto f = [&](double x) {
      Vec t = a;
      t(l) = x;
      return res(t)(l);
    };
    double lo = -B, hi = B, flo = f(lo), fhi = f(hi);
    if (!(flo <= 0 && fhi >= 0) && !(flo >= 0 && fhi <= 0)) {
      std::ostringstream os;
      os << "root not bracketed within |a| <= " << B << " (R(-)=" << flo << ", R(+)=" << fhi << ")";
      throw CalibrationError("model", os.str());
    }
    int side = 0;
    double x = a(l), fx = R(l);
    for (it = 1; it <= opt.max_iter; ++it) {
      if (std::abs(flo) <= opt.tol) {
        x = lo;
        fx = flo;
        break;
      }
      if (std::abs(fhi) <= opt.tol) {
        x = hi;
        fx = fhi;
        break;
      }
      x = (lo * fhi - hi * flo) / (fhi - flo);
      fx = f(x);
      if (std::abs(fx) <= opt.tol) break;
      if ((fx < 0) == (flo < 0)) {
        lo = x;
        flo = fx;
        if (side == -1) fhi *= 0.5;
        side = -1;
      } else {
        hi = x;
        fhi = fx;
        if (side == 1) flo *= 0.5;
        side = 1;
      }
    }
    a(l) = x;
    R = res(a);
    if (std::abs(R(l)) > opt.tol) throw CalibrationError("model", "regula falsi did not converge");
  } else if (max_free(R, free) > opt.tol) {
    // Newton with a finite-difference Jacobian on the free components
    const int k = static_cast<int>(free.size());
    for (it = 1; it <= opt.max_iter && max_free(R, free) > opt.tol; ++it) {
      Mat J(k, k);
      for (int j = 0; j < k; ++j) {
        const double hstep = 1e-6 * std::max(1.0, bound(free[j]));
        Vec ap = a;
        ap(free[j]) += hstep;
        const Vec Rp = res(ap);
        for (int i = 0; i < k; ++i) J(i, j) = (Rp(free[i]) - R(free[i])) / hstep;
      }
      Vec rf(k);
      for (int i = 0; i < k; ++i) rf(i) = R(free[i]);
      const Vec step = J.fullPivLu().solve(rf);
      double t = 1.0;
      Vec an, Rn;
      for (int tries = 0; tries < 30; ++tries, t *= 0.5) {
        an = a;
        for (int i = 0; i < k; ++i) {
          const int l = free[i];
          an(l) = std::clamp(a(l) - t * step(i), -bound(l), bound(l));
        }
        Rn = res(an);
        if (max_free(Rn, free) < max_free(R, free)) break;
      }
      a = an;
      R = Rn;
    }
    if (max_free(R, free) > opt.tol) throw CalibrationError("model", "Newton iteration did not reach tol_center");
  }

  CenteringResult out;
  out.spec = res.with(a);
  out.offset = a;
  out.residual = R;
  out.iterations = it;
  out.residual_rho0 = res.rho0(out.spec);
  if (spec.sigma_mode == SigmaMode::fluctuation_dissipation) out.residual_rho_m = res.rho_m(out.spec);
  return out;
}

}  // namespace hypolab
