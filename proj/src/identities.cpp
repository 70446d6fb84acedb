#include "hypolab/identities.hpp"

#include "hypolab/cell.hpp"
#include "hypolab/rng.hpp"

#include <algorithm>
#include <cmath>

namespace hypolab {

namespace {

double rel_residual(double lhs, double rhs, std::initializer_list<double> terms) {
  double scale = std::max(std::abs(lhs), std::abs(rhs));
  for (double t : terms) scale = std::max(scale, std::abs(t));
  return std::abs(lhs - rhs) / std::max(scale, 1e-300);
}

}  // namespace

Vec random_field(const TensorBasis& b, std::uint64_t seed, std::uint64_t index, int hermite_max, int fourier_max) {
  const NormalStream ns(seed, index, 2);
  const RBasis& rb = b.r();
  const int d = b.dim();
  Vec out = Vec::Zero(b.size());
  std::vector<int> fi(d);
  for (long h = 0; h < b.hermite_size(); ++h) {
    const auto n = b.hermite_index(h);
    if (*std::max_element(n.begin(), n.end()) >= hermite_max) continue;
    for (int f = 0; f < b.F(); ++f) {
      int rest = f, wave = 0;
      bool keep = true;
      for (int a = d - 1; a >= 0; --a) {
        fi[a] = rest % rb.axis_size(a);
        rest /= rb.axis_size(a);
        const int k = RBasis::wave(fi[a]);
        keep = keep && k <= fourier_max;
        wave += k;
      }
      if (!keep) continue;
      const long idx = h * b.F() + f;
      out(idx) = ns.at(std::uint64_t(idx)) * std::exp(-0.3 * (b.total_degree(h) + wave));
    }
  }
  return out;
}

std::vector<IdentityCheck> transport_identities(const ProblemSpec& spec, const Vec& q, const IdentitySuiteOptions& opt) {
  if (spec.sigma_mode != SigmaMode::fluctuation_dissipation)
    throw ParameterError("identities", "transport identities need the fluctuation-dissipation generator");
  const int d = spec.dim;
  BasisPtr basis = basis_for(spec, opt.hermite_N, opt.fourier_K);
  const TensorBasis& b = *basis;
  int bw = 0;
  for (int a = 0; a < d; ++a) bw = std::max(bw, spec.bandwidth(a));
  // Keep B f inside the truncation so the Galerkin matrices act exactly.
  const int hmax = std::max(1, opt.hermite_N / 2);
  const int fmax = std::max(0, std::min(opt.fourier_K / 2, opt.fourier_K - bw));

  const RField rho0 = solve_rho0(spec, q, basis->r_ptr());
  Collocation col(basis, 2 * bw + opt.fourier_K);
  const Vec rho = col.r_values([&](const Vec& r) { return rho0.eval(r); });
  Vec phrho = Vec::Zero(col.points());  // p . (rho0 h)
  std::vector<Vec> bv(d), pv(d);
  for (int a = 0; a < d; ++a) {
    const RField drho{rho0.basis, b.r().deriv_dense(a) * rho0.coef};
    const Vec w = col.r_values([&](const Vec& r) {
      return rho0.eval(r) * (spec.b[a].eval(q, r) + spec.b_offset[a]) / spec.beta - drho.eval(r);
    });
    pv[a] = col.p_coordinate(a);
    phrho.array() += pv[a].array() * w.array();
    bv[a] = col.r_values([&](const Vec& r) { return spec.b[a].eval(q, r) + spec.b_offset[a]; });
  }
  const Vec& wq = col.weights();
  auto ip = [&](const Vec& u, const Vec& v) { return (wq.array() * rho.array() * u.array() * v.array()).sum(); };
  auto B_pointwise = [&](const Vec& f) {
    Vec out = Vec::Zero(col.points());
    for (int a = 0; a < d; ++a) {
      if (b.r().K(a) > 0) out.array() += pv[a].array() * col.values_dr(f, a).array();
      out.array() += bv[a].array() * col.values_dp(f, a).array();
    }
    return out;
  };

  const SpMat L = assemble_generator(basis, spec, q, opt.m).mat;
  const SpMat B = assemble_B(basis, spec, q).mat;
  const double lam = lambda_at(spec, q), sm = std::sqrt(opt.m);

  std::vector<IdentityCheck> out;
  for (int i = 0; i < opt.n_fields; ++i) {
    const Vec f = random_field(b, opt.seed, 2 * std::uint64_t(i), hmax, fmax);
    const Vec g = random_field(b, opt.seed, 2 * std::uint64_t(i) + 1, hmax, fmax);
    const Vec fv = col.values(f), gv = col.values(g);
    const double hf2 = (wq.array() * phrho.array() * fv.array().square()).sum();

    double grad2 = 0;
    for (int a = 0; a < d; ++a) {
      const Vec dpf = col.values_dp(f, a);
      grad2 += ip(dpf, dpf);
    }
    {
      const double lhs = ip(col.values(L * f), fv);
      const double t1 = -lam * spec.beta / opt.m * grad2, t2 = hf2 / (2 * sm);
      out.push_back({"generator_energy", i, lhs, t1 + t2, rel_residual(lhs, t1 + t2, {t1, t2}), opt.tol_ibp});
    }
    {
      const double lhs = ip(col.values(B * f), gv);
      const double t1 = -ip(fv, B_pointwise(g));
      const double t2 = (wq.array() * phrho.array() * fv.array() * gv.array()).sum();
      out.push_back({"transport_adjoint", i, lhs, t1 + t2, rel_residual(lhs, t1 + t2, {t1, t2}), opt.tol_ibp});
    }
    {
      const double lhs = ip(fv, col.values(B * f));
      const double rhs = 0.5 * hf2;
      out.push_back({"transport_quadratic", i, lhs, rhs, rel_residual(lhs, rhs, {}), opt.tol_ibp});
    }
  }
  return out;
}

bool IdentitySuite::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.pass(); });
}

std::vector<std::pair<std::string, double>> IdentitySuite::worst() const {
  std::vector<std::pair<std::string, double>> w;
  for (const auto& c : checks) {
    auto it = std::find_if(w.begin(), w.end(), [&](const auto& x) { return x.first == c.name; });
    if (it == w.end())
      w.emplace_back(c.name, c.rel);
    else
      it->second = std::max(it->second, c.rel);
  }
  return w;
}

IdentitySuite identity_suite(const ProblemSpec& spec, const ProblemSpec& corrector_spec, const Vec& q,
                             const IdentitySuiteOptions& opt) {
  IdentitySuite suite;
  suite.checks = transport_identities(spec, q, opt);

  {
    BasisPtr basis = basis_for(spec, opt.hermite_N, opt.fourier_K);
    const DensitySet ds = solve_rho_m(spec, q, opt.m, basis);
    const auto [lhs, rhs] = gradient_identity(spec, q, ds);
    suite.checks.push_back({"density_gradient", 0, lhs, rhs, rel_residual(lhs, rhs, {}), opt.tol_density});
  }
  {
    const ProblemSpec& cs = corrector_spec;
    const Vec qc = Vec::Zero(cs.dim);
    BasisPtr basis = basis_for(cs, std::max(opt.hermite_N, 32), std::max(opt.fourier_K, 16));
    const ChiResult chi = solve_chi(cs, qc, basis->r_ptr());
    const PhiResult phi = solve_phi(cs, qc, opt.m, basis);
    const Expansion ex = expansion_terms(cs, qc, basis, chi);
    const Remainder rem = remainder_psi3(cs, qc, phi, ex, chi.rho0);
    for (int l = 0; l < cs.dim; ++l)
      suite.checks.push_back({"corrector_gradient", l, rem.identity_lhs(l), rem.identity_rhs(l), rem.identity_rel(l),
                              opt.tol_corrector});
  }
  return suite;
}

}  // namespace hypolab
