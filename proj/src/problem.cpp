#include "hypolab/problem.hpp"

#include "hypolab/spectral.hpp"
#include "hypolab/stationary.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hypolab {

namespace {

FourierTerm term(std::vector<int> k, double ca, double sa) {
  return {std::move(k), Profile::constant(ca), Profile::constant(sa)};
}

void check_series(const Series& s, int dim, const std::string& what) {
  for (const auto& t : s.terms)
    if (static_cast<int>(t.k.size()) != dim)
      throw ParameterError("model", what + ": wave vector length does not match dimension");
}

Vec wrap(const Vec& r) {
  Vec out = r;
  for (long i = 0; i < r.size(); ++i) out(i) = r(i) - std::floor(r(i));
  return out;
}

}  // namespace

void ProblemSpec::validate() const {
  if (dim < 1 || dim > 2) throw ParameterError("model", "dimension must be 1 or 2");
  if (static_cast<int>(b.size()) != dim || static_cast<int>(c.size()) != dim)
    throw ParameterError("model", "b and c need one series per component");
  if (static_cast<int>(b_offset.size()) != dim || static_cast<int>(b_offset_free.size()) != dim)
    throw ParameterError("model", "b offsets need one entry per component");
  for (int l = 0; l < dim; ++l) {
    check_series(b[l], dim, "b");
    check_series(c[l], dim, "c");
  }
  if (sigma_mode == SigmaMode::general_matrix) {
    if (static_cast<int>(sigma.size()) != dim * dim) throw ParameterError("model", "sigma needs dim*dim series");
    for (const auto& s : sigma) check_series(s, dim, "sigma");
  }
  if (!(lambda_lo > 0) || !(lambda_hi >= lambda_lo))
    throw ParameterError("model", "lambda bounds must satisfy 0 < lambda_lo <= lambda_hi");
  if (!(beta > 0)) throw ParameterError("model", "beta must be positive");
  if (!(eps > 0) || !(delta > 0) || !(mass > 0)) throw ParameterError("model", "eps, delta and mass must be positive");
  if (q0.size() != dim) throw ParameterError("model", "q0 has the wrong length");
  if (p0 && p0->size() != dim) throw ParameterError("model", "p0 has the wrong length");
  for (const auto& q : q_grid)
    if (q.size() != dim) throw ParameterError("model", "q-grid point has the wrong length");
}

bool ProblemSpec::has_free_offset() const {
  return std::any_of(b_offset_free.begin(), b_offset_free.end(), [](bool f) { return f; });
}

int ProblemSpec::bandwidth(int axis) const {
  int bw = 0;
  for (const auto& s : b) bw = std::max(bw, s.bandwidth(axis));
  for (const auto& s : c) bw = std::max(bw, s.bandwidth(axis));
  if (sigma_mode == SigmaMode::general_matrix)
    for (const auto& s : sigma) bw = std::max(bw, s.bandwidth(axis));
  return bw;
}

bool ProblemSpec::r_axis_inactive(int axis) const { return bandwidth(axis) == 0; }

double lambda_at(const ProblemSpec& spec, const Vec& q) { return spec.lambda(q); }

CoeffValues eval_coefficients(const ProblemSpec& spec, const Vec& q, const Vec& r_in) {
  const Vec r = wrap(r_in);
  const int d = spec.dim;
  CoeffValues v;
  v.b.resize(d);
  v.c.resize(d);
  for (int l = 0; l < d; ++l) {
    v.b(l) = spec.b[l].eval(q, r) + spec.b_offset[l];
    v.c(l) = spec.c[l].eval(q, r);
  }
  v.lambda = spec.lambda(q);
  v.grad_lambda = spec.lambda.gradient(q);
  if (spec.sigma_mode == SigmaMode::fluctuation_dissipation) {
    if (!(v.lambda > 0)) throw ParameterError("model", "lambda(q) must be positive");
    v.sigma = std::sqrt(2.0 * spec.beta * v.lambda) * Mat::Identity(d, d);
  } else {
    v.sigma.resize(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) v.sigma(i, j) = spec.sigma[i * d + j].eval(q, r);
  }
  v.alpha = v.sigma * v.sigma.transpose();
  return v;
}

PresetName parse_preset(const std::string& name) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '-', '_');
  if (s == "constant_coeff") return PresetName::constant_coeff;
  if (s == "gradient_drift") return PresetName::gradient_drift;
  if (s == "tilted_nongradient") return PresetName::tilted_nongradient;
  throw ConfigError("model", "unknown preset '" + name + "'");
}

std::string preset_name(PresetName p) {
  switch (p) {
    case PresetName::constant_coeff:
      return "constant_coeff";
    case PresetName::gradient_drift:
      return "gradient_drift";
    case PresetName::tilted_nongradient:
      return "tilted_nongradient";
  }
  return "custom";
}

ProblemSpec make_preset(PresetName p) {
  ProblemSpec s;
  s.name = preset_name(p);
  switch (p) {
    case PresetName::constant_coeff:
      s.dim = 1;
      s.b = {Series{}};
      s.c = {Series{{term({0}, 1.0, 0.0)}}};
      break;
    case PresetName::gradient_drift:
      // b = -V' with V = cos(2 pi r)
      s.dim = 1;
      s.b = {Series{{term({1}, 0.0, kTwoPi)}}};
      s.c = {Series{{term({0}, 1.0, 0.0)}}};
      break;
    case PresetName::tilted_nongradient:
      // b1 = -V'(r1), b2 = sin(2 pi r1) + 0.3 sin^2(2 pi r1) + a; nothing depends on r2
      s.dim = 2;
      s.b = {Series{{term({1, 0}, 0.0, kTwoPi)}},
             Series{{term({1, 0}, 0.0, 1.0), term({0, 0}, 0.15, 0.0), term({2, 0}, -0.15, 0.0)}}};
      s.c = {Series{{term({0, 0}, 1.0, 0.0)}}, Series{{term({0, 0}, 0.5, 0.0)}}};
      break;
  }
  s.b_offset.assign(s.dim, 0.0);
  s.b_offset_free.assign(s.dim, true);
  s.q0 = Vec::Zero(s.dim);
  s.q_grid = {Vec::Zero(s.dim)};
  return s;
}

Vec drift_sup_norm(const ProblemSpec& spec, const Vec& q, int samples) {
  Vec out = Vec::Zero(spec.dim);
  const long total = spec.dim == 1 ? samples : long(samples) * samples;
  for (long i = 0; i < total; ++i) {
    Vec r(spec.dim);
    r(0) = double(i % samples) / samples;
    if (spec.dim == 2) r(1) = double(i / samples) / samples;
    for (int l = 0; l < spec.dim; ++l) out(l) = std::max(out(l), std::abs(spec.b[l].eval(q, r)));
  }
  return out;
}

ConditionReport check_conditions(const ProblemSpec& spec, const std::vector<Vec>& q_samples, int fourier_K,
                                 double centering_tol) {
  ConditionReport rep;
  std::vector<Vec> qs = q_samples.empty() ? spec.q_grid : q_samples;
  if (qs.empty()) qs.push_back(Vec::Zero(spec.dim));
  rep.lambda_min = std::numeric_limits<double>::infinity();
  rep.lambda_max = -std::numeric_limits<double>::infinity();
  rep.alpha_floor = std::numeric_limits<double>::infinity();
  rep.centering_residual = Vec::Zero(spec.dim);
  bool centering_done = true;
  const int ns = 16;
  for (const Vec& q : qs) {
    const double lam = spec.lambda(q);
    rep.lambda_min = std::min(rep.lambda_min, lam);
    rep.lambda_max = std::max(rep.lambda_max, lam);
    if (!(lam > 0)) continue;
    const long total = spec.dim == 1 ? ns : long(ns) * ns;
    for (long i = 0; i < total; ++i) {
      Vec r(spec.dim);
      r(0) = double(i % ns) / ns;
      if (spec.dim == 2) r(1) = double(i / ns) / ns;
      const Mat alpha = eval_coefficients(spec, q, r).alpha;
      Eigen::SelfAdjointEigenSolver<Mat> es(alpha, Eigen::EigenvaluesOnly);
      rep.alpha_floor = std::min(rep.alpha_floor, es.eigenvalues().minCoeff());
    }
    try {
      const RField rho0 = solve_rho0(spec, q, rbasis_for(spec, fourier_K));
      const Vec res = centering_residual0(spec, q, rho0);
      for (int l = 0; l < spec.dim; ++l)
        rep.centering_residual(l) = std::max(rep.centering_residual(l), std::abs(res(l)));
    } catch (const Error& e) {
      centering_done = false;
      rep.flags.push_back(std::string("centering not evaluated: ") + e.what());
    }
  }
  rep.lambda_ok = rep.lambda_min > 0 && rep.lambda_min >= spec.lambda_lo * (1 - 1e-12) &&
                  rep.lambda_max <= spec.lambda_hi * (1 + 1e-12) && spec.lambda_lo > 0;
  if (!(rep.lambda_min > 0)) rep.flags.push_back("lambda_lo <= 0 violation: lambda(q) is not positive on the q-grid");
  else if (!rep.lambda_ok) rep.flags.push_back("lambda(q) leaves the declared bounds [lambda_lo, lambda_hi]");
  rep.alpha_ok = std::isfinite(rep.alpha_floor) && rep.alpha_floor > 0;
  if (!rep.alpha_ok) rep.flags.push_back("alpha is degenerate on the sampling grid");
  rep.centering_ok = centering_done && rep.centering_residual.cwiseAbs().maxCoeff() <= centering_tol;
  if (centering_done && !rep.centering_ok) {
    std::ostringstream os;
    os << "centering residual " << rep.centering_residual.cwiseAbs().maxCoeff() << " above " << centering_tol;
    rep.flags.push_back(os.str());
  }
  rep.delta_over_eps = spec.delta / spec.eps;
  rep.scale_ok = rep.delta_over_eps <= 0.5;
  if (!rep.scale_ok) rep.flags.push_back("scale ordering: delta/eps > 0.5");
  return rep;
}

}  // namespace hypolab
