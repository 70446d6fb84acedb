#include "hypolab/dynamics.hpp"

#include "hypolab/parallel.hpp"
#include "hypolab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hypolab {

OccupationTest OccupationTest::constant(int d) { return {std::vector<int>(d, 0), std::vector<int>(d, 0), "1"}; }

OccupationTest OccupationTest::momentum(int d, int axis) {
  OccupationTest t{std::vector<int>(d, 0), std::vector<int>(d, 0), "p" + std::to_string(axis)};
  t.n[axis] = 1;
  t.scale = -1.0;  // resolved against beta in generator_on_test: g = p_axis
  return t;
}

OccupationTest OccupationTest::sine(int d, int axis) {
  OccupationTest t{std::vector<int>(d, 0), std::vector<int>(d, 0), "sin(2pi r" + std::to_string(axis) + ")"};
  t.f[axis] = 2;
  t.scale = 1.0 / std::sqrt(2.0);
  return t;
}

double h_max_underdamped(double eps, double delta, double m) { return 0.2 * delta * delta * std::sqrt(m) / eps; }
double h_max_overdamped(double eps, double delta) { return 0.01 * delta * delta / eps; }

double OccupationHistogram::total() const {
  double s = 0;
  for (double v : mass) s += v;
  return s;
}

namespace {

constexpr int kMaxDim = 2;
constexpr long kBlock = 256;

// Coefficients at (q, r) without allocation in the stepping loop.
struct Frozen {
  const ProblemSpec& spec;
  int d;
  bool fd, lambda_const;
  double lam_const;
  Vec qv, rv;
  explicit Frozen(const ProblemSpec& s)
      : spec(s),
        d(s.dim),
        fd(s.sigma_mode == SigmaMode::fluctuation_dissipation),
        lambda_const(s.lambda.is_constant()),
        lam_const(s.lambda.constant_value()),
        qv(s.dim),
        rv(s.dim) {}

  void set(const double* q, const double* r) {
    for (int a = 0; a < d; ++a) {
      qv(a) = q[a];
      rv(a) = r[a];
    }
  }
  double lambda() const { return lambda_const ? lam_const : spec.lambda(qv); }
  void drift(double* b, double* c) const {
    for (int l = 0; l < d; ++l) {
      b[l] = spec.b[l].eval(qv, rv) + spec.b_offset[l];
      c[l] = spec.c[l].eval(qv, rv);
    }
  }
  // sigma row-major into s[d*d]
  void sigma(double lam, double* s) const {
    if (fd) {
      const double v = std::sqrt(2.0 * spec.beta * lam);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s[i * d + j] = i == j ? v : 0.0;
      return;
    }
    for (int i = 0; i < d * d; ++i) s[i] = spec.sigma[i].eval(qv, rv);
  }
};

double kernel(double s, double T, double window) {
  return std::max(0.0, std::min(s, T) - std::max(0.0, s - window)) / window;
}

// Hermite values and first two derivatives up to degree n (orthonormal, variance beta).
void hermite_with_derivs(int n, double beta, double x, double* h, double* dh, double* d2h) {
  hermite::eval(n + 1, beta, x, h);
  for (int k = 0; k <= n; ++k) {
    dh[k] = k >= 1 ? std::sqrt(k / beta) * h[k - 1] : 0.0;
    d2h[k] = k >= 2 ? std::sqrt(double(k) * (k - 1)) / beta * h[k - 2] : 0.0;
  }
}

// Exact OU half-step constants: p <- a p + s sigma (xi + theta), theta = theta_per_u * u.
struct OUConst {
  double a = 1, s = 0, theta_per_u = 0;
  OUConst(double lam, double eps, double delta, double m, double h) {
    const double gamma = lam * eps / (m * delta * delta);
    a = std::exp(-0.5 * gamma * h);
    s = std::sqrt((1.0 - a * a) / (2.0 * lam));
    theta_per_u = (1.0 - a) / (gamma * delta * std::sqrt(m) * s);
  }
};

struct BlockAcc {
  Mat sum, sumsq;
  std::vector<double> hist;
  Vec occ_sum, occ_abs, occ_sq;
  long n_ok = 0;
  bool clamped = false;
  std::vector<std::string> failures;
};

}  // namespace

double generator_on_test(const ProblemSpec& spec, const Vec& q, double m, const OccupationTest& g, const Vec& p,
                         const Vec& r) {
  const int d = spec.dim;
  const CoeffValues cv = eval_coefficients(spec, q, r);
  double H[kMaxDim][8], dH[kMaxDim][8], d2H[kMaxDim][8];
  double F[kMaxDim], dF[kMaxDim];
  for (int a = 0; a < d; ++a) {
    if (g.n[a] > 6) throw ParameterError("dynamics", "occupation test degree above 6");
    hermite_with_derivs(g.n[a], spec.beta, p(a), H[a], dH[a], d2H[a]);
    const int k = RBasis::wave(g.f[a]);
    const double ph = kTwoPi * k * r(a);
    if (g.f[a] == 0) {
      F[a] = 1.0;
      dF[a] = 0.0;
    } else if (g.f[a] % 2 == 1) {
      F[a] = std::sqrt(2.0) * std::cos(ph);
      dF[a] = -std::sqrt(2.0) * kTwoPi * k * std::sin(ph);
    } else {
      F[a] = std::sqrt(2.0) * std::sin(ph);
      dF[a] = std::sqrt(2.0) * kTwoPi * k * std::cos(ph);
    }
  }
  auto prod_except = [&](int skip_p1, int skip_p2, int skip_r) {
    double v = 1.0;
    for (int a = 0; a < d; ++a) {
      if (a != skip_p1 && a != skip_p2) v *= H[a][g.n[a]];
      if (a != skip_r) v *= F[a];
    }
    return v;
  };
  double fast = 0, slow = 0;
  for (int a = 0; a < d; ++a) {
    const double dpa = dH[a][g.n[a]] * prod_except(a, -1, -1);
    fast += -cv.lambda * p(a) * dpa;
    slow += cv.b(a) * dpa + p(a) * H[a][g.n[a]] * dF[a] * prod_except(a, -1, a);
    for (int c = 0; c < d; ++c) {
      const double d2 = c == a ? d2H[a][g.n[a]] * prod_except(a, -1, -1)
                               : dH[a][g.n[a]] * dH[c][g.n[c]] * prod_except(a, c, -1);
      fast += 0.5 * cv.alpha(a, c) * d2;
    }
  }
  const double scale = g.scale < 0 ? std::sqrt(spec.beta) : g.scale;
  return scale * (fast / m + slow / std::sqrt(m));
}

PathEnsemble simulate(const ProblemSpec& spec, const SimConfig& cfg_in) {
  spec.validate();
  const int d = spec.dim;
  if (d > kMaxDim) throw ParameterError("dynamics", "simulation supports d <= 2");
  PathEnsemble out;
  out.cfg = cfg_in;
  const SimConfig& cfg = out.cfg;
  out.eps = cfg.eps > 0 ? cfg.eps : spec.eps;
  out.delta = cfg.delta > 0 ? cfg.delta : spec.delta;
  out.m = cfg.m > 0 ? cfg.m : spec.mass;
  const double eps = out.eps, delta = out.delta, m = out.m, sm = std::sqrt(m);
  if (!(cfg.T > 0)) throw ParameterError("dynamics", "horizon T must be positive");
  if (cfg.n_paths < 1) throw ParameterError("dynamics", "need at least one path");
  const bool under = cfg.system == System::underdamped;
  if (!under && cfg.control) throw ParameterError("dynamics", "controls are implemented for the underdamped system");
  const double hmax = under ? h_max_underdamped(eps, delta, m) : h_max_overdamped(eps, delta);
  const double factor = cfg.step_factor > 0 ? cfg.step_factor : (under ? 0.25 : 1.0);
  double h = cfg.h > 0 ? cfg.h : factor * hmax;
  if (h > hmax * (1 + 1e-12)) {
    std::ostringstream os;
    os << "step " << h << " exceeds h_max = " << hmax << " (c_r delta^2 sqrt(m) / eps)";
    throw ParameterError("dynamics", os.str());
  }
  out.steps = long(std::ceil(cfg.T / h - 1e-9));
  h = cfg.T / out.steps;
  out.h = h;
  long total_steps = out.steps, window_steps = 0;
  if (cfg.occupation) {
    if (!under) throw ParameterError("dynamics", "occupation measure needs the momentum variable");
    const double w = cfg.window > 0 ? cfg.window : std::sqrt(eps) * cfg.T;
    window_steps = std::max(1L, std::lround(w / h));
    out.window = window_steps * h;
    if (!(out.window < cfg.T)) throw ParameterError("dynamics", "occupation window must lie in (h, T)");
    total_steps += window_steps;
  }
  const int R = std::max(1, cfg.record_points);
  std::vector<long> record_step(R + 1);
  for (int j = 0; j <= R; ++j) {
    record_step[j] = std::lround(double(out.steps) * j / R);
    out.record_times.push_back(record_step[j] * h);
  }

  // histogram layout
  OccupationHistogram& hist = out.hist;
  if (cfg.occupation) {
    hist.z_bins = std::max(1, cfg.control ? cfg.z_bins : 1);
    hist.p_bins = cfg.p_bins;
    hist.r_bins = cfg.r_bins;
    hist.t_windows = cfg.t_windows;
    hist.p_hi = cfg.p_range * std::sqrt(spec.beta);
    hist.p_lo = -hist.p_hi;
    hist.z_hi = cfg.z_range;
    hist.z_lo = -cfg.z_range;
    hist.t_hi = cfg.T + out.window;
  }
  const long hist_size = cfg.occupation ? long(hist.z_bins) * hist.p_bins * hist.r_bins * hist.t_windows : 0;
  const int ntest = cfg.occupation ? int(cfg.tests.size()) : 0;

  const long N = cfg.n_paths;
  out.q_T.assign(N, Vec::Constant(d, std::nan("")));
  out.p_T.assign(N, Vec::Constant(d, std::nan("")));
  out.log_weight.assign(N, 0.0);
  out.ok.assign(N, 0);
  const long nblocks = (N + kBlock - 1) / kBlock;
  std::vector<BlockAcc> acc(nblocks);
  const Vec q0 = spec.q0.size() == d ? spec.q0 : Vec::Zero(d);
  const bool controlled = cfg.control && !cfg.control->is_zero();
  const int pairs = under ? d : 1;  // normals per step: 2d underdamped, d overdamped

  parallel_for(std::size_t(nblocks), cfg.jobs, [&](std::size_t blk) {
    BlockAcc& A = acc[blk];
    A.sum = Mat::Zero(R + 1, d);
    A.sumsq = Mat::Zero(R + 1, d);
    A.hist.assign(hist_size, 0.0);
    A.occ_sum = Vec::Zero(ntest);
    A.occ_abs = Vec::Zero(ntest);
    A.occ_sq = Vec::Zero(ntest);
    Frozen fz(spec);
    Mat rec(R + 1, d);
    std::vector<double> path_hist(hist_size);
    Vec occ(ntest);
    Vec pv(d), rvec(d), qvec(d);
    const long begin = long(blk) * kBlock, end = std::min(N, begin + kBlock);
    for (long path = begin; path < end; ++path) {
      const NormalStream noise(cfg.seed, std::uint64_t(path), 0);
      const NormalStream init(cfg.seed, std::uint64_t(path), 1);
      double q[kMaxDim], p[kMaxDim] = {0, 0}, r[kMaxDim], b[kMaxDim], c[kMaxDim], sig[kMaxDim * kMaxDim];
      for (int a = 0; a < d; ++a) q[a] = q0(a);
      auto wrap_r = [&]() {
        for (int a = 0; a < d; ++a) {
          const double x = q[a] / delta;
          r[a] = x - std::floor(x);
        }
        fz.set(q, r);
      };
      wrap_r();
      double lam = fz.lambda();
      if (under) {
        const auto z0 = init.block(0);
        if (spec.p0) {
          for (int a = 0; a < d; ++a) p[a] = (*spec.p0)(a);
        } else {
          // p0 ~ N(0, alpha / (2 lambda)), the stationary law of the momentum OU part
          fz.sigma(lam, sig);
          const double s = std::sqrt(1.0 / (2.0 * lam));
          for (int a = 0; a < d; ++a) {
            p[a] = 0;
            for (int j = 0; j < d; ++j) p[a] += s * sig[a * d + j] * z0[j];
          }
        }
      }
      OUConst ou(lam, eps, delta, m, h);
      if (under) fz.sigma(lam, sig);
      double logw = 0;
      bool fail = false;
      std::string why;
      std::fill(path_hist.begin(), path_hist.end(), 0.0);
      occ.setZero();
      int next_rec = 0;
      auto record = [&](long step) {
        while (next_rec <= R && record_step[next_rec] == step) {
          for (int a = 0; a < d; ++a) rec(next_rec, a) = q[a];
          ++next_rec;
        }
      };
      record(0);

      const double fast_coef = eps / (delta * sm);  // dq = fast_coef p dt
      const double kick = 1.0 / (delta * sm);
      auto occupation_values = [&](double* vals, double& zval) {
        for (int a = 0; a < d; ++a) {
          pv(a) = p[a];
          rvec(a) = r[a];
          qvec(a) = q[a];
        }
        for (int j = 0; j < ntest; ++j) vals[j] = generator_on_test(spec, qvec, m, cfg.tests[j], pv, rvec);
        zval = 0;
        if (cfg.control && !cfg.control->is_zero()) zval = cfg.control->eval(pv, rvec)(0);
      };
      std::vector<double> lg_prev(ntest), lg_cur(ntest);
      double z_prev = 0, z_cur = 0;
      if (cfg.occupation) occupation_values(lg_prev.data(), z_prev);

      for (long step = 0; step < total_steps && !fail; ++step) {
        const double t = step * h;
        if (under) {
          const auto xi = noise.block(std::uint64_t(step), pairs);
          for (int half = 0; half < 2; ++half) {
            if (half == 1) {
              // B half-kick, A drift, B half-kick
              fz.drift(b, c);
              for (int a = 0; a < d; ++a) p[a] += 0.5 * h * kick * (eps / delta * b[a] + c[a]);
              for (int a = 0; a < d; ++a) q[a] += h * fast_coef * p[a];
              wrap_r();
              fz.drift(b, c);
              for (int a = 0; a < d; ++a) p[a] += 0.5 * h * kick * (eps / delta * b[a] + c[a]);
            }
            // O half-step: exact OU flow with the control held fixed
            if (!fz.lambda_const) {
              lam = fz.lambda();
              ou = OUConst(lam, eps, delta, m, h);
              fz.sigma(lam, sig);
            } else if (!fz.fd) {
              fz.sigma(lam, sig);
            }
            double theta[kMaxDim] = {0, 0};
            if (controlled) {
              double u[kMaxDim];
              cfg.control->eval_into(p, r, u);
              for (int a = 0; a < d; ++a) {
                theta[a] = u[a] * ou.theta_per_u;
                logw += -theta[a] * xi[half * d + a] - 0.5 * theta[a] * theta[a];
              }
            }
            double np[kMaxDim];
            for (int a = 0; a < d; ++a) {
              np[a] = ou.a * p[a];
              for (int j = 0; j < d; ++j) np[a] += ou.s * sig[a * d + j] * (xi[half * d + j] + theta[j]);
            }
            for (int a = 0; a < d; ++a) p[a] = np[a];
          }
        } else {
          const auto xi = noise.block(std::uint64_t(step), pairs);
          fz.drift(b, c);
          fz.sigma(lam, sig);
          double gl[kMaxDim] = {0, 0};
          if (!fz.lambda_const) {
            const Vec g = spec.lambda.gradient(fz.qv);
            for (int a = 0; a < d; ++a) gl[a] = g(a);
          }
          double dq[kMaxDim];
          for (int a = 0; a < d; ++a) {
            double alpha_grad = 0;
            for (int j = 0; j < d; ++j) {
              double al = 0;
              for (int k = 0; k < d; ++k) al += sig[a * d + k] * sig[j * d + k];
              alpha_grad += al * gl[j];
            }
            double noise_term = 0;
            for (int j = 0; j < d; ++j) noise_term += sig[a * d + j] * xi[j];
            dq[a] = h * ((eps / delta) * b[a] / lam + c[a] / lam - eps * alpha_grad / (2 * lam * lam * lam)) +
                    std::sqrt(eps * h) * noise_term / lam;
          }
          for (int a = 0; a < d; ++a) q[a] += dq[a];
          wrap_r();
          lam = fz.lambda();
        }
        for (int a = 0; a < d; ++a)
          if (!std::isfinite(q[a]) || !std::isfinite(p[a])) {
            fail = true;
            std::ostringstream os;
            os << "path " << path << ": non-finite state at t = " << t + h;
            why = os.str();
          }
        if (fail) break;
        if (step + 1 <= out.steps) record(step + 1);
        if (step + 1 == out.steps) {
          out.q_T[path] = Vec::Map(q, d);
          out.p_T[path] = Vec::Map(p, d);
        }
        if (cfg.occupation) {
          occupation_values(lg_cur.data(), z_cur);
          const double tm = t + 0.5 * h;
          const double wk = kernel(tm, cfg.T, out.window) * h;
          for (int j = 0; j < ntest; ++j) occ(j) += 0.5 * (lg_prev[j] + lg_cur[j]) * wk;
          std::swap(lg_prev, lg_cur);
          // histogram at the step midpoint in time, state at the end of the step
          const int ip = std::clamp(int((p[0] - hist.p_lo) / (hist.p_hi - hist.p_lo) * hist.p_bins), 0, hist.p_bins - 1);
          const int ir = std::clamp(int(r[0] * hist.r_bins), 0, hist.r_bins - 1);
          const int it = std::clamp(int(tm / hist.t_hi * hist.t_windows), 0, hist.t_windows - 1);
          const int iz = hist.z_bins == 1
                             ? 0
                             : std::clamp(int((z_cur - hist.z_lo) / (hist.z_hi - hist.z_lo) * hist.z_bins), 0,
                                          hist.z_bins - 1);
          path_hist[((long(iz) * hist.p_bins + ip) * hist.r_bins + ir) * hist.t_windows + it] += wk;
        }
      }
      if (std::abs(logw) > cfg.log_weight_clamp) {
        logw = std::copysign(cfg.log_weight_clamp, logw);
        A.clamped = true;
      }
      if (fail) {
        if (A.failures.size() < 4) A.failures.push_back(why);
        continue;
      }
      out.ok[path] = 1;
      out.log_weight[path] = logw;
      ++A.n_ok;
      A.sum += rec;
      A.sumsq += rec.array().square().matrix();
      for (long i = 0; i < hist_size; ++i) A.hist[i] += path_hist[i];
      A.occ_sum += occ;
      A.occ_abs += occ.cwiseAbs();
      A.occ_sq += occ.array().square().matrix();
    }
  });

  // ordered reduction: results do not depend on the thread count
  Mat sum = Mat::Zero(R + 1, d), sumsq = Mat::Zero(R + 1, d);
  std::vector<double> hsum(hist_size, 0.0);
  Vec occ_sum = Vec::Zero(ntest), occ_abs = Vec::Zero(ntest), occ_sq = Vec::Zero(ntest);
  for (const auto& A : acc) {
    out.n_ok += A.n_ok;
    sum += A.sum;
    sumsq += A.sumsq;
    for (long i = 0; i < hist_size; ++i) hsum[i] += A.hist[i];
    occ_sum += A.occ_sum;
    occ_abs += A.occ_abs;
    occ_sq += A.occ_sq;
    out.weights_clamped = out.weights_clamped || A.clamped;
    for (const auto& f : A.failures)
      if (out.failures.size() < 8) out.failures.push_back(f);
  }
  if (out.n_ok == 0) throw SimulationError("dynamics", "every path failed: " + out.failures.front());
  const double n = double(out.n_ok);
  out.mean_path = sum / n;
  out.var_path = (sumsq / n - out.mean_path.array().square().matrix()) * (n / std::max(1.0, n - 1));
  hist.mass.resize(hist_size);
  for (long i = 0; i < hist_size; ++i) hist.mass[i] = hsum[i] / n;
  out.occ_mean = occ_sum / n;
  out.occ_abs = occ_abs / n;
  out.occ_se = Vec::Zero(ntest);
  for (int j = 0; j < ntest; ++j) {
    const double var = std::max(0.0, occ_sq(j) / n - out.occ_mean(j) * out.occ_mean(j)) * n / std::max(1.0, n - 1);
    out.occ_se(j) = std::sqrt(var / n);
  }
  out.mass_per_time = cfg.occupation ? hist.total() / cfg.T : 0.0;
  return out;
}

Mat ode_path(const CoeffTable& table, bool limit, const Vec& q0, const std::vector<double>& times, int substeps) {
  Mat out(times.size(), q0.size());
  Vec q = q0;
  double t = 0;
  auto f = [&](const Vec& x) { return table.interpolate(x, limit).r; };
  for (std::size_t j = 0; j < times.size(); ++j) {
    const double dt = (times[j] - t) / substeps;
    for (int s = 0; s < substeps && dt > 0; ++s) {
      const Vec k1 = f(q), k2 = f(q + 0.5 * dt * k1), k3 = f(q + 0.5 * dt * k2), k4 = f(q + dt * k3);
      q += dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    t = times[j];
    out.row(j) = q.transpose();
  }
  return out;
}

LLNResult lln_check(const ProblemSpec& spec, const SimConfig& cfg, const CoeffTable& table) {
  if (cfg.control) throw ParameterError("dynamics", "lln check runs without control");
  const PathEnsemble ens = simulate(spec, cfg);
  const int d = spec.dim;
  const Vec q0 = spec.q0.size() == d ? spec.q0 : Vec::Zero(d);
  LLNResult res;
  res.t = ens.record_times;
  res.mean_path = ens.mean_path;
  res.ode_path = ode_path(table, cfg.system == System::overdamped, q0, res.t);
  res.n_ok = ens.n_ok;
  const long last = long(res.t.size()) - 1;
  res.mean_qT = ens.mean_path.row(last).transpose();
  res.ode_qT = res.ode_path.row(last).transpose();
  res.se_qT = (ens.var_path.row(last).transpose().cwiseMax(0.0) / double(ens.n_ok)).cwiseSqrt();
  res.pass = true;
  for (int a = 0; a < d; ++a) {
    const double dev = std::abs(res.mean_qT(a) - res.ode_qT(a));
    const double z = res.se_qT(a) > 0 ? dev / res.se_qT(a) : (dev > 0 ? INFINITY : 0.0);
    res.terminal_z = std::max(res.terminal_z, z);
    if (!(dev <= 3.0 * res.se_qT(a))) res.pass = false;
  }
  for (long j = 0; j <= last; ++j)
    for (int a = 0; a < d; ++a) {
      const double dev = std::abs(res.mean_path(j, a) - res.ode_path(j, a));
      res.sup_distance = std::max(res.sup_distance, dev);
      const double se = std::sqrt(std::max(0.0, ens.var_path(j, a)) / double(ens.n_ok));
      if (se > 0) res.sup_z = std::max(res.sup_z, dev / se);
    }
  return res;
}

}  // namespace hypolab
