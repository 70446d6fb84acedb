#include "hypolab/cli.hpp"

#include "hypolab/centering.hpp"
#include "hypolab/config.hpp"
#include "hypolab/identities.hpp"
#include "hypolab/importance.hpp"
#include "hypolab/parallel.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <memory>
#include <sstream>

namespace hypolab {

namespace {

namespace fs = std::filesystem;

std::string default_preset(const std::string& cmd) {
  if (cmd == "sweep" || cmd == "identities") return "tilted_nongradient";
  if (cmd == "check" || cmd == "density" || cmd == "cell") return "gradient_drift";
  return "constant_coeff";
}

int default_N(const ProblemSpec& s) { return s.dim == 1 ? 40 : 24; }
int default_K(const ProblemSpec& s) { return s.dim == 1 ? 16 : 8; }

struct Setup {
  ProblemSpec input;  // as given (hashed)
  ProblemSpec spec;   // offsets calibrated for rho0
  int N = 0, K = 0;
  Vec q;
  std::vector<Vec> q_grid;
  std::vector<double> m_list;
  Json centering = Json::object();
};

Setup prepare(const ExperimentPlan& plan, const std::vector<double>& default_m, bool calibrate = true) {
  Setup s;
  s.input = plan_spec(plan);
  s.N = plan.hermite_N > 0 ? plan.hermite_N : default_N(s.input);
  s.K = plan.fourier_K > 0 ? plan.fourier_K : default_K(s.input);
  if (!plan.q_grid.empty()) {
    for (const auto& q : plan.q_grid)
      if (q.size() != s.input.dim) throw ConfigError("cli", "q-grid point dimension does not match the problem");
    s.input.q_grid = plan.q_grid;
  }
  s.q = s.input.q0;
  s.q_grid = s.input.q_grid.empty() ? std::vector<Vec>{s.q} : s.input.q_grid;
  s.m_list = plan.m_list.empty() ? default_m : plan.m_list;
  s.spec = s.input;
  if (calibrate && s.input.has_free_offset()) {
    CenteringOptions co;
    co.fourier_K = s.K;
    co.tol = 1e-12;
    const CenteringResult cr = calibrate_centering(s.input, s.q, co);
    s.spec = cr.spec;
    s.centering = {{"offset", to_json(cr.offset)}, {"residual_rho0", to_json(cr.residual_rho0)}};
  }
  return s;
}

ArtifactMeta meta_for(const ExperimentPlan& plan, const Setup& s) {
  ArtifactMeta m = ArtifactMeta::for_spec(plan.command, s.input, s.N, s.K, plan.seed);
  return m;
}

std::string path_in(const ExperimentPlan& plan, const std::string& name) {
  return (fs::path(plan.out) / name).string();
}

void emit_json(const ExperimentPlan& plan, const ArtifactMeta& meta, const Json& body) {
  if (plan.write) write_json(path_in(plan, plan.command + ".json"), meta, body);
}

void emit_csv(const ExperimentPlan& plan, const ArtifactMeta& meta, const std::string& name, const CsvTable& t) {
  if (plan.write) t.write(path_in(plan, name), meta);
}

std::vector<std::string> component_names(const std::string& base, int d) {
  if (d == 1) return {base};
  std::vector<std::string> out;
  for (int l = 0; l < d; ++l) out.push_back(base + "_" + std::to_string(l + 1));
  return out;
}

std::vector<std::string> matrix_names(const std::string& base, int d) {
  if (d == 1) return {base};
  std::vector<std::string> out;
  for (int l = 0; l < d; ++l)
    for (int k = l; k < d; ++k) out.push_back(base + "_" + std::to_string(l + 1) + std::to_string(k + 1));
  return out;
}

void append(std::vector<double>& row, const Vec& v) {
  for (long i = 0; i < v.size(); ++i) row.push_back(v(i));
}

void append_upper(std::vector<double>& row, const Mat& m) {
  for (long l = 0; l < m.rows(); ++l)
    for (long k = l; k < m.cols(); ++k) row.push_back(m(l, k));
}

void append_names(std::vector<std::string>& cols, const std::vector<std::string>& more) {
  cols.insert(cols.end(), more.begin(), more.end());
}

Json coeffs_json(const Coeffs& c) {
  return {{"r", to_json(c.r)}, {"Q", to_json(c.Q)}, {"asymmetry", c.asymmetry}, {"min_eig", c.min_eig}};
}

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

// ---------------------------------------------------------------------------------------------------------

Json cmd_check(const ExperimentPlan& plan) {
  const Setup s = prepare(plan, {}, false);
  const ConditionReport rep = check_conditions(s.input, s.q_grid, s.K);
  Json j;
  j["lambda_min"] = rep.lambda_min;
  j["lambda_max"] = rep.lambda_max;
  j["lambda_ok"] = rep.lambda_ok;
  j["alpha_floor"] = rep.alpha_floor;
  j["alpha_ok"] = rep.alpha_ok;
  j["centering_residual"] = to_json(rep.centering_residual);
  j["centering_ok"] = rep.centering_ok;
  j["delta_over_eps"] = rep.delta_over_eps;
  j["scale_ok"] = rep.scale_ok;
  j["flags"] = rep.flags;
  j["all_ok"] = rep.all_ok();
  emit_json(plan, meta_for(plan, s), j);
  return j;
}

Json cmd_density(const ExperimentPlan& plan) {
  const Setup s = prepare(plan, default_m_list());
  BasisPtr basis = basis_for(s.spec, s.N, s.K);
  const HypoSweep sw = hypocoercivity_sweep(s.spec, s.q, s.m_list, basis, {}, plan.jobs);
  CsvTable t({"m", "norm_L2", "norm_H1", "grad_p", "grad_r", "slope_so_far", "gradient_identity_rel",
              "route_agreement", "zero_mean"});
  Json rows = Json::array();
  double max_L2 = 0;
  for (const auto& r : sw.rows) {
    t.add_numbers({r.m, r.norms.L2, r.norms.H1, r.norms.grad_p, r.norms.grad_r, r.slope_so_far, r.gradient_identity_rel,
                   r.route_agreement, r.zero_mean});
    rows.push_back({{"m", r.m}, {"norm_L2", r.norms.L2}, {"route_agreement", r.route_agreement},
                    {"gradient_identity_rel", r.gradient_identity_rel}});
    max_L2 = std::max(max_L2, r.norms.L2);
  }
  Json j;
  j["centering"] = s.centering;
  j["slope"] = sw.slope;
  j["monotone"] = sw.monotone;
  j["max_norm_L2"] = max_L2;
  j["rows"] = rows;
  const ArtifactMeta meta = meta_for(plan, s);
  emit_csv(plan, meta, "density_sweep.csv", t);
  emit_json(plan, meta, j);
  return j;
}

Json cmd_cell(const ExperimentPlan& plan) {
  const Setup s = prepare(plan, {0.2, 0.1, 0.05, 0.02, 0.01});
  const auto rows = psi3_sweep(s.spec, s.q, s.m_list, s.N, s.K, plan.jobs);
  CsvTable t({"m", "psi3_norm_L2_rho0", "psi3_grad_norm_rho_m", "route_agreement", "identity_rel",
              "stated_constant_ratio", "local_order"});
  std::vector<double> xs, ys;
  double max_route = 0, max_id = 0;
  Json jr = Json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    const double local = i == 0 ? std::nan("") : std::log(r.norm / rows[i - 1].norm) / std::log(r.m / rows[i - 1].m);
    t.add_numbers({r.m, r.norm, r.grad_norm, r.route_agreement, r.identity_rel, r.half_constant_ratio, local});
    xs.push_back(r.m);
    ys.push_back(r.norm);
    max_route = std::max(max_route, r.route_agreement);
    max_id = std::max(max_id, r.identity_rel);
    jr.push_back({{"m", r.m}, {"norm", r.norm}, {"grad_norm", r.grad_norm}, {"route_agreement", r.route_agreement},
                  {"identity_rel", r.identity_rel}, {"stated_constant_ratio", r.half_constant_ratio}});
  }
  const ChiResult chi = solve_chi(s.spec, s.q, rbasis_for(s.spec, s.K));
  Json j;
  j["centering"] = s.centering;
  j["order"] = fit_loglog_slope(xs, ys);
  j["max_route_agreement"] = max_route;
  j["max_identity_rel"] = max_id;
  j["chi_residual"] = chi.residual;
  j["rows"] = jr;
  const ArtifactMeta meta = meta_for(plan, s);
  emit_csv(plan, meta, "cell_psi3.csv", t);
  emit_json(plan, meta, j);
  return j;
}

Json cmd_homogenize(const ExperimentPlan& plan) {
  const Setup s = prepare(plan, {1.0, 0.1, 0.01});
  const int d = s.spec.dim;
  std::vector<std::string> cols = component_names("q", d);
  cols.push_back("m");
  append_names(cols, component_names("r_m", d));
  append_names(cols, matrix_names("Q_m", d));
  append_names(cols, component_names("r_0", d));
  append_names(cols, matrix_names("Q_0", d));
  append_names(cols, {"diff_r", "diff_Q", "slope_r", "slope_Q", "asymmetry", "min_eig"});
  CsvTable t(cols);
  Json points = Json::array();
  for (const Vec& q : s.q_grid) {
    const MassSweep ms = mass_sweep(s.spec, q, s.m_list, s.N, s.K, s.spec.has_free_offset(), plan.jobs);
    Json jr = Json::array();
    std::vector<double> dr, dq;
    for (const auto& row : ms.rows) {
      std::vector<double> v;
      append(v, q);
      v.push_back(row.m);
      append(v, row.at_m.r);
      append_upper(v, row.at_m.Q);
      append(v, ms.at_0.r);
      append_upper(v, ms.at_0.Q);
      v.insert(v.end(), {row.diff_r, row.diff_Q, ms.slope_r, ms.slope_Q, row.at_m.asymmetry, row.at_m.min_eig});
      t.add_numbers(v);
      Json c = coeffs_json(row.at_m);
      c["m"] = row.m;
      c["diff_r"] = row.diff_r;
      c["diff_Q"] = row.diff_Q;
      c["offset"] = to_json(row.offset);
      jr.push_back(c);
    }
    points.push_back({{"q", to_json(q)},
                      {"at_0", coeffs_json(ms.at_0)},
                      {"rows", jr},
                      {"slope_r", ms.slope_r},
                      {"slope_Q", ms.slope_Q},
                      {"monotone_r", ms.monotone_r},
                      {"monotone_Q", ms.monotone_Q}});
  }
  Json j;
  j["centering"] = s.centering;
  j["points"] = points;
  const ArtifactMeta meta = meta_for(plan, s);
  emit_csv(plan, meta, "homogenize.csv", t);
  emit_json(plan, meta, j);
  return j;
}

// Minimum over pairs (m_a, m_b) in the list with m_b <= m_a / 10 (one decade or more apart) of metric_b / metric_a,
// restricted to the first pair reaching a decade for each m_a.
double best_decade_ratio(const std::vector<double>& m, const std::vector<double>& v) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < m.size(); ++a)
    for (std::size_t b = a + 1; b < m.size(); ++b)
      if (m[b] <= m[a] / 10 * (1 + 1e-12)) {
        best = std::min(best, v[b] / v[a]);
        break;
      }
  return best;
}

Json cmd_sweep(const ExperimentPlan& plan) {
  const Setup s = prepare(plan, default_m_list());
  const int d = s.spec.dim;
  const std::size_t nm = s.m_list.size();
  BasisPtr basis = basis_for(s.spec, s.N, s.K);

  // invariant-density deviation
  const HypoSweep hs = hypocoercivity_sweep(s.spec, s.q, s.m_list, basis, {}, plan.jobs);
  std::vector<double> cross_L2(nm, std::nan("")), cross_H1(nm, std::nan(""));
  const int Nc = s.N + 20, Kc = s.K + 8;
  if (plan.cross) {
    ProblemSpec sc = s.input;
    if (sc.has_free_offset()) {
      CenteringOptions co;
      co.fourier_K = Kc;
      co.tol = 1e-12;
      sc = calibrate_centering(s.input, s.q, co).spec;
    }
    BasisPtr bc = basis_for(sc, Nc, Kc);
    StationaryOptions opt;
    opt.both_routes = false;
    parallel_for(nm, plan.jobs, [&](std::size_t i) {
      const DensitySet ds = solve_rho_m(sc, s.q, s.m_list[i], bc, opt);
      cross_L2[i] = ds.norms.L2;
      cross_H1[i] = ds.norms.H1;
    });
  }
  auto sig3 = [](double a, double b) {
    // agreement to 3 significant digits: relative difference below half a unit in the third digit
    return std::abs(a - b) <= 5e-4 * std::max(std::abs(a), std::abs(b));
  };
  CsvTable td({"m", "norm_L2", "norm_H1", "grad_p", "grad_r", "slope_so_far", "gradient_identity_rel",
               "route_agreement", "norm_L2_cross", "norm_H1_cross", "rel_change_L2", "rel_change_H1"});
  std::vector<double> L2;
  bool stable = plan.cross;
  Json jd = Json::array();
  for (std::size_t i = 0; i < nm; ++i) {
    const auto& r = hs.rows[i];
    const double c1 = std::abs(cross_L2[i] - r.norms.L2) / r.norms.L2;
    const double c2 = std::abs(cross_H1[i] - r.norms.H1) / r.norms.H1;
    td.add_numbers({r.m, r.norms.L2, r.norms.H1, r.norms.grad_p, r.norms.grad_r, r.slope_so_far, r.gradient_identity_rel,
                    r.route_agreement, cross_L2[i], cross_H1[i], c1, c2});
    L2.push_back(r.norms.L2);
    if (plan.cross) stable = stable && sig3(r.norms.L2, cross_L2[i]) && sig3(r.norms.H1, cross_H1[i]);
    jd.push_back({{"m", r.m}, {"norm_L2", r.norms.L2}, {"norm_H1", r.norms.H1}, {"norm_L2_cross", cross_L2[i]},
                  {"norm_H1_cross", cross_H1[i]}, {"route_agreement", r.route_agreement},
                  {"gradient_identity_rel", r.gradient_identity_rel}});
  }

  // cell-problem metric and coefficient differences, sharing one Phi solve per mass
  const ChiResult chi = solve_chi(s.spec, s.q, basis->r_ptr());
  const Coeffs c0 = coeffs_from_chi(s.spec, s.q, chi);
  std::vector<double> metric(nm), diff_r(nm), diff_Q(nm);
  std::vector<Coeffs> cm(nm);
  std::vector<Vec> offsets(nm);
  parallel_for(nm, plan.jobs, [&](std::size_t i) {
    const double m = s.m_list[i];
    ProblemSpec sm = s.spec;
    if (s.spec.has_free_offset()) {
      CenteringOptions co;
      co.target = CenteringTarget::hypoelliptic;
      co.hermite_N = s.N;
      co.fourier_K = s.K;
      co.mass = m;
      co.tol = 1e-12;
      sm = calibrate_centering(s.spec, s.q, co).spec;
    }
    const PhiResult phi = solve_phi(sm, s.q, m, basis);
    metric[i] = cell_metric(s.spec, s.q, phi, chi);
    cm[i] = coeffs_from_phi(sm, s.q, phi);
    diff_r[i] = (cm[i].r - c0.r).cwiseAbs().maxCoeff();
    diff_Q[i] = (cm[i].Q - c0.Q).cwiseAbs().maxCoeff();
    offsets[i] = Vec(d);
    for (int l = 0; l < d; ++l) offsets[i](l) = sm.b_offset[l];
  });
  CsvTable tm({"m", "cell_metric", "ratio_to_first"});
  CsvTable tc([&] {
    std::vector<std::string> cols{"m"};
    append_names(cols, component_names("r_m", d));
    append_names(cols, matrix_names("Q_m", d));
    append_names(cols, component_names("r_0", d));
    append_names(cols, matrix_names("Q_0", d));
    append_names(cols, {"diff_r", "diff_Q"});
    append_names(cols, component_names("offset", d));
    return cols;
  }());
  for (std::size_t i = 0; i < nm; ++i) {
    tm.add_numbers({s.m_list[i], metric[i], metric[i] / metric[0]});
    std::vector<double> v{s.m_list[i]};
    append(v, cm[i].r);
    append_upper(v, cm[i].Q);
    append(v, c0.r);
    append_upper(v, c0.Q);
    v.push_back(diff_r[i]);
    v.push_back(diff_Q[i]);
    append(v, offsets[i]);
    tc.add_numbers(v);
  }
  std::vector<double> lm, ldr, ldq;
  for (std::size_t i = 0; i < nm; ++i) {
    lm.push_back(s.m_list[i]);
    ldr.push_back(std::max(diff_r[i], 1e-300));
    ldq.push_back(std::max(diff_Q[i], 1e-300));
  }

  Json j;
  j["centering"] = s.centering;
  j["density"] = {{"slope", hs.slope},
                  {"monotone", hs.monotone},
                  {"cross_truncation", plan.cross ? Json{{"hermite_N", Nc}, {"fourier_K", Kc}} : Json(nullptr)},
                  {"cross_stable_3_digits", plan.cross ? Json(stable) : Json(nullptr)},
                  {"rows", jd}};
  j["cell_metric"] = {{"values", metric},
                      {"monotone", strictly_decreasing(metric)},
                      {"final_over_initial", metric.back() / metric.front()},
                      {"best_one_decade_ratio", best_decade_ratio(s.m_list, metric)}};
  j["coefficients"] = {{"at_0", coeffs_json(c0)},
                       {"diff_r", diff_r},
                       {"diff_Q", diff_Q},
                       {"monotone_r", strictly_decreasing(diff_r)},
                       {"monotone_Q", strictly_decreasing(diff_Q)},
                       {"slope_r", fit_loglog_slope(lm, ldr)},
                       {"slope_Q", fit_loglog_slope(lm, ldq)}};
  j["m_list"] = s.m_list;
  const ArtifactMeta meta = meta_for(plan, s);
  emit_csv(plan, meta, "sweep_density.csv", td);
  emit_csv(plan, meta, "sweep_cell_metric.csv", tm);
  emit_csv(plan, meta, "sweep_coeffs.csv", tc);
  emit_json(plan, meta, j);
  return j;
}

struct TestPath {
  std::string name;
  std::function<double(double)> f;  // displacement along every axis
};

std::vector<TestPath> test_paths() {
  return {{"straight_v2", [](double t) { return 2.0 * t; }},
          {"wave", [](double t) { return t + 0.25 * std::sin(kTwoPi * t); }},
          {"reverse", [](double t) { return -t; }}};
}

Json cmd_action(const ExperimentPlan& plan) {
  const Setup s = prepare(plan, default_m_list());
  const int n = 100;
  const auto paths = test_paths();
  std::vector<DiscretePath> dp;
  for (const auto& p : paths)
    dp.push_back(DiscretePath::sample(
        [&](double t) { return Vec(s.q.array() + p.f(t)); }, plan.T, n));
  const std::size_t nm = s.m_list.size();
  std::vector<CoeffTable> tables(nm);
  parallel_for(nm, plan.jobs, [&](std::size_t i) {
    tables[i] = coeff_table(s.spec, s.m_list[i], s.N, s.K, s.spec.has_free_offset(), 1);
  });
  CsvTable t({"path", "m", "S_m", "S_0", "abs_diff"});
  Json jp = Json::array();
  double max_diff = 0;
  for (std::size_t k = 0; k < paths.size(); ++k) {
    const double s0 = action(dp[k], tables[0], ActionKind::S_0);
    std::vector<double> diffs, sm;
    for (std::size_t i = 0; i < nm; ++i) {
      const double v = action(dp[k], tables[i], ActionKind::S_m);
      sm.push_back(v);
      diffs.push_back(std::abs(v - s0));
      max_diff = std::max(max_diff, diffs.back());
      t.add({paths[k].name, format_number(s.m_list[i]), format_number(v), format_number(s0),
             format_number(diffs.back())});
    }
    jp.push_back({{"name", paths[k].name}, {"S_0", s0}, {"S_m", sm}, {"abs_diff", diffs},
                  {"monotone", strictly_decreasing(diffs)}});
  }
  Json j;
  j["centering"] = s.centering;
  j["m_list"] = s.m_list;
  j["T"] = plan.T;
  j["intervals"] = n;
  j["paths"] = jp;
  j["max_abs_diff"] = max_diff;
  const ArtifactMeta meta = meta_for(plan, s);
  emit_csv(plan, meta, "action.csv", t);
  emit_json(plan, meta, j);
  return j;
}

System parse_system(const std::string& s) {
  if (s == "underdamped") return System::underdamped;
  if (s == "overdamped") return System::overdamped;
  throw ConfigError("cli", "unknown system '" + s + "' (underdamped | overdamped)");
}

SimConfig sim_config(const ExperimentPlan& plan, const ProblemSpec& spec, long default_paths) {
  SimConfig c;
  c.system = parse_system(plan.system);
  c.eps = spec.eps;
  c.delta = spec.delta;
  c.m = spec.mass;
  c.T = plan.T;
  c.step_factor = plan.step_factor;
  c.n_paths = plan.paths > 0 ? plan.paths : default_paths;
  c.seed = plan.seed;
  c.jobs = plan.jobs;
  return c;
}

Json ensemble_json(const PathEnsemble& e) {
  Json j;
  j["eps"] = e.eps;
  j["delta"] = e.delta;
  j["m"] = e.m;
  j["h"] = e.h;
  j["steps"] = e.steps;
  j["n_paths"] = e.cfg.n_paths;
  j["n_ok"] = e.n_ok;
  j["failures"] = e.failures;
  j["weights_clamped"] = e.weights_clamped;
  const long nr = e.mean_path.rows();
  if (nr > 0) {
    j["mean_qT"] = to_json(Vec(e.mean_path.row(nr - 1).transpose()));
    j["var_qT"] = to_json(Vec(e.var_path.row(nr - 1).transpose()));
  }
  return j;
}

CsvTable mean_path_table(const PathEnsemble& e, int d) {
  std::vector<std::string> cols{"t"};
  append_names(cols, component_names("mean_q", d));
  append_names(cols, component_names("var_q", d));
  CsvTable t(cols);
  for (long k = 0; k < e.mean_path.rows(); ++k) {
    std::vector<double> v{e.record_times[k]};
    append(v, e.mean_path.row(k).transpose());
    append(v, e.var_path.row(k).transpose());
    t.add_numbers(v);
  }
  return t;
}

// Coefficients and control for a velocity target at q0.
struct ControlSetup {
  PhiResult phi;
  Coeffs coeffs;
  ControlField field;
  ControlIdentity identity;
};

std::unique_ptr<ControlSetup> make_control(const Setup& s, double m, const Vec& nu) {
  auto c = std::make_unique<ControlSetup>();
  ProblemSpec sm = s.spec;
  if (s.spec.has_free_offset()) {
    CenteringOptions co;
    co.target = CenteringTarget::hypoelliptic;
    co.hermite_N = s.N;
    co.fourier_K = s.K;
    co.mass = m;
    co.tol = 1e-12;
    sm = calibrate_centering(s.spec, s.q, co).spec;
  }
  BasisPtr basis = basis_for(sm, s.N, s.K);
  c->phi = solve_phi(sm, s.q, m, basis);
  c->coeffs = coeffs_from_phi(sm, s.q, c->phi);
  c->field = ControlField(sm, s.q, c->phi, c->coeffs, nu);
  c->identity = control_identity(sm, s.q, c->phi, c->coeffs, nu);
  return c;
}

Json cmd_simulate(const ExperimentPlan& plan) {
  const Setup s = prepare(plan, {});
  SimConfig cfg = sim_config(plan, s.spec, 1000);
  std::unique_ptr<ControlSetup> ctl;
  Json j;
  if (std::isfinite(plan.nu)) {
    ctl = make_control(s, cfg.m, Vec::Constant(s.spec.dim, plan.nu));
    cfg.control = &ctl->field;
    j["policy"] = ctl->field.describe();
  } else {
    j["policy"] = "none";
  }
  const PathEnsemble e = simulate(s.spec, cfg);
  j["ensemble"] = ensemble_json(e);
  j["system"] = plan.system;
  const ArtifactMeta meta = meta_for(plan, s);
  emit_csv(plan, meta, "simulate_mean_path.csv", mean_path_table(e, s.spec.dim));
  emit_json(plan, meta, j);
  return j;
}

Json cmd_lln(const ExperimentPlan& plan) {
  const Setup s = prepare(plan, {});
  const SimConfig cfg = sim_config(plan, s.spec, 1000);
  const CoeffTable table = coeff_table(s.spec, cfg.m, s.N, s.K, s.spec.has_free_offset(), plan.jobs);
  const LLNResult r = lln_check(s.spec, cfg, table);
  const int d = s.spec.dim;
  std::vector<std::string> cols{"t"};
  append_names(cols, component_names("mean_q", d));
  append_names(cols, component_names("ode_q", d));
  CsvTable t(cols);
  for (std::size_t k = 0; k < r.t.size(); ++k) {
    std::vector<double> v{r.t[k]};
    append(v, r.mean_path.row(k).transpose());
    append(v, r.ode_path.row(k).transpose());
    t.add_numbers(v);
  }
  const Coeffs c = table.interpolate(s.q, cfg.system == System::overdamped);
  Json j;
  j["system"] = plan.system;
  j["eps"] = cfg.eps;
  j["delta"] = cfg.delta;
  j["m"] = cfg.m;
  j["T"] = cfg.T;
  j["n_paths"] = cfg.n_paths;
  j["n_ok"] = r.n_ok;
  j["drift_used"] = to_json(c.r);
  j["mean_qT"] = to_json(r.mean_qT);
  j["se_qT"] = to_json(r.se_qT);
  j["ode_qT"] = to_json(r.ode_qT);
  j["terminal_z"] = r.terminal_z;
  j["sup_distance"] = r.sup_distance;
  j["sup_z"] = r.sup_z;
  j["pass"] = r.pass;
  const ArtifactMeta meta = meta_for(plan, s);
  emit_csv(plan, meta, "lln.csv", t);
  emit_json(plan, meta, j);
  return j;
}

Json cmd_occupation(const ExperimentPlan& plan) {
  const Setup s = prepare(plan, {});
  const int d = s.spec.dim;
  std::vector<OccupationTest> tests{OccupationTest::constant(d)};
  for (int a = 0; a < d; ++a) tests.push_back(OccupationTest::momentum(d, a));
  for (int a = 0; a < d; ++a) tests.push_back(OccupationTest::sine(d, a));

  SimConfig base = sim_config(plan, s.spec, 200);
  base.occupation = true;
  base.tests = tests;
  base.record_points = 1;
  std::vector<std::pair<double, double>> runs{{base.eps, base.delta}};
  if (plan.halve) runs.emplace_back(base.eps / 2, base.delta / 4);  // delta / eps^2 fixed

  CsvTable th({"run", "eps", "p_bin", "r_bin", "t_window", "p_lo", "p_hi", "r_lo", "r_hi", "t_lo", "t_hi", "mass"});
  Json jr = Json::array();
  std::vector<std::vector<double>> abs_res;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    SimConfig cfg = base;
    cfg.eps = runs[k].first;
    cfg.delta = runs[k].second;
    const PathEnsemble e = simulate(s.spec, cfg);
    const auto& H = e.hist;
    for (int ip = 0; ip < H.p_bins; ++ip)
      for (int ir = 0; ir < H.r_bins; ++ir)
        for (int it = 0; it < H.t_windows; ++it) {
          double mass = 0;
          for (int iz = 0; iz < H.z_bins; ++iz)
            mass += H.mass[((long(iz) * H.p_bins + ip) * H.r_bins + ir) * H.t_windows + it];
          const double pw = (H.p_hi - H.p_lo) / H.p_bins, tw = H.t_hi / H.t_windows;
          th.add_numbers({double(k), cfg.eps, double(ip), double(ir), double(it), H.p_lo + ip * pw,
                          H.p_lo + (ip + 1) * pw, double(ir) / H.r_bins, double(ir + 1) / H.r_bins, it * tw,
                          (it + 1) * tw, mass});
        }
    Json jt = Json::array();
    std::vector<double> ab;
    for (std::size_t g = 0; g < tests.size(); ++g) {
      jt.push_back({{"test", tests[g].label}, {"mean", e.occ_mean(g)}, {"abs_mean", e.occ_abs(g)},
                    {"std_error", e.occ_se(g)}});
      ab.push_back(e.occ_abs(g));
    }
    abs_res.push_back(ab);
    jr.push_back({{"eps", cfg.eps}, {"delta", cfg.delta}, {"h", e.h}, {"window", e.window}, {"n_ok", e.n_ok},
                  {"mass_per_time", e.mass_per_time}, {"mass_per_time_error", std::abs(e.mass_per_time - 1.0)},
                  {"residuals", jt}});
  }
  Json j;
  j["m"] = base.m;
  j["T"] = base.T;
  j["runs"] = jr;
  if (runs.size() == 2) {
    Json dec = Json::object();
    for (std::size_t g = 0; g < tests.size(); ++g) dec[tests[g].label] = abs_res[1][g] < abs_res[0][g];
    j["decreases_when_eps_halved"] = dec;
  }
  const ArtifactMeta meta = meta_for(plan, s);
  emit_csv(plan, meta, "occupation_hist.csv", th);
  emit_json(plan, meta, j);
  return j;
}

double standard_normal_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

Json cmd_is_estimate(const ExperimentPlan& plan) {
  ExperimentPlan p = plan;
  if (p.eps <= 0) p.eps = 0.05;
  if (p.delta <= 0) p.delta = 0.01;
  const Setup s = prepare(p, {});
  SimConfig cfg = sim_config(p, s.spec, 10000);
  const int d = s.spec.dim;
  // event {q_T,0 >= q0 + r T + sigmas sqrt(eps Q T)} with (r, Q) at the working mass
  auto ctl = make_control(s, cfg.m, Vec::Constant(d, 0.0));
  const double r = ctl->coeffs.r(0), Q = ctl->coeffs.Q(0, 0);
  const double threshold = s.q(0) + r * cfg.T + p.sigmas * std::sqrt(cfg.eps * Q * cfg.T);
  Vec nu = ctl->coeffs.r;
  nu(0) = std::isfinite(p.nu) ? p.nu : (threshold - s.q(0)) / cfg.T;
  ctl = make_control(s, cfg.m, nu);
  if (!p.plain) cfg.control = &ctl->field;

  double ref = p.reference, ref_se = p.reference_se;
  Json ref_info = nullptr;
  if (!p.reference_file.empty()) {
    std::ifstream f(p.reference_file);
    if (!f) throw ConfigError("cli", "cannot read reference file " + p.reference_file);
    const Json rj = Json::parse(f);
    ref = rj.at("estimate").get<double>();
    ref_se = rj.at("std_error").get<double>();
    ref_info = rj;
  }
  if (cfg.n_paths < 100) throw ParameterError("ldp", "importance sampling needs at least 100 samples");
  const PathEnsemble e = simulate(s.spec, cfg);
  const ISEstimate est = estimate_from_ensemble(e, Event::terminal_at_least(0, threshold), ref, ref_se);
  const ISEstimate whole = estimate_from_ensemble(e, Event::whole_space());

  Json j;
  j["estimate"] = est.estimate;
  j["std_error"] = est.std_error;
  j["n"] = est.n;
  j["hits"] = est.hits;
  j["variance_ratio"] = est.variance_ratio;
  j["seed"] = cfg.seed;
  j["policy"] = p.plain ? "plain Monte Carlo (no control)" : ctl->field.describe();
  j["self_normalized"] = est.self_normalized;
  j["sn_std_error"] = est.sn_std_error;
  j["mean_weight"] = est.mean_weight;
  j["ess"] = est.ess;
  j["reference"] = ref;
  j["reference_se"] = ref_se;
  j["reference_source"] = ref_info;
  j["combined_z"] = est.combined_z;
  j["weights_clamped"] = est.weights_clamped;
  j["event"] = {{"component", 0}, {"threshold", threshold}, {"sigmas", p.sigmas}};
  j["gaussian_limit_tail"] = standard_normal_tail(p.sigmas);
  j["whole_space"] = {{"self_normalized", whole.self_normalized}, {"sn_std_error", whole.sn_std_error},
                      {"unbiased", whole.estimate}, {"std_error", whole.std_error}};
  j["control_identity"] = {{"lhs", ctl->identity.lhs}, {"rhs", ctl->identity.rhs}, {"rel", ctl->identity.rel}};
  j["coefficients"] = coeffs_json(ctl->coeffs);
  j["nu"] = to_json(nu);
  j["simulation"] = ensemble_json(e);
  ArtifactMeta meta = meta_for(p, s);
  emit_json(p, meta, j);
  return j;
}

Json cmd_identities(const ExperimentPlan& plan) {
  const Setup s = prepare(plan, {0.1});
  IdentitySuiteOptions o;
  o.n_fields = plan.n_fields;
  o.seed = plan.seed;
  o.hermite_N = plan.hermite_N > 0 ? plan.hermite_N : 16;
  o.fourier_K = s.K;
  o.m = s.m_list.front();
  ProblemSpec corrector = make_preset(PresetName::gradient_drift);
  const IdentitySuite suite = identity_suite(s.spec, corrector, s.q, o);
  CsvTable t({"identity", "index", "lhs", "rhs", "rel", "tol", "pass"});
  for (const auto& c : suite.checks)
    t.add({c.name, std::to_string(c.index), format_number(c.lhs), format_number(c.rhs), format_number(c.rel),
           format_number(c.tol), c.pass() ? "true" : "false"});
  Json w = Json::object();
  for (const auto& [name, rel] : suite.worst()) w[name] = rel;
  Json j;
  j["centering"] = s.centering;
  j["m"] = o.m;
  j["n_fields"] = o.n_fields;
  j["worst_rel"] = w;
  j["pass"] = suite.pass();
  Setup s2 = s;
  s2.N = o.hermite_N;
  const ArtifactMeta meta = meta_for(plan, s2);
  emit_csv(plan, meta, "identities.csv", t);
  emit_json(plan, meta, j);
  return j;
}

std::vector<Vec> parse_q_grid(const std::string& text) {
  std::vector<Vec> out;
  std::stringstream ss(text);
  std::string pt;
  while (std::getline(ss, pt, ';')) {
    std::vector<double> xs;
    std::stringstream ps(pt);
    std::string x;
    while (std::getline(ps, x, ',')) {
      try {
        xs.push_back(std::stod(x));
      } catch (const std::exception&) {
        throw ConfigError("cli", "bad q-grid coordinate '" + x + "'");
      }
    }
    if (xs.empty()) continue;
    out.push_back(Eigen::Map<Vec>(xs.data(), long(xs.size())));
  }
  return out;
}

}  // namespace

std::vector<double> default_m_list() { return {0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005}; }

ProblemSpec plan_spec(const ExperimentPlan& plan) {
  ProblemSpec s = !plan.config.empty() ? load_config(plan.config)
                                       : make_preset(parse_preset(plan.preset.empty() ? default_preset(plan.command)
                                                                                      : plan.preset));
  if (plan.eps > 0) s.eps = plan.eps;
  if (plan.delta > 0) s.delta = plan.delta;
  if (plan.mass > 0) s.mass = plan.mass;
  s.validate();
  return s;
}

Json run_plan(const ExperimentPlan& plan) {
  for (double m : plan.m_list)
    if (!(m > 0)) throw ParameterError("cli", "masses must be positive");
  if (plan.write) ensure_output_dir(plan.out);
  const auto t0 = std::chrono::steady_clock::now();
  Json out;
  const std::string& c = plan.command;
  if (c == "check") out = cmd_check(plan);
  else if (c == "density") out = cmd_density(plan);
  else if (c == "cell") out = cmd_cell(plan);
  else if (c == "homogenize") out = cmd_homogenize(plan);
  else if (c == "sweep") out = cmd_sweep(plan);
  else if (c == "action") out = cmd_action(plan);
  else if (c == "simulate") out = cmd_simulate(plan);
  else if (c == "lln") out = cmd_lln(plan);
  else if (c == "occupation") out = cmd_occupation(plan);
  else if (c == "is-estimate") out = cmd_is_estimate(plan);
  else if (c == "identities") out = cmd_identities(plan);
  else throw ConfigError("cli", "unknown subcommand '" + c + "'");
  const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (plan.write) write_sidecar(plan.out, c, plan.argv, sec);
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"hypolab: small-mass multiscale Langevin laboratory"};
  app.require_subcommand(1);
  ExperimentPlan plan;
  std::string q_grid;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"check", "check regularity and centering conditions"},
      {"density", "invariant density deviation sweep over m"},
      {"cell", "expansion remainder sweep over m"},
      {"homogenize", "homogenized drift and diffusion at each m and in the limit"},
      {"sweep", "density deviation, cell-problem metric and coefficient differences over m"},
      {"action", "action of fixed test paths at each m and in the limit"},
      {"simulate", "simulate an ensemble of the multiscale system"},
      {"lln", "ensemble mean against the homogenized ODE"},
      {"occupation", "occupation-measure stationarity residuals"},
      {"is-estimate", "importance-sampling estimate of a tail probability"},
      {"identities", "integration-by-parts identity suite on random fields"}};
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", plan.config, "problem config file (INI)")->check(CLI::ExistingFile);
    sub->add_option("--preset", plan.preset, "constant_coeff | gradient_drift | tilted_nongradient");
    sub->add_option("--out", plan.out, "output directory")->capture_default_str();
    sub->add_option("--seed", plan.seed, "random seed")->capture_default_str();
    sub->add_option("--m-list", plan.m_list, "masses, comma separated")->delimiter(',');
    sub->add_option("--q-grid", q_grid, "slow points 'x,y;x,y'");
    sub->add_option("--hermite", plan.hermite_N, "Hermite modes per axis");
    sub->add_option("--fourier", plan.fourier_K, "Fourier wave numbers per active axis");
    sub->add_option("--paths", plan.paths, "number of paths");
    sub->add_option("--eps", plan.eps, "epsilon");
    sub->add_option("--delta", plan.delta, "delta");
    sub->add_option("--mass", plan.mass, "working mass m");
    sub->add_option("--jobs", plan.jobs, "worker threads")->capture_default_str();
    sub->add_option("--system", plan.system, "underdamped | overdamped")->capture_default_str();
    sub->add_option("--T", plan.T, "time horizon")->capture_default_str();
    sub->add_option("--step-factor", plan.step_factor, "step as a fraction of h_max");
    sub->add_option("--nu", plan.nu, "control velocity");
    sub->add_option("--sigmas", plan.sigmas, "tail event level in standard deviations")->capture_default_str();
    sub->add_flag("--plain", plan.plain, "is-estimate without control");
    sub->add_option("--reference", plan.reference, "reference probability");
    sub->add_option("--reference-se", plan.reference_se, "reference standard error");
    sub->add_option("--reference-file", plan.reference_file, "JSON with estimate and std_error");
    sub->add_flag("--cross", plan.cross, "sweep: cross-truncation check at N+20, K+8");
    sub->add_flag("!--no-halve", plan.halve, "occupation: skip the eps/2 run");
    sub->add_option("--fields", plan.n_fields, "identities: number of random fields")->capture_default_str();
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  plan.command = app.get_subcommands().front()->get_name();
  for (int i = 0; i < argc; ++i) plan.argv.emplace_back(argv[i]);
  try {
    if (!q_grid.empty()) plan.q_grid = parse_q_grid(q_grid);
    const Json out = run_plan(plan);
    std::cout << out.dump(2) << "\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error [" << e.module() << "]: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error [" << e.module() << "]: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace hypolab
