#pragma once

#include "hypolab/homogenize.hpp"
#include "hypolab/ldp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hypolab {

enum class System { underdamped, overdamped };

// Test function g(p, r) = scale * prod_a H_{n_a}(p_a) * F_f(r) for the occupation residual
// (f is a flat index of the Fourier basis with the given per-axis truncation).
struct OccupationTest {
  std::vector<int> n;
  std::vector<int> f;  // 1D Fourier index per axis
  std::string label;
  double scale = 1.0;  // negative: sqrt(beta)
  static OccupationTest constant(int d);
  static OccupationTest momentum(int d, int axis);  // g = p_axis
  static OccupationTest sine(int d, int axis);      // g = sin(2 pi r_axis)
};

struct SimConfig {
  System system = System::underdamped;
  double eps = 0, delta = 0, m = 0;  // 0: taken from the problem
  double T = 1.0;
  double h = 0;                      // 0: step_factor * h_max
  // Fraction of h_max used when h is not given; 0 picks 0.25 (underdamped) or 1 (overdamped). The
  // splitting inflates the position variance by O((gamma h)^2), about 0.5% at 0.25 h_max.
  double step_factor = 0;
  long n_paths = 1000;
  std::uint64_t seed = 1;
  int jobs = 1;
  const ControlField* control = nullptr;
  int record_points = 100;           // mean-path records on [0, T]
  bool occupation = false;           // continue to T + window and accumulate the occupation measure
  double window = 0;                 // occupation window; 0: sqrt(eps) * T
  std::vector<OccupationTest> tests;
  int p_bins = 16, r_bins = 16, t_windows = 4, z_bins = 1;
  double p_range = 4.0;              // histogram p in [-p_range sqrt(beta), p_range sqrt(beta)]
  double z_range = 4.0;
  double log_weight_clamp = 700.0;
};

// Largest underdamped step: c_r delta^2 sqrt(m) / eps with c_r = 0.2 (resolves the fast phase q/delta).
double h_max_underdamped(double eps, double delta, double m);
// Overdamped: 0.01 delta^2 / eps in slow time (fast-time step 0.01).
double h_max_overdamped(double eps, double delta);

struct OccupationHistogram {
  int z_bins = 1, p_bins = 0, r_bins = 0, t_windows = 0;
  double p_lo = 0, p_hi = 0, z_lo = 0, z_hi = 0, t_hi = 0;
  std::vector<double> mass;  // per path average, index ((z * p_bins + p) * r_bins + r) * t_windows + t
  double total() const;
};

struct PathEnsemble {
  SimConfig cfg;
  double eps = 0, delta = 0, m = 0, h = 0, window = 0;
  long steps = 0;          // steps to T
  long n_ok = 0;
  std::vector<Vec> q_T, p_T;      // per path (NaN for failed paths)
  std::vector<double> log_weight; // per path
  std::vector<char> ok;
  std::vector<double> record_times;
  Mat mean_path, var_path;        // records x d, over successful paths
  OccupationHistogram hist;
  Vec occ_mean, occ_abs, occ_se;  // per test: ensemble mean of int L^m g dP, mean |.|, standard error
  double mass_per_time = 0;       // hist.total() / T
  bool weights_clamped = false;
  std::vector<std::string> failures;  // first few failure messages
};

PathEnsemble simulate(const ProblemSpec& spec, const SimConfig& cfg);

// L^m g at (p, r) for the frozen slow point q.
double generator_on_test(const ProblemSpec& spec, const Vec& q, double m, const OccupationTest& g, const Vec& p,
                         const Vec& r);

struct LLNResult {
  Vec mean_qT, se_qT, ode_qT;
  double terminal_z = 0;   // max over components |mean - ode| / se
  double sup_distance = 0; // max over records and components of |mean - ode|
  double sup_z = 0;        // max over records of |mean - ode| / se
  bool pass = false;       // terminal |mean - ode| <= 3 se in every component
  std::vector<double> t;
  Mat mean_path, ode_path;
  long n_ok = 0;
};

// Ensemble mean against q' = r(q) by RK4 with r from `table` (r_m for underdamped, r_0 for overdamped).
LLNResult lln_check(const ProblemSpec& spec, const SimConfig& cfg, const CoeffTable& table);

// RK4 solution of q' = r(q) sampled at `times`.
Mat ode_path(const CoeffTable& table, bool limit, const Vec& q0, const std::vector<double>& times, int substeps = 20);

}  // namespace hypolab
