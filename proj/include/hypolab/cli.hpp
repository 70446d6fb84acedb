#pragma once

#include "hypolab/problem.hpp"
#include "hypolab/report.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace hypolab {

// One experiment: a subcommand plus everything it reads. Zero / empty fields take per-command defaults.
struct ExperimentPlan {
  std::string command;  // check density cell homogenize sweep action simulate lln occupation is-estimate identities
  std::string config;   // INI file; overrides preset
  std::string preset;   // default depends on the command
  std::string out = "hypolab_out";
  bool write = true;    // false: compute only (no artifacts)
  std::uint64_t seed = 7;
  int hermite_N = 0, fourier_K = 0;
  std::vector<double> m_list;
  std::vector<Vec> q_grid;
  long paths = 0;
  double eps = 0, delta = 0, mass = 0;
  int jobs = 1;

  // simulation
  std::string system = "underdamped";
  double T = 1.0;
  double step_factor = 0;
  double nu = std::numeric_limits<double>::quiet_NaN();  // control velocity; NaN: aimed at the event boundary
  double sigmas = 4.0;     // is-estimate threshold in standard deviations of the limiting Gaussian
  bool plain = false;      // is-estimate without control
  double reference = -1, reference_se = 0;
  std::string reference_file;
  bool halve = true;       // occupation: second run at eps/2 with delta/eps^2 fixed

  // sweep / identities
  bool cross = false;      // sweep: cross-truncation at N + 20, K + 8
  int n_fields = 50;

  std::vector<std::string> argv;  // recorded in the sidecar
};

// Runs the plan, writes <out>/<command>.json plus CSVs, and returns the JSON result body.
Json run_plan(const ExperimentPlan& plan);

// Command-line entry point; returns the process exit status.
int run_cli(int argc, char** argv);

// Default mass list {0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005}.
std::vector<double> default_m_list();

// The problem a plan refers to (config file or preset, with eps/delta/mass overrides), before calibration.
ProblemSpec plan_spec(const ExperimentPlan& plan);

}  // namespace hypolab
