#pragma once

#include "hypolab/problem.hpp"

namespace hypolab {

enum class CenteringTarget {
  overdamped,   // int b rho0 dr = 0
  hypoelliptic  // int b rho^m dp dr = 0 at the working mass
};

struct CenteringOptions {
  CenteringTarget target = CenteringTarget::overdamped;
  double tol = 1e-10;
  int fourier_K = 16;
  int hermite_N = 24;  // hypoelliptic target only
  double mass = 0;     // 0: spec.mass
  int max_iter = 60;
};

struct CenteringResult {
  ProblemSpec spec;  // copy with calibrated offsets
  Vec offset;
  Vec residual;      // for the chosen target
  Vec residual_rho0;
  Vec residual_rho_m;  // at the working mass, low-truncation solve
  int iterations = 0;
};

// Moves the free constant offsets of b until the centering integral vanishes.
// The residual R(a) = a + int b rho(a) is bracketed by |a_l| <= sup |b_l|.
CenteringResult calibrate_centering(const ProblemSpec& spec, const Vec& q, const CenteringOptions& opt = {});

}  // namespace hypolab
