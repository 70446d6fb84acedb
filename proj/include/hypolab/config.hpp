#pragma once

#include "hypolab/problem.hpp"

#include <string>

namespace hypolab {

// INI-style problem description:
//
//   [problem]
//   preset = gradient_drift        # optional starting point
//   dim = 1
//   lambda = 1                     # number | poly(c0,c1,..[;axis=i]) | table(q:v,..[;axis=i])
//   lambda_lo = 1
//   lambda_hi = 1
//   beta = 1
//   sigma_mode = fluctuation_dissipation
//   q0 = 0
//   q_grid = 0 ; 0.5               # points separated by ';', coordinates by ','
//
//   [coefficients.b]
//   mode = component=0 k=1 cos=0 sin=6.283185307179586
//   offset = 0
//   free = true
//
//   [coefficients.c]
//   mode = component=0 k=0 cos=1
//
//   [scales]
//   eps = 0.1
//   delta = 0.02
//   mass = 0.1
//
// '#' starts a comment. Errors carry the line number.
ProblemSpec parse_config(const std::string& text, const std::string& source = "<config>");
ProblemSpec load_config(const std::string& path);
Profile parse_profile(const std::string& text);

// Canonical text form of a spec (round-trips through parse_config); used for hashing.
std::string canonical_config(const ProblemSpec& spec);

}  // namespace hypolab
