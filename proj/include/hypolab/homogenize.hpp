#pragma once

#include "hypolab/cell.hpp"

#include <vector>

namespace hypolab {

struct Coeffs {
  Vec r;
  Mat Q;                  // symmetrized
  double asymmetry = 0;   // max |Q - Q^T| / 2 before symmetrization
  double min_eig = 0;
};

// r_m = (1/sqrt m) int grad_p Phi c rho^m, Q_m = (1/m) int grad_p Phi alpha grad_p Phi^T rho^m.
// FD mode integrates in coefficient space; general sigma uses collocation. Throws TruncationError when Q_m
// is not positive definite.
Coeffs coeffs_from_phi(const ProblemSpec& spec, const Vec& q, const PhiResult& phi);
Coeffs coeffs_m(const ProblemSpec& spec, const Vec& q, double m, BasisPtr basis);

// r_0 = (1/lambda) int (I + d_r chi) c rho0, Q_0 = (1/lambda^2) int (I + d_r chi) alpha (I + d_r chi)^T rho0,
// by uniform quadrature that is exact for the band-limited integrand.
Coeffs coeffs_from_chi(const ProblemSpec& spec, const Vec& q, const ChiResult& chi);
Coeffs coeffs_0(const ProblemSpec& spec, const Vec& q, std::shared_ptr<const RBasis> rb);

// Collocation cross-check of coeffs_from_phi (used by tests and the identities report).
Coeffs coeffs_collocation(const ProblemSpec& spec, const Vec& q, const PhiResult& phi);

struct MassSweepRow {
  double m;
  Coeffs at_m;
  double diff_r;  // max norm |r_m - r_0|
  double diff_Q;  // max norm |Q_m - Q_0|
  Vec offset;     // b offsets used for Phi at this m
};

struct MassSweep {
  Vec q;
  Coeffs at_0;
  std::vector<MassSweepRow> rows;
  double slope_r = 0, slope_Q = 0;  // log-log slopes of the differences in m
  bool monotone_r = true, monotone_Q = true;
};

// `spec` must be centred for rho0. With `recalibrate` the offsets are recalibrated against rho^m at each m
// before Phi is solved (needed for non-gradient drifts, where int b rho^m differs from int b rho0).
MassSweep mass_sweep(const ProblemSpec& spec, const Vec& q, const std::vector<double>& m_list, int N, int K,
                     bool recalibrate, int jobs = 1);

// Coefficients at every point of the q-grid, at one mass and in the limit.
struct CoeffTable {
  std::vector<Vec> q_grid;
  std::vector<Coeffs> at_m, at_0;
  double m = 0;

  // Piecewise-linear interpolation along the (sorted) first coordinate of the grid; a single point is used
  // as is. Throws ExtrapolationError outside the grid.
  Coeffs interpolate(const Vec& q, bool limit) const;
};

CoeffTable coeff_table(const ProblemSpec& spec, double m, int N, int K, bool recalibrate, int jobs = 1);

}  // namespace hypolab
