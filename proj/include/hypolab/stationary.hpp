#pragma once

#include "hypolab/spectral.hpp"

#include <vector>

namespace hypolab {

struct Rho0Info {
  double residual = 0;   // |(L0)^T rho0|
  double min_value = 0;  // minimum on a fine grid
};

// Invariant density of the overdamped fast process, normalised to unit mass.
RField solve_rho0(const ProblemSpec& spec, const Vec& q, std::shared_ptr<const RBasis> rb,
                  Rho0Info* info = nullptr);

// h_a = b_a / beta - d_a log rho0, sampled with the floor rho0 >= rho_floor and projected.
std::vector<RField> defect_field(const ProblemSpec& spec, const Vec& q, const RField& rho0,
                                 double rho_floor = 1e-12);

struct DensityNorms {
  double L2 = 0, H1 = 0, grad_p = 0, grad_r = 0;
};

struct DensitySet {
  BasisPtr basis;
  double m = 0;
  RField rho0;
  SpectralField g;               // rho^m / rho_OU (route 1), unit mass
  SpectralField rho_m_tilde;     // rho^m / rho^0 (route 1)
  SpectralField delta_m;         // route 2
  SpectralField delta_m_route1;  // route 1
  std::vector<RField> h;
  DensityNorms norms;
  double route_agreement = 0;    // |delta_route1 - delta_route2| in L2(rho0)
  double nullspace_residual = 0;
  double zero_mean = 0;          // int delta rho0
  double route2_multiplier = 0;
  Vec centering_residual_m;      // int b rho^m dp dr
};

struct StationaryOptions {
  double route_tol = 1e-7;   // flagged above this
  double route_fail = 1e-5;  // consistency error above this
  bool both_routes = true;
};

// Route 1 only: rho^m / rho_OU as the null vector of the transposed generator.
SpectralField solve_invariant(const ProblemSpec& spec, const Vec& q, double m, BasisPtr basis,
                              double* residual = nullptr);
Vec centering_residual(const ProblemSpec& spec, const Vec& q, const SpectralField& g);
Vec centering_residual0(const ProblemSpec& spec, const Vec& q, const RField& rho0);

DensitySet solve_rho_m(const ProblemSpec& spec, const Vec& q, double m, BasisPtr basis,
                       const StationaryOptions& opt = {});

// Energy balance lambda beta |grad_p delta|^2 - (sqrt m/2)<p.h, delta^2> - sqrt m <p.h, delta>,
// each term by quadrature. Returns {lhs, rhs}.
std::pair<double, double> gradient_identity(const ProblemSpec& spec, const Vec& q, const DensitySet& dens);

struct HypoRow {
  double m;
  DensityNorms norms;
  double slope_so_far;
  double gradient_identity_rel;
  double route_agreement;
  double zero_mean;
};

struct HypoSweep {
  std::vector<HypoRow> rows;
  double slope = 0;      // least squares slope of log |delta| vs log m
  bool monotone = true;  // strictly decreasing along the (descending) list
};

HypoSweep hypocoercivity_sweep(const ProblemSpec& spec, const Vec& q, const std::vector<double>& m_list,
                               BasisPtr basis, const StationaryOptions& opt = {}, int jobs = 1);

// -max Re(mu) over nonzero eigenvalues of the discretised L^1.
double spectral_gap(const ProblemSpec& spec, const Vec& q, BasisPtr basis);

double fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace hypolab
