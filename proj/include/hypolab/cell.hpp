#pragma once

#include "hypolab/spectral.hpp"

#include <vector>

namespace hypolab {

struct ChiResult {
  std::vector<RField> chi;  // one per component, zero rho0-mean
  RField rho0;
  double residual = 0;      // max over components of |L0 chi + b/lambda|
  Vec solvability;          // int b_l rho0 dr / lambda, per component
};

// L0 chi_l = -b_l / lambda with int chi_l rho0 = 0.
ChiResult solve_chi(const ProblemSpec& spec, const Vec& q, std::shared_ptr<const RBasis> rb,
                    double solvability_tol = 1e-8);

struct PhiResult {
  SpectralField phi;     // d components
  SpectralField psi;     // Phi - (sqrt m / lambda) p, zero rho^m-mean
  SpectralField g;       // rho^m / rho_OU
  double m = 0;
  double residual = 0;   // relative residual of the Psi solve
  Vec solvability;       // int b_l rho^m / lambda, per component
};

// Solves L^m Psi_l = -b_l / lambda, then Phi_l = Psi_l + (sqrt m / lambda) p_l, rho^m-mean removed.
PhiResult solve_phi(const ProblemSpec& spec, const Vec& q, double m, BasisPtr basis,
                    double solvability_tol = 1e-8);

// (1/sqrt m) d Phi_l / d p_a as a d*d-component field, component l*d + a.
SpectralField scaled_grad_p(const PhiResult& phi);

// chi embedded at Hermite degree 0 of `basis`.
SpectralField embed_chi(BasisPtr basis, const ChiResult& chi);

struct Expansion {
  SpectralField psi0, psi1, psi2;  // d components each
  double first_order_residual = 0; // |B Psi0 + lambda A Psi1|
  double degree0_mismatch = 0;     // degree-0 part of -b/lambda - B Psi1 (must vanish)
  double gauge_multiplier = 0;
};

// Psi0 = chi, Psi1 = (1/lambda) grad_r chi . p, Psi2 from lambda A Psi2 = -b/lambda - B Psi1 on degrees >= 1;
// the degree-0 part of Psi2 solves lambda L0 psi2hat = P0 B A^{-1} B Psi2perp with zero rho0-mean.
Expansion expansion_terms(const ProblemSpec& spec, const Vec& q, BasisPtr basis, const ChiResult& chi,
                          double mismatch_tol = 1e-8);

struct Remainder {
  SpectralField psi3_sub;     // Psi - Psi0 - sqrt m Psi1 - m Psi2
  SpectralField psi3_direct;  // L^m Psi3 = -sqrt m B Psi2
  double route_agreement = 0;
  double expansion_consistency = 0;
  Vec norm_L2_rho0;           // |Psi3_l|_{L2(rho0)}
  Vec grad_norm_rho_m;        // |(1/sqrt m) grad_p Psi3_l|_{L2(rho^m)}
  Vec identity_lhs, identity_rhs, identity_rel;  // |(1/sqrt m) grad_p Psi3|^2 vs (sqrt m/(lambda beta)) <B Psi2, Psi3>
  Vec half_constant_ratio;   // lhs / ((sqrt m / 2) <B Psi2, Psi3>)
  double mean_rho_m = 0;      // <Psi3, 1>_{rho^m}, max over components
};

Remainder remainder_psi3(const ProblemSpec& spec, const Vec& q, const PhiResult& phi, const Expansion& ex,
                         const RField& rho0, double route_tol = 1e-7);

// |(1/sqrt m) grad_p Phi - (1/lambda)(I + grad_r chi)|_{L2(rho0)}
double cell_metric(const ProblemSpec& spec, const Vec& q, const PhiResult& phi, const ChiResult& chi);

struct CellMetricRow {
  double m;
  double metric;
  Vec offset;  // b offsets used for Phi at this m
  Vec centering_rho_m;
};

// `spec` is the overdamped-calibrated problem; when `recalibrate` is set the Phi solve at each m uses
// offsets recalibrated against rho^m.
std::vector<CellMetricRow> cell_convergence_metric(const ProblemSpec& spec, const Vec& q,
                                                   const std::vector<double>& m_list, int N, int K,
                                                   bool recalibrate, int jobs = 1);

struct Psi3Row {
  double m;
  double norm;        // max over components of |Psi3|_{L2(rho0)}
  double grad_norm;   // max over components of |(1/sqrt m) grad_p Psi3|_{L2(rho^m)}
  double route_agreement;
  double identity_rel;
  double half_constant_ratio;
};

std::vector<Psi3Row> psi3_sweep(const ProblemSpec& spec, const Vec& q, const std::vector<double>& m_list, int N,
                                int K, int jobs = 1);

}  // namespace hypolab
