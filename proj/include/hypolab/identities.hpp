#pragma once

#include "hypolab/stationary.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hypolab {

// Seeded random coefficients on Hermite degrees < hermite_max (per axis) and Fourier wave numbers
// <= fourier_max, with amplitudes decaying like exp(-0.3 (degree + wave)). Deterministic in (seed, index).
Vec random_field(const TensorBasis& b, std::uint64_t seed, std::uint64_t index, int hermite_max, int fourier_max);

struct IdentityCheck {
  std::string name;
  long index = 0;  // field number (0 for solved fields)
  double lhs = 0, rhs = 0, rel = 0, tol = 0;
  bool pass() const { return rel <= tol; }
};

struct IdentitySuiteOptions {
  int n_fields = 50;
  std::uint64_t seed = 7;
  int hermite_N = 16, fourier_K = 8;
  double m = 0.1;
  double tol_ibp = 1e-8;       // generator energy and transport identities
  double tol_density = 1e-7;   // gradient identity on the solved density deviation
  double tol_corrector = 1e-6; // gradient identity of the third-order corrector
};

struct IdentitySuite {
  std::vector<IdentityCheck> checks;
  bool pass() const;
  // Largest relative residual per identity name, in first-appearance order.
  std::vector<std::pair<std::string, double>> worst() const;
};

// With f, g random and rho0 the truncated overdamped density of `spec` at q:
//   generator_energy:   <L^m f, f> = -(lambda beta / m) |grad_p f|^2 + (1 / (2 sqrt m)) <p.h, f^2>
//   transport_adjoint:  <B f, g> = <f, -B g + (p.h) g>
//   transport_quadratic: <f, B f> = (1/2) <p.h, f^2>
// all in L2(rho0); left sides use the assembled Galerkin matrices, right sides pointwise collocation.
// `spec` must be centred for rho0.
std::vector<IdentityCheck> transport_identities(const ProblemSpec& spec, const Vec& q, const IdentitySuiteOptions& opt);

// Full suite: the three random-field identities on `spec`, the density-deviation gradient identity on the solved
// delta^m of `spec`, and the corrector identity on `corrector_spec` (a preset with a nontrivial expansion).
IdentitySuite identity_suite(const ProblemSpec& spec, const ProblemSpec& corrector_spec, const Vec& q,
                             const IdentitySuiteOptions& opt = {});

}  // namespace hypolab
