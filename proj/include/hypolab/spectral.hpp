#pragma once

#include "hypolab/common.hpp"
#include "hypolab/problem.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace hypolab {

// Orthonormal Hermite functions for the Gaussian weight of variance beta:
// H_n(p) = He_n(p / sqrt(beta)) / sqrt(n!).
namespace hermite {
void eval(int N, double beta, double x, double* out);
void eval_deriv(int N, double beta, double x, const double* h, double* out);
Mat p_mult(int N, double beta);   // p H_n = sqrt(beta) (sqrt(n+1) H_{n+1} + sqrt(n) H_{n-1})
Mat d_dp(int N, double beta);     // d/dp H_n = sqrt(n / beta) H_{n-1}
struct Rule {
  Vec nodes, weights;  // weights sum to 1
};
Rule gauss(int n, double beta);
// Integral of H_a H_b H_c against the Gaussian weight.
double triple(int a, int b, int c);
}  // namespace hermite

// Real trigonometric basis on the torus: per axis [1, sqrt2 cos(2 pi k r), sqrt2 sin(2 pi k r)]
// for k = 1..K_a, tensorised with axis 0 slowest.
class RBasis {
 public:
  explicit RBasis(std::vector<int> K);

  int dim() const { return static_cast<int>(K_.size()); }
  int K(int axis) const { return K_[axis]; }
  const std::vector<int>& Ks() const { return K_; }
  int size() const { return F_; }
  int axis_size(int axis) const { return 2 * K_[axis] + 1; }
  // Wave number of 1D index j (0 for the constant).
  static int wave(int j) { return (j + 1) / 2; }

  void eval(const Vec& r, double* out) const;
  Vec eval(const Vec& r) const;
  static void eval_axis(int K, double r, double* out);
  // d/dr_axis as an F x F matrix (maps the space into itself).
  SpMat deriv(int axis) const;
  Mat deriv_dense(int axis) const;

  // Uniform grid sizes that integrate products of two basis functions and a
  // weight of the given per-axis bandwidth exactly.
  std::vector<int> grid_for(const std::vector<int>& weight_bw) const;
  // Galerkin matrix int F_i w F_j dr, w given on the uniform grid of size M.
  Mat galerkin(const std::vector<int>& M, const Vec& w_values) const;
  // Coefficients of a function sampled on the grid (exact when band-limited within the grid).
  Vec project(const std::vector<int>& M, const Vec& values) const;
  // Values of a coefficient vector on the grid.
  Vec on_grid(const std::vector<int>& M, const Vec& coef) const;
  // Grid point with flat index idx.
  Vec grid_point(const std::vector<int>& M, long idx) const;
  static long grid_count(const std::vector<int>& M);
  // Evaluate a function on the grid.
  Vec sample(const std::vector<int>& M, const std::function<double(const Vec&)>& f) const;

 private:
  std::vector<int> K_;
  int F_;
};

struct RField {
  std::shared_ptr<const RBasis> basis;
  Vec coef;
  double eval(const Vec& r) const;
  Vec grad(const Vec& r) const;
};

class TensorBasis {
 public:
  TensorBasis(int d, int N, std::vector<int> K, double beta);

  int dim() const { return d_; }
  int N() const { return N_; }
  double beta() const { return beta_; }
  long size() const { return D_; }
  long hermite_size() const { return H_; }
  int F() const { return rbasis_->size(); }
  const RBasis& r() const { return *rbasis_; }
  std::shared_ptr<const RBasis> r_ptr() const { return rbasis_; }

  long index(const std::vector<int>& n, int f) const;
  // Hermite multi-index of flat Hermite index h (axis 0 slowest).
  std::vector<int> hermite_index(long h) const;
  int total_degree(long h) const;
  int max_degree(long h) const;
  // Flat index of the degree-1 function in p_axis (coefficient of p_axis is sqrt(beta)).
  long p_index(int axis) const;

  bool same_as(const TensorBasis& o) const;
  std::string describe() const;

  static long& memory_cap();

 private:
  int d_, N_;
  double beta_;
  long H_, D_;
  std::shared_ptr<const RBasis> rbasis_;
};

using BasisPtr = std::shared_ptr<const TensorBasis>;

// pre: N >= 4, K >= 2 on active axes. Axes listed in `reduced_axes` get K = 0
// (exact reduction for coefficients independent of that r-axis).
BasisPtr build_basis(int d, int N, int K, double beta, const std::vector<int>& reduced_axes = {});
BasisPtr build_basis(int d, int N, const std::vector<int>& K, double beta);
// Basis for `spec`: reduces r-axes on which no coefficient depends (d = 2 only).
BasisPtr basis_for(const ProblemSpec& spec, int N, int K);
std::shared_ptr<const RBasis> rbasis_for(const ProblemSpec& spec, int K);

struct SpectralField {
  BasisPtr basis;
  std::vector<Vec> comp;

  int components() const { return static_cast<int>(comp.size()); }
  double eval(const Vec& p, const Vec& r, int component = 0) const;
  static SpectralField zeros(BasisPtr b, int ncomp = 1);
  // r-only field embedded at Hermite degree 0.
  static SpectralField from_r(BasisPtr b, const std::vector<Vec>& rcoef);
  // The function p_axis.
  static SpectralField p_coordinate(BasisPtr b, int axis);
};

// Hermite degree-0 block of a coefficient vector.
Vec hermite_block0(const TensorBasis& b, const Vec& c);

// --- operators -----------------------------------------------------------

struct OperatorMatrix {
  BasisPtr basis;
  SpMat mat;
  std::string label;  // A, B, L_m, L0, L_m_adjoint, grad_p_i, grad_r_i, mult_h_p
};

// Optional Fourier weight w(r) for Galerkin in L2(rho_OU x w dr). nullptr: w = 1.
using RWeight = const RField*;

OperatorMatrix assemble_A(BasisPtr basis, RWeight w = nullptr);
OperatorMatrix assemble_B(BasisPtr basis, const ProblemSpec& spec, const Vec& q, RWeight w = nullptr);
// (lambda/m) A + (1/sqrt m) B in FD mode; full second-order form otherwise.
OperatorMatrix assemble_generator(BasisPtr basis, const ProblemSpec& spec, const Vec& q, double m,
                                  RWeight w = nullptr);
// Transpose of the plain Galerkin generator: acts on rho^m / rho_OU coefficients.
OperatorMatrix assemble_generator_adjoint(BasisPtr basis, const ProblemSpec& spec, const Vec& q, double m);
OperatorMatrix grad_p(BasisPtr basis, int axis);
OperatorMatrix grad_r(BasisPtr basis, int axis);
OperatorMatrix mult_p(BasisPtr basis, int axis);
// Galerkin of f -> (p.h) f in L2(rho0), built from rho0 h = rho0 b / beta - grad rho0.
OperatorMatrix mult_h_p(BasisPtr basis, const ProblemSpec& spec, const Vec& q, const RField& rho0);
// Gram matrix I (x) M_w.
SpMat gram(BasisPtr basis, const RField& w);

// L0 = (1/lambda) b.grad_r + (1/(2 lambda^2)) alpha : grad_r^2 as a Galerkin matrix.
Mat assemble_L0(const RBasis& rb, const ProblemSpec& spec, const Vec& q, RWeight w = nullptr);
// Fourier Galerkin of a spec-derived function g(r) (weighted by w if given).
Mat r_galerkin(const RBasis& rb, const std::function<double(const Vec&)>& g, const std::vector<int>& g_bw,
               RWeight w = nullptr);

// Fourier coefficients of a series (plus a constant offset) at q, projected onto `rb`.
Vec project_series(const RBasis& rb, const Series& s, const Vec& q, double offset = 0.0);

// Drift bandwidth per axis; warns (returns true) if it exceeds K.
bool drift_exceeds_truncation(const RBasis& rb, const ProblemSpec& spec);

SpMat kron(const SpMat& a, const SpMat& b);
SpMat sparse_from_dense(const Mat& m, double rel_drop = 1e-15);

// --- quadrature and inner products ----------------------------------------

// Gauss-Hermite x uniform grid sized to integrate triple products exactly.
class Collocation {
 public:
  Collocation(BasisPtr basis, int extra_r_bw = 0, int extra_hermite = 0);
  const TensorBasis& basis() const { return *basis_; }
  long p_points() const { return Pq_; }
  long r_points() const { return Rq_; }
  long points() const { return Pq_ * Rq_; }
  // Values of a coefficient vector at all grid points (p index slowest).
  Vec values(const Vec& coef) const;
  Vec values_dp(const Vec& coef, int axis) const;
  Vec values_dr(const Vec& coef, int axis) const;
  // Values of an r-only function at all grid points.
  Vec r_values(const std::function<double(const Vec&)>& f) const;
  Vec p_coordinate(int axis) const;
  const Vec& weights() const { return w_; }  // product weights, sum to 1
  Vec r_point(long ir) const;
  Vec p_point(long ip) const;
  double integrate(const Vec& v) const { return w_.dot(v); }
  const std::vector<int>& r_grid() const { return M_; }

 private:
  BasisPtr basis_;
  int nq_;
  long Pq_, Rq_;
  std::vector<int> M_;
  Mat EH_;                  // nq x N Hermite values
  std::vector<Mat> EF_;     // per axis: M_a x (2K_a+1)
  hermite::Rule rule_;
  Vec w_;
  Vec apply(const Vec& coef) const;
};

enum class Weight { rho0, rho_m };

struct DensitySet;

// Collocation inner product in L2(rho0) or L2(rho^m).
double inner_product(const SpectralField& f, const SpectralField& g, Weight w, const DensitySet& dens,
                     int fc = 0, int gc = 0);
double norm_H1(const SpectralField& f, Weight w, const DensitySet& dens, int fc = 0);

// Coefficient-space integral of f g G rho_OU dp dr (Hermite linearisation x exact trig quadrature).
double triple_integral(const TensorBasis& b, const Vec& f, const Vec& g, const Vec& G);

struct DecayRow {
  int degree;
  double tail_fraction;
};
// Energy fraction above max Hermite degree n for n = N/2 .. N-1.
std::vector<DecayRow> hermite_decay_report(const SpectralField& f, int component = 0);

// --- tensor dump -----------------------------------------------------------

void write_tensor(const std::string& path, const std::string& label, const std::vector<long>& shape,
                  const std::vector<double>& values);
void read_tensor(const std::string& path, std::string& label, std::vector<long>& shape,
                 std::vector<double>& values);
void dump_field(const std::string& path, const SpectralField& f, const std::string& label);

}  // namespace hypolab
