#pragma once

#include "hypolab/common.hpp"

#include <optional>
#include <string>
#include <vector>

namespace hypolab {

// Scalar function of the slow variable q. Polynomial and table profiles act
// along one coordinate axis of q.
class Profile {
 public:
  enum class Kind { constant, polynomial, table };

  Profile() = default;
  static Profile constant(double v);
  static Profile polynomial(std::vector<double> coeffs, int axis = 0);
  static Profile table(std::vector<double> grid, std::vector<double> values, int axis = 0);

  double operator()(const Vec& q) const;
  // Gradient with respect to q (length q.size()).
  Vec gradient(const Vec& q) const;

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }
  double constant_value() const { return coeffs_.empty() ? 0.0 : coeffs_[0]; }
  int axis() const { return axis_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  const std::vector<double>& grid() const { return grid_; }
  std::string describe() const;

 private:
  Kind kind_ = Kind::constant;
  int axis_ = 0;
  std::vector<double> coeffs_{0.0};  // polynomial coefficients, or table values
  std::vector<double> grid_;
};

// a*cos(2 pi k.r) + b*sin(2 pi k.r); real by construction.
struct FourierTerm {
  std::vector<int> k;
  Profile cos_amp;
  Profile sin_amp;
};

struct Series {
  std::vector<FourierTerm> terms;

  double eval(const Vec& q, const Vec& r) const;
  Vec grad_r(const Vec& q, const Vec& r) const;
  // Largest |k_axis| among the terms.
  int bandwidth(int axis) const;
  bool depends_on_r(int axis) const;
  Series scaled(double s) const;
};

enum class SigmaMode { fluctuation_dissipation, general_matrix };

struct ProblemSpec {
  std::string name = "custom";
  int dim = 1;
  std::vector<Series> b;             // dim components
  std::vector<Series> c;             // dim components
  std::vector<double> b_offset;      // constant added to each b component
  std::vector<bool> b_offset_free;   // offsets that calibrate_centering may move
  SigmaMode sigma_mode = SigmaMode::fluctuation_dissipation;
  std::vector<Series> sigma;         // dim*dim row-major, general_matrix only
  Profile lambda = Profile::constant(1.0);
  double lambda_lo = 1.0;
  double lambda_hi = 1.0;
  double beta = 1.0;
  double eps = 0.1;
  double delta = 0.02;
  double mass = 0.1;
  Vec q0;
  std::optional<Vec> p0;             // unset: p0 ~ N(0, beta I)
  std::vector<Vec> q_grid;           // frozen slow points; default {0}

  void validate() const;
  bool has_free_offset() const;
  // Largest wave number along r-axis `axis` over b, c and sigma.
  int bandwidth(int axis) const;
  // True when no coefficient depends on r_axis (fields stay r_axis-free).
  bool r_axis_inactive(int axis) const;
};

struct CoeffValues {
  Vec b, c;
  Mat sigma, alpha;
  double lambda = 1.0;
  Vec grad_lambda;
};

CoeffValues eval_coefficients(const ProblemSpec& spec, const Vec& q, const Vec& r);
double lambda_at(const ProblemSpec& spec, const Vec& q);

enum class PresetName { constant_coeff, gradient_drift, tilted_nongradient };

PresetName parse_preset(const std::string& name);
std::string preset_name(PresetName p);
ProblemSpec make_preset(PresetName p);

// Sup of |b_l - offset_l| over a sampling grid, per component.
Vec drift_sup_norm(const ProblemSpec& spec, const Vec& q, int samples = 64);

struct ConditionReport {
  double lambda_min = 0, lambda_max = 0;
  bool lambda_ok = false;
  double alpha_floor = 0;
  bool alpha_ok = false;
  Vec centering_residual;  // int b rho0 dr at q, per component
  bool centering_ok = false;
  double delta_over_eps = 0;
  bool scale_ok = false;
  std::vector<std::string> flags;
  bool all_ok() const { return lambda_ok && alpha_ok && centering_ok && scale_ok; }
};

// `q_samples` defaults to the problem's q-grid. Centering uses the stationary solver
// at the given Fourier truncation.
ConditionReport check_conditions(const ProblemSpec& spec, const std::vector<Vec>& q_samples = {},
                                 int fourier_K = 16, double centering_tol = 1e-8);

}  // namespace hypolab
