#pragma once

#include "hypolab/homogenize.hpp"

#include <functional>
#include <string>
#include <vector>

namespace hypolab {

// Uniform time grid t_k = k dt, k = 0..n, with node values phi_k.
struct DiscretePath {
  double dt = 0;
  std::vector<Vec> nodes;

  double horizon() const { return dt * double(nodes.size() - 1); }
  void validate() const;
  static DiscretePath sample(const std::function<Vec(double)>& phi, double T, int n);
};

// 0.5 (nu - r)^T Q^{-1} (nu - r)
double local_rate(const Vec& nu, const Coeffs& c);

enum class ActionKind { S_m, S_0 };

// Trapezoid over each interval with the forward-difference velocity held fixed:
// sum_k dt/2 [L(phi_k, v_k) + L(phi_{k+1}, v_k)], v_k = (phi_{k+1} - phi_k) / dt.
double action(const DiscretePath& path, const CoeffTable& table, ActionKind which);

// Feedback control z(p, r) = (1/sqrt m) sigma(r)^T (grad_p Phi)^T Q_m^{-1} (nu - r_m) with
// (grad_p Phi)_{la} = d Phi_l / d p_a. Evaluation uses a sparse copy of the coefficients.
class ControlField {
 public:
  ControlField() = default;
  ControlField(const ProblemSpec& spec, const Vec& q, const PhiResult& phi, const Coeffs& coeffs, const Vec& nu);

  int dim() const { return d_; }
  bool is_zero() const { return zero_; }
  const Vec& weight() const { return w_; }  // Q^{-1} (nu - r)
  // z at (p, r); r is the fast position (periodic).
  Vec eval(const Vec& p, const Vec& r) const;
  // (1/sqrt m) sum_l w_l d Phi_l / d p at (p, r), before multiplication by sigma^T.
  Vec covector(const Vec& p, const Vec& r) const;
  // Allocation-free variants for the stepping loop (arrays of length dim()).
  void eval_into(const double* p, const double* r, double* z) const;
  void covector_into(const double* p, const double* r, double* out) const;
  std::string describe() const;

 private:
  struct Term {
    std::vector<int> n;
    std::vector<int> f;  // 1D Fourier indices per axis
    double v[2];         // coefficient per p-axis (d <= 2)
  };
  ProblemSpec spec_;
  Vec q_, w_, nu_;
  int d_ = 0, nmax_ = 0;
  std::vector<int> kmax_;
  double beta_ = 1.0;
  bool zero_ = true, r_free_ = true;
  std::vector<Term> terms_;
  Mat sigma_const_;  // used when sigma does not depend on r
  bool sigma_constant_ = true;
};

struct ControlIdentity {
  double lhs = 0;  // int |z|^2 rho^m
  double rhs = 0;  // (nu - r)^T Q^{-1} (nu - r)
  double rel = 0;
};

// Both sides by collocation on the solved fields (FD and general sigma).
ControlIdentity control_identity(const ProblemSpec& spec, const Vec& q, const PhiResult& phi, const Coeffs& coeffs,
                                 const Vec& nu);

}  // namespace hypolab
