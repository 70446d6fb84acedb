#pragma once

#include "hypolab/dynamics.hpp"

#include <functional>
#include <string>

namespace hypolab {

// Rare event on the terminal slow position.
struct Event {
  enum class Kind { terminal_ge, whole_space, functional };
  Kind kind = Kind::whole_space;
  int component = 0;
  double threshold = 0;
  std::function<double(const Vec&)> h;  // functional: indicator-like weight of q_T
  std::string label;

  double operator()(const Vec& qT) const;
  static Event terminal_at_least(int component, double threshold);
  static Event whole_space();
};

struct ISEstimate {
  double estimate = 0, std_error = 0;          // unbiased: mean of w 1_A
  double self_normalized = 0, sn_std_error = 0;  // sum w 1_A / sum w, delta-method error
  double mean_weight = 0;
  double ess = 0;                               // (sum w)^2 / sum w^2
  long n = 0, hits = 0;
  double variance_ratio = 0;                    // p(1-p) / var(w 1_A), p from the reference when given
  double reference = -1, reference_se = 0;
  double combined_z = 0;                        // |estimate - reference| / sqrt(se^2 + se_ref^2)
  bool weights_clamped = false;
  std::uint64_t seed = 0;
  std::string policy;
};

// n_samples below 100 is rejected. Pass reference < 0 to use the estimate itself in the variance ratio.
ISEstimate is_estimate(const ProblemSpec& spec, const SimConfig& cfg, const Event& event, double reference = -1,
                       double reference_se = 0);

// Estimate from an already simulated ensemble.
ISEstimate estimate_from_ensemble(const PathEnsemble& ens, const Event& event, double reference = -1,
                                  double reference_se = 0);

}  // namespace hypolab
