#include "hypolab/importance.hpp"

#include <cmath>
#include <sstream>

namespace hypolab {

double Event::operator()(const Vec& qT) const {
  switch (kind) {
    case Kind::terminal_ge:
      return qT(component) >= threshold ? 1.0 : 0.0;
    case Kind::whole_space:
      return 1.0;
    case Kind::functional:
      return h(qT);
  }
  return 0.0;
}

Event Event::terminal_at_least(int component, double threshold) {
  Event e;
  e.kind = Kind::terminal_ge;
  e.component = component;
  e.threshold = threshold;
  std::ostringstream os;
  os.precision(10);
  os << "q_T[" << component << "] >= " << threshold;
  e.label = os.str();
  return e;
}

Event Event::whole_space() {
  Event e;
  e.label = "whole space";
  return e;
}

ISEstimate estimate_from_ensemble(const PathEnsemble& ens, const Event& event, double reference,
                                  double reference_se) {
  ISEstimate r;
  r.seed = ens.cfg.seed;
  r.policy = ens.cfg.control ? ens.cfg.control->describe() : "none";
  r.weights_clamped = ens.weights_clamped;
  double sw = 0, sw2 = 0, sx = 0, sx2 = 0;
  for (std::size_t i = 0; i < ens.q_T.size(); ++i) {
    if (!ens.ok[i]) continue;
    const double w = std::exp(ens.log_weight[i]);
    const double a = event(ens.q_T[i]);
    ++r.n;
    if (a != 0.0) ++r.hits;
    sw += w;
    sw2 += w * w;
    sx += w * a;
    sx2 += (w * a) * (w * a);
  }
  if (r.n < 2) throw SimulationError("ldp", "too few successful paths for an estimate");
  const double n = double(r.n);
  r.estimate = sx / n;
  const double var = std::max(0.0, sx2 / n - r.estimate * r.estimate) * n / (n - 1);
  r.std_error = std::sqrt(var / n);
  r.mean_weight = sw / n;
  r.ess = sw2 > 0 ? sw * sw / sw2 : 0.0;
  r.self_normalized = sx / sw;
  double sn = 0;
  for (std::size_t i = 0; i < ens.q_T.size(); ++i) {
    if (!ens.ok[i]) continue;
    const double w = std::exp(ens.log_weight[i]);
    const double dev = w * (event(ens.q_T[i]) - r.self_normalized);
    sn += dev * dev;
  }
  r.sn_std_error = std::sqrt(sn) / sw;
  r.reference = reference;
  r.reference_se = reference_se;
  const double p = reference >= 0 ? reference : r.estimate;
  r.variance_ratio = var > 0 ? p * (1 - p) / var : (p > 0 && p < 1 ? INFINITY : 0.0);
  if (reference >= 0) {
    const double se = std::sqrt(r.std_error * r.std_error + reference_se * reference_se);
    const double dev = std::abs(r.estimate - reference);
    r.combined_z = se > 0 ? dev / se : (dev > 0 ? INFINITY : 0.0);
  }
  return r;
}

ISEstimate is_estimate(const ProblemSpec& spec, const SimConfig& cfg, const Event& event, double reference,
                       double reference_se) {
  if (cfg.n_paths < 100) throw ParameterError("ldp", "importance sampling needs at least 100 samples");
  return estimate_from_ensemble(simulate(spec, cfg), event, reference, reference_se);
}

}  // namespace hypolab
