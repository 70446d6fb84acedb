#include "hypolab/problem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hypolab {

Profile Profile::constant(double v) {
  Profile p;
  p.kind_ = Kind::constant;
  p.coeffs_ = {v};
  return p;
}

Profile Profile::polynomial(std::vector<double> coeffs, int axis) {
  if (coeffs.empty()) throw ParameterError("model", "polynomial profile needs at least one coefficient");
  Profile p;
  p.kind_ = coeffs.size() == 1 ? Kind::constant : Kind::polynomial;
  p.coeffs_ = std::move(coeffs);
  p.axis_ = axis;
  return p;
}

Profile Profile::table(std::vector<double> grid, std::vector<double> values, int axis) {
  if (grid.size() < 2 || grid.size() != values.size())
    throw ParameterError("model", "table profile needs >= 2 matching grid/value entries");
  if (!std::is_sorted(grid.begin(), grid.end()) ||
      std::adjacent_find(grid.begin(), grid.end()) != grid.end())
    throw ParameterError("model", "table profile grid must be strictly increasing");
  Profile p;
  p.kind_ = Kind::table;
  p.grid_ = std::move(grid);
  p.coeffs_ = std::move(values);
  p.axis_ = axis;
  return p;
}

namespace {
double coord(const Vec& q, int axis) {
  if (axis >= q.size()) throw ParameterError("model", "profile axis exceeds dimension of q");
  return q(axis);
}
}  // namespace

double Profile::operator()(const Vec& q) const {
  switch (kind_) {
    case Kind::constant:
      return coeffs_[0];
    case Kind::polynomial: {
      const double x = coord(q, axis_);
      double acc = 0.0;
      for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * x + *it;
      return acc;
    }
    case Kind::table: {
      const double x = coord(q, axis_);
      const double tol = 1e-12 * (1.0 + std::abs(x));
      if (x < grid_.front() - tol || x > grid_.back() + tol) {
        std::ostringstream os;
        os << "q = " << x << " outside tabulated range [" << grid_.front() << ", " << grid_.back() << "]";
        throw ExtrapolationError("model", os.str());
      }
      auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
      std::size_t i = std::clamp<std::size_t>(it - grid_.begin(), 1, grid_.size() - 1);
      const double t = (x - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
      return (1 - t) * coeffs_[i - 1] + t * coeffs_[i];
    }
  }
  return 0.0;
}

Vec Profile::gradient(const Vec& q) const {
  Vec g = Vec::Zero(q.size());
  switch (kind_) {
    case Kind::constant:
      break;
    case Kind::polynomial: {
      const double x = coord(q, axis_);
      double acc = 0.0;
      for (std::size_t j = coeffs_.size() - 1; j >= 1; --j) acc = acc * x + j * coeffs_[j];
      g(axis_) = acc;
      break;
    }
    case Kind::table: {
      const double x = coord(q, axis_);
      (void)(*this)(q);  // range check
      auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
      std::size_t i = std::clamp<std::size_t>(it - grid_.begin(), 1, grid_.size() - 1);
      g(axis_) = (coeffs_[i] - coeffs_[i - 1]) / (grid_[i] - grid_[i - 1]);
      break;
    }
  }
  return g;
}

std::string Profile::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::constant:
      os << coeffs_[0];
      break;
    case Kind::polynomial:
      os << "poly(";
      for (std::size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << coeffs_[i];
      os << ";axis=" << axis_ << ")";
      break;
    case Kind::table:
      os << "table(";
      for (std::size_t i = 0; i < grid_.size(); ++i) os << (i ? "," : "") << grid_[i] << ":" << coeffs_[i];
      os << ";axis=" << axis_ << ")";
      break;
  }
  return os.str();
}

double Series::eval(const Vec& q, const Vec& r) const {
  double acc = 0.0;
  for (const auto& t : terms) {
    double phase = 0.0;
    for (std::size_t a = 0; a < t.k.size(); ++a) phase += t.k[a] * r(a);
    phase *= kTwoPi;
    const double ca = t.cos_amp(q), sa = t.sin_amp(q);
    if (ca != 0.0) acc += ca * std::cos(phase);
    if (sa != 0.0) acc += sa * std::sin(phase);
  }
  return acc;
}

Vec Series::grad_r(const Vec& q, const Vec& r) const {
  Vec g = Vec::Zero(r.size());
  for (const auto& t : terms) {
    double phase = 0.0;
    for (std::size_t a = 0; a < t.k.size(); ++a) phase += t.k[a] * r(a);
    phase *= kTwoPi;
    const double d = -t.cos_amp(q) * std::sin(phase) + t.sin_amp(q) * std::cos(phase);
    for (std::size_t a = 0; a < t.k.size(); ++a) g(a) += kTwoPi * t.k[a] * d;
  }
  return g;
}

int Series::bandwidth(int axis) const {
  int bw = 0;
  for (const auto& t : terms)
    if (axis < static_cast<int>(t.k.size())) bw = std::max(bw, std::abs(t.k[axis]));
  return bw;
}

bool Series::depends_on_r(int axis) const { return bandwidth(axis) > 0; }

Series Series::scaled(double s) const {
  Series out = *this;
  for (auto& t : out.terms) {
    auto scale = [s](const Profile& p) {
      switch (p.kind()) {
        case Profile::Kind::constant:
          return Profile::constant(s * p.constant_value());
        case Profile::Kind::polynomial: {
          auto c = p.coeffs();
          for (auto& x : c) x *= s;
          return Profile::polynomial(c, p.axis());
        }
        case Profile::Kind::table: {
          auto v = p.coeffs();
          for (auto& x : v) x *= s;
          return Profile::table(p.grid(), v, p.axis());
        }
      }
      return p;
    };
    t.cos_amp = scale(t.cos_amp);
    t.sin_amp = scale(t.sin_amp);
  }
  return out;
}

}  // namespace hypolab
