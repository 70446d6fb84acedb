#include "hypolab/spectral.hpp"

#include <sstream>

namespace hypolab {

long& TensorBasis::memory_cap() {
  static long cap = 400000;
  return cap;
}

TensorBasis::TensorBasis(int d, int N, std::vector<int> K, double beta)
    : d_(d), N_(N), beta_(beta), H_(1), D_(0), rbasis_(std::make_shared<RBasis>(std::move(K))) {
  if (d < 1 || d > 2) throw BasisError("spectral", "dimension must be 1 or 2");
  if (rbasis_->dim() != d) throw BasisError("spectral", "Fourier truncation list must have d entries");
  if (beta <= 0) throw ParameterError("spectral", "beta must be positive");
  for (int a = 0; a < d; ++a) H_ *= N;
  D_ = H_ * rbasis_->size();
}

long TensorBasis::index(const std::vector<int>& n, int f) const {
  long h = 0;
  for (int a = 0; a < d_; ++a) h = h * N_ + n[a];
  return h * F() + f;
}

std::vector<int> TensorBasis::hermite_index(long h) const {
  std::vector<int> n(d_);
  for (int a = d_ - 1; a >= 0; --a) {
    n[a] = static_cast<int>(h % N_);
    h /= N_;
  }
  return n;
}

int TensorBasis::total_degree(long h) const {
  int s = 0;
  for (int v : hermite_index(h)) s += v;
  return s;
}

int TensorBasis::max_degree(long h) const {
  int s = 0;
  for (int v : hermite_index(h)) s = std::max(s, v);
  return s;
}

long TensorBasis::p_index(int axis) const {
  std::vector<int> n(d_, 0);
  n[axis] = 1;
  return index(n, 0);
}

bool TensorBasis::same_as(const TensorBasis& o) const {
  return d_ == o.d_ && N_ == o.N_ && beta_ == o.beta_ && r().Ks() == o.r().Ks();
}

std::string TensorBasis::describe() const {
  std::ostringstream os;
  os << "d=" << d_ << " N=" << N_ << " K=[";
  for (int a = 0; a < d_; ++a) os << (a ? "," : "") << r().K(a);
  os << "] beta=" << beta_ << " D=" << D_;
  return os.str();
}

BasisPtr build_basis(int d, int N, const std::vector<int>& K, double beta) {
  if (N < 4) throw BasisError("spectral", "Hermite order N must be >= 4");
  long D = 1;
  for (int a = 0; a < d; ++a) D *= N;
  for (int k : K) D *= 2 * k + 1;
  if (D > TensorBasis::memory_cap()) {
    std::ostringstream os;
    os << "basis size D=" << D << " exceeds memory cap " << TensorBasis::memory_cap();
    throw SizeError("spectral", os.str());
  }
  return std::make_shared<TensorBasis>(d, N, K, beta);
}

BasisPtr build_basis(int d, int N, int K, double beta, const std::vector<int>& reduced_axes) {
  if (K < 2) throw BasisError("spectral", "Fourier truncation K must be >= 2");
  std::vector<int> Ks(d, K);
  for (int a : reduced_axes) {
    if (a < 0 || a >= d) throw BasisError("spectral", "reduced axis out of range");
    Ks[a] = 0;
  }
  return build_basis(d, N, Ks, beta);
}

namespace {
std::vector<int> reduced_axes_for(const ProblemSpec& spec) {
  std::vector<int> red;
  if (spec.dim < 2) return red;
  for (int a = 0; a < spec.dim; ++a)
    if (spec.r_axis_inactive(a)) red.push_back(a);
  if (static_cast<int>(red.size()) == spec.dim) red.clear();
  return red;
}
}  // namespace

BasisPtr basis_for(const ProblemSpec& spec, int N, int K) {
  return build_basis(spec.dim, N, K, spec.beta, reduced_axes_for(spec));
}

std::shared_ptr<const RBasis> rbasis_for(const ProblemSpec& spec, int K) {
  std::vector<int> Ks(spec.dim, K);
  for (int a : reduced_axes_for(spec)) Ks[a] = 0;
  return std::make_shared<RBasis>(Ks);
}

double SpectralField::eval(const Vec& p, const Vec& r, int component) const {
  const TensorBasis& b = *basis;
  const int N = b.N(), d = b.dim();
  std::vector<double> h(static_cast<std::size_t>(N) * d);
  for (int a = 0; a < d; ++a) hermite::eval(N, b.beta(), p(a), h.data() + a * N);
  const Vec fv = b.r().eval(r);
  const Vec& c = comp[component];
  double acc = 0.0;
  for (long hi = 0; hi < b.hermite_size(); ++hi) {
    double w = 1.0;
    long t = hi;
    for (int a = d - 1; a >= 0; --a) {
      w *= h[a * N + t % N];
      t /= N;
    }
    if (w == 0.0) continue;
    acc += w * c.segment(hi * b.F(), b.F()).dot(fv);
  }
  return acc;
}

SpectralField SpectralField::zeros(BasisPtr b, int ncomp) {
  SpectralField f;
  f.basis = b;
  f.comp.assign(ncomp, Vec::Zero(b->size()));
  return f;
}

SpectralField SpectralField::from_r(BasisPtr b, const std::vector<Vec>& rcoef) {
  SpectralField f = zeros(b, static_cast<int>(rcoef.size()));
  for (std::size_t i = 0; i < rcoef.size(); ++i) f.comp[i].head(b->F()) = rcoef[i];
  return f;
}

SpectralField SpectralField::p_coordinate(BasisPtr b, int axis) {
  SpectralField f = zeros(b, 1);
  f.comp[0](b->p_index(axis)) = std::sqrt(b->beta());
  return f;
}

Vec hermite_block0(const TensorBasis& b, const Vec& c) { return c.head(b.F()); }

}  // namespace hypolab
