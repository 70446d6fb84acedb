#include "hypolab/spectral.hpp"
#include "hypolab/stationary.hpp"
#include "hypolab/tensor_ops.hpp"

#include <cmath>

namespace hypolab {

namespace {
Mat axis_values(int K, int M) {
  Mat E(M, 2 * K + 1);
  Vec row(2 * K + 1);
  for (int x = 0; x < M; ++x) {
    RBasis::eval_axis(K, double(x) / M, row.data());
    E.row(x) = row.transpose();
  }
  return E;
}

std::vector<long> coef_shape(const TensorBasis& b) {
  std::vector<long> s;
  for (int a = 0; a < b.dim(); ++a) s.push_back(b.N());
  for (int a = 0; a < b.dim(); ++a) s.push_back(b.r().axis_size(a));
  return s;
}
}  // namespace

Collocation::Collocation(BasisPtr basis, int extra_r_bw, int extra_hermite) : basis_(std::move(basis)) {
  const TensorBasis& b = *basis_;
  nq_ = (3 * b.N() + 1) / 2 + 2 + extra_hermite;
  rule_ = hermite::gauss(nq_, b.beta());
  EH_.resize(nq_, b.N());
  Vec hrow(b.N());
  for (int i = 0; i < nq_; ++i) {
    hermite::eval(b.N(), b.beta(), rule_.nodes(i), hrow.data());
    EH_.row(i) = hrow.transpose();
  }
  std::vector<int> bw(b.dim());
  for (int a = 0; a < b.dim(); ++a) bw[a] = b.r().K(a) + extra_r_bw;
  M_ = b.r().grid_for(bw);
  EF_.resize(b.dim());
  for (int a = 0; a < b.dim(); ++a) EF_[a] = axis_values(b.r().K(a), M_[a]);
  Pq_ = 1;
  for (int a = 0; a < b.dim(); ++a) Pq_ *= nq_;
  Rq_ = RBasis::grid_count(M_);
  w_.resize(Pq_ * Rq_);
  for (long ip = 0; ip < Pq_; ++ip) {
    double wp = 1.0;
    long t = ip;
    for (int a = b.dim() - 1; a >= 0; --a) {
      wp *= rule_.weights(t % nq_);
      t /= nq_;
    }
    w_.segment(ip * Rq_, Rq_).setConstant(wp / double(Rq_));
  }
}

Vec Collocation::apply(const Vec& coef) const {
  const TensorBasis& b = *basis_;
  std::vector<const Mat*> mats;
  for (int a = 0; a < b.dim(); ++a) mats.push_back(&EH_);
  for (int a = 0; a < b.dim(); ++a) mats.push_back(&EF_[a]);
  return apply_axes(mats, coef_shape(b), coef);
}

Vec Collocation::values(const Vec& coef) const {
  if (coef.size() != basis_->size()) throw BasisError("spectral", "coefficient length does not match basis");
  return apply(coef);
}

Vec Collocation::values_dp(const Vec& coef, int axis) const {
  return apply(grad_p(basis_, axis).mat * coef);
}

Vec Collocation::values_dr(const Vec& coef, int axis) const {
  return apply(grad_r(basis_, axis).mat * coef);
}

Vec Collocation::r_point(long ir) const { return basis_->r().grid_point(M_, ir); }

Vec Collocation::p_point(long ip) const {
  const int d = basis_->dim();
  Vec p(d);
  for (int a = d - 1; a >= 0; --a) {
    p(a) = rule_.nodes(ip % nq_);
    ip /= nq_;
  }
  return p;
}

Vec Collocation::r_values(const std::function<double(const Vec&)>& f) const {
  Vec rv(Rq_);
  for (long ir = 0; ir < Rq_; ++ir) rv(ir) = f(r_point(ir));
  Vec out(Pq_ * Rq_);
  for (long ip = 0; ip < Pq_; ++ip) out.segment(ip * Rq_, Rq_) = rv;
  return out;
}

Vec Collocation::p_coordinate(int axis) const {
  Vec out(Pq_ * Rq_);
  for (long ip = 0; ip < Pq_; ++ip) out.segment(ip * Rq_, Rq_).setConstant(p_point(ip)(axis));
  return out;
}

namespace {
Vec weight_values(const Collocation& col, Weight w, const DensitySet& dens) {
  if (!dens.basis || !dens.basis->same_as(col.basis())) throw BasisError("spectral", "density basis mismatch");
  if (w == Weight::rho0) return col.r_values([&](const Vec& r) { return dens.rho0.eval(r); });
  return col.values(dens.g.comp[0]);
}
}  // namespace

double inner_product(const SpectralField& f, const SpectralField& g, Weight w, const DensitySet& dens, int fc,
                     int gc) {
  if (!f.basis->same_as(*g.basis)) throw BasisError("spectral", "inner product of fields on different bases");
  Collocation col(f.basis);
  const Vec wv = weight_values(col, w, dens);
  const Vec fv = col.values(f.comp[fc]);
  const Vec gv = col.values(g.comp[gc]);
  return col.integrate((fv.array() * gv.array() * wv.array()).matrix());
}

double norm_H1(const SpectralField& f, Weight w, const DensitySet& dens, int fc) {
  Collocation col(f.basis);
  const Vec wv = weight_values(col, w, dens);
  const Vec& c = f.comp[fc];
  auto sq = [&](const Vec& v) { return col.integrate((v.array().square() * wv.array()).matrix()); };
  double s = sq(col.values(c));
  for (int a = 0; a < f.basis->dim(); ++a) {
    s += sq(col.values_dp(c, a));
    if (f.basis->r().K(a) > 0) s += sq(col.values_dr(c, a));
  }
  return std::sqrt(s);
}

double triple_integral(const TensorBasis& b, const Vec& f, const Vec& g, const Vec& G) {
  const int N = b.N(), d = b.dim();
  struct T3 {
    int a, b, c;
    double v;
  };
  std::vector<T3> tab;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j)
      for (int k = 0; k < N; ++k) {
        const double v = hermite::triple(i, j, k);
        if (v != 0.0) tab.push_back({i, j, k, v});
      }
  std::vector<int> bw(d);
  for (int a = 0; a < d; ++a) bw[a] = b.r().K(a);
  const auto M = b.r().grid_for(bw);
  std::vector<Mat> E(d);
  std::vector<const Mat*> mats(2 * d, nullptr);
  for (int a = 0; a < d; ++a) {
    E[a] = axis_values(b.r().K(a), M[a]);
    mats[d + a] = &E[a];
  }
  const auto shape = coef_shape(b);
  const Vec fv = apply_axes(mats, shape, f), gv = apply_axes(mats, shape, g), Gv = apply_axes(mats, shape, G);
  const long R = RBasis::grid_count(M);
  double total = 0.0;
  for (long x = 0; x < R; ++x) {
    double acc = 0.0;
    if (d == 1) {
      for (const auto& t : tab) acc += t.v * fv(t.a * R + x) * gv(t.b * R + x) * Gv(t.c * R + x);
    } else {
      for (const auto& t1 : tab)
        for (const auto& t2 : tab) {
          const long ia = (long(t1.a) * N + t2.a) * R + x, ib = (long(t1.b) * N + t2.b) * R + x,
                     ic = (long(t1.c) * N + t2.c) * R + x;
          acc += t1.v * t2.v * fv(ia) * gv(ib) * Gv(ic);
        }
    }
    total += acc;
  }
  return total / double(R);
}

std::vector<DecayRow> hermite_decay_report(const SpectralField& f, int component) {
  const TensorBasis& b = *f.basis;
  const Vec& c = f.comp[component];
  std::vector<double> by_deg(b.N(), 0.0);
  for (long h = 0; h < b.hermite_size(); ++h)
    by_deg[b.max_degree(h)] += c.segment(h * b.F(), b.F()).squaredNorm();
  double total = 0.0;
  for (double e : by_deg) total += e;
  std::vector<DecayRow> rows;
  for (int n = b.N() / 2; n < b.N(); ++n) {
    double tail = 0.0;
    for (int k = n + 1; k < b.N(); ++k) tail += by_deg[k];
    rows.push_back({n, total > 0 ? tail / total : 0.0});
  }
  return rows;
}

}  // namespace hypolab
