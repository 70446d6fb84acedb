#include "hypolab/spectral.hpp"
#include "hypolab/tensor_ops.hpp"

#include <cmath>

namespace hypolab {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Vec apply_axes(const std::vector<const Mat*>& mats, const std::vector<long>& in, const Vec& x) {
  std::vector<long> shape = in;
  Vec cur = x;
  for (std::size_t a = 0; a < mats.size(); ++a) {
    if (!mats[a]) continue;
    const Mat& A = *mats[a];
    long pre = 1, post = 1;
    for (std::size_t b = 0; b < a; ++b) pre *= shape[b];
    for (std::size_t b = a + 1; b < shape.size(); ++b) post *= shape[b];
    const long nin = shape[a], nout = A.rows();
    Vec out(pre * nout * post);
    for (long i = 0; i < pre; ++i) {
      Eigen::Map<const RowMat> X(cur.data() + i * nin * post, nin, post);
      Eigen::Map<RowMat> Y(out.data() + i * nout * post, nout, post);
      Y.noalias() = A * X;
    }
    shape[a] = nout;
    cur.swap(out);
  }
  return cur;
}

RBasis::RBasis(std::vector<int> K) : K_(std::move(K)), F_(1) {
  if (K_.empty() || K_.size() > 2) throw BasisError("spectral", "torus dimension must be 1 or 2");
  for (int k : K_) {
    if (k < 0) throw BasisError("spectral", "negative Fourier truncation");
    F_ *= 2 * k + 1;
  }
}

void RBasis::eval_axis(int K, double r, double* out) {
  out[0] = 1.0;
  const double s2 = std::sqrt(2.0);
  for (int k = 1; k <= K; ++k) {
    const double ph = kTwoPi * k * r;
    out[2 * k - 1] = s2 * std::cos(ph);
    out[2 * k] = s2 * std::sin(ph);
  }
}

void RBasis::eval(const Vec& r, double* out) const {
  if (dim() == 1) {
    eval_axis(K_[0], r(0), out);
    return;
  }
  std::vector<double> a(axis_size(0)), b(axis_size(1));
  eval_axis(K_[0], r(0), a.data());
  eval_axis(K_[1], r(1), b.data());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i * b.size() + j] = a[i] * b[j];
}

Vec RBasis::eval(const Vec& r) const {
  Vec v(F_);
  eval(r, v.data());
  return v;
}

Mat RBasis::deriv_dense(int axis) const {
  const int n = axis_size(axis);
  Mat D1 = Mat::Zero(n, n);
  for (int k = 1; k <= K_[axis]; ++k) {
    D1(2 * k, 2 * k - 1) = -kTwoPi * k;  // d cos = -k sin
    D1(2 * k - 1, 2 * k) = kTwoPi * k;   // d sin = k cos
  }
  if (dim() == 1) return D1;
  const int n0 = axis_size(0), n1 = axis_size(1);
  Mat D = Mat::Zero(F_, F_);
  if (axis == 0) {
    for (int i = 0; i < n0; ++i)
      for (int j = 0; j < n0; ++j)
        if (D1(i, j) != 0.0) D.block(long(i) * n1, long(j) * n1, n1, n1).diagonal().setConstant(D1(i, j));
  } else {
    for (int i = 0; i < n0; ++i) D.block(long(i) * n1, long(i) * n1, n1, n1) = D1;
  }
  return D;
}

SpMat RBasis::deriv(int axis) const { return sparse_from_dense(deriv_dense(axis), 0.0); }

std::vector<int> RBasis::grid_for(const std::vector<int>& weight_bw) const {
  std::vector<int> M(dim());
  for (int a = 0; a < dim(); ++a) {
    const int bw = a < static_cast<int>(weight_bw.size()) ? weight_bw[a] : 0;
    const int deg = 2 * K_[a] + bw;
    M[a] = deg == 0 ? 1 : deg + 2 + (deg % 2);
  }
  return M;
}

long RBasis::grid_count(const std::vector<int>& M) {
  long n = 1;
  for (int m : M) n *= m;
  return n;
}

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
}  // namespace

Vec RBasis::grid_point(const std::vector<int>& M, long idx) const {
  Vec r(dim());
  for (int a = dim() - 1; a >= 0; --a) {
    r(a) = double(idx % M[a]) / M[a];
    idx /= M[a];
  }
  return r;
}

Vec RBasis::sample(const std::vector<int>& M, const std::function<double(const Vec&)>& f) const {
  const long n = grid_count(M);
  Vec v(n);
  for (long i = 0; i < n; ++i) v(i) = f(grid_point(M, i));
  return v;
}

Mat RBasis::galerkin(const std::vector<int>& M, const Vec& w) const {
  if (dim() == 1) {
    const Mat E = axis_values(K_[0], M[0]);
    return E.transpose() * (w / double(M[0])).asDiagonal() * E;
  }
  const Mat E0 = axis_values(K_[0], M[0]);
  const Mat E1 = axis_values(K_[1], M[1]);
  const int f0 = axis_size(0), f1 = axis_size(1);
  Mat G = Mat::Zero(F_, F_);
  for (int x0 = 0; x0 < M[0]; ++x0) {
    const Vec wx = w.segment(long(x0) * M[1], M[1]) / double(M[1]);
    const Mat G1 = E1.transpose() * wx.asDiagonal() * E1;
    for (int i = 0; i < f0; ++i)
      for (int j = 0; j < f0; ++j) {
        const double c = E0(x0, i) * E0(x0, j) / M[0];
        if (c == 0.0) continue;
        G.block(long(i) * f1, long(j) * f1, f1, f1) += c * G1;
      }
  }
  return G;
}

Vec RBasis::project(const std::vector<int>& M, const Vec& values) const {
  std::vector<Mat> Et(dim());
  std::vector<const Mat*> ptr(dim());
  std::vector<long> shape(dim());
  for (int a = 0; a < dim(); ++a) {
    Et[a] = axis_values(K_[a], M[a]).transpose() / double(M[a]);
    ptr[a] = &Et[a];
    shape[a] = M[a];
  }
  return apply_axes(ptr, shape, values);
}

Vec RBasis::on_grid(const std::vector<int>& M, const Vec& coef) const {
  std::vector<Mat> E(dim());
  std::vector<const Mat*> ptr(dim());
  std::vector<long> shape(dim());
  for (int a = 0; a < dim(); ++a) {
    E[a] = axis_values(K_[a], M[a]);
    ptr[a] = &E[a];
    shape[a] = axis_size(a);
  }
  return apply_axes(ptr, shape, coef);
}

double RField::eval(const Vec& r) const { return basis->eval(r).dot(coef); }

Vec RField::grad(const Vec& r) const {
  Vec g(basis->dim());
  const Vec v = basis->eval(r);
  for (int a = 0; a < basis->dim(); ++a) g(a) = v.dot(basis->deriv_dense(a) * coef);
  return g;
}

}  // namespace hypolab
