#include "hypolab/linsolve.hpp"

#ifdef HYPOLAB_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <Eigen/SparseLU>

#include <memory>

namespace hypolab {

// UMFPACK can report an exactly zero pivot on nonsingular bordered systems; Eigen's SparseLU with COLAMD
// ordering is the fallback.
struct SparseLU::Impl {
  SpMat A;  // UmfPackLU keeps pointers into the factored matrix
#ifdef HYPOLAB_HAVE_UMFPACK
  std::unique_ptr<Eigen::UmfPackLU<SpMat>> umf;
#endif
  std::unique_ptr<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>> slu;
};

void SparseLU::factor_fallback(Impl& impl) {
  impl.slu = std::make_unique<Eigen::SparseLU<SpMat, Eigen::COLAMDOrdering<int>>>();
  impl.slu->compute(impl.A);
  if (impl.slu->info() != Eigen::Success)
    throw SolverError("linsolve", "sparse LU factorization failed (singular?)");
}

SparseLU::SparseLU(const SpMat& A) : impl_(std::make_unique<Impl>()) {
  impl_->A = A;
  impl_->A.makeCompressed();
#ifdef HYPOLAB_HAVE_UMFPACK
  impl_->umf = std::make_unique<Eigen::UmfPackLU<SpMat>>();
  impl_->umf->compute(impl_->A);
  if (impl_->umf->info() == Eigen::Success) return;
  impl_->umf.reset();
#endif
  factor_fallback(*impl_);
}

SparseLU::~SparseLU() = default;

Vec SparseLU::solve(const Vec& rhs) const {
  Vec x;
  bool ok = true;
#ifdef HYPOLAB_HAVE_UMFPACK
  if (impl_->umf) {
    x = impl_->umf->solve(rhs);
    if (impl_->umf->info() == Eigen::Success && x.allFinite()) return x;
    // a factorization that reported success can still produce NaN (broken BLAS kernels); refactor
    impl_->umf.reset();
    factor_fallback(*impl_);
  }
#endif
  x = impl_->slu->solve(rhs);
  ok = impl_->slu->info() == Eigen::Success;
  if (!ok || !x.allFinite()) throw SolverError("linsolve", "sparse LU solve failed (singular system)");
  return x;
}

const char* SparseLU::backend() {
#ifdef HYPOLAB_HAVE_UMFPACK
  return "umfpack (eigen-sparselu fallback)";
#else
  return "eigen-sparselu";
#endif
}

SpMat bordered(const SpMat& A, const std::vector<Vec>& U, const std::vector<Vec>& V) {
  const long n = A.rows(), k = static_cast<long>(U.size());
  std::vector<Triplet> t;
  t.reserve(A.nonZeros() + 2 * n * k);
  for (int j = 0; j < A.outerSize(); ++j)
    for (SpMat::InnerIterator it(A, j); it; ++it) t.emplace_back(it.row(), it.col(), it.value());
  for (long c = 0; c < k; ++c) {
    for (long i = 0; i < n; ++i) {
      if (U[c](i) != 0.0) t.emplace_back(i, n + c, U[c](i));
      if (V[c](i) != 0.0) t.emplace_back(n + c, i, V[c](i));
    }
  }
  SpMat B(n + k, n + k);
  B.setFromTriplets(t.begin(), t.end());
  return B;
}

Vec solve_bordered(const SpMat& A, const std::vector<Vec>& U, const std::vector<Vec>& V, const Vec& f,
                   const Vec& g, Vec* mu) {
  const long n = A.rows(), k = static_cast<long>(U.size());
  SparseLU lu(bordered(A, U, V));
  Vec rhs(n + k);
  rhs << f, g;
  Vec x = lu.solve(rhs);
  if (mu) *mu = x.tail(k);
  return x.head(n);
}

}  // namespace hypolab
