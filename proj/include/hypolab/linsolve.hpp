#pragma once

#include "hypolab/common.hpp"

#include <memory>
#include <vector>

namespace hypolab {

// Sparse LU, UMFPACK when available.
class SparseLU {
 public:
  explicit SparseLU(const SpMat& A);
  ~SparseLU();
  SparseLU(const SparseLU&) = delete;
  SparseLU& operator=(const SparseLU&) = delete;
  Vec solve(const Vec& rhs) const;
  static const char* backend();

 private:
  struct Impl;
  static void factor_fallback(Impl& impl);
  std::unique_ptr<Impl> impl_;
};

// [[A, U], [V^T, 0]] with U, V holding one column per border.
SpMat bordered(const SpMat& A, const std::vector<Vec>& U, const std::vector<Vec>& V);

// Solve A x + U mu = f, V^T x = g. Returns x; mu written to *mu if given.
Vec solve_bordered(const SpMat& A, const std::vector<Vec>& U, const std::vector<Vec>& V, const Vec& f,
                   const Vec& g, Vec* mu = nullptr);

}  // namespace hypolab
