#pragma once

namespace hypolab {

// OpenBLAS 0.3.20 picks its Cooperlake kernels on some AVX-512 virtual machines and then returns NaN from the
// dense kernels UMFPACK uses for frontal matrices. When that core is detected and OPENBLAS_CORETYPE is unset,
// this sets OPENBLAS_CORETYPE=SkylakeX and re-executes the current program (the kernel is chosen at load
// time). Returns normally in every other case.
void select_blas_kernel(char** argv);

}  // namespace hypolab
