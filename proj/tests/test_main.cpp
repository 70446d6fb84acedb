#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "hypolab/platform.hpp"

int main(int argc, char** argv) {
  hypolab::select_blas_kernel(argv);
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
