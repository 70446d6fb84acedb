#include "hypolab/cli.hpp"
#include "hypolab/platform.hpp"

int main(int argc, char** argv) {
  hypolab::select_blas_kernel(argv);
  return hypolab::run_cli(argc, argv);
}
