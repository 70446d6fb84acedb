#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>

namespace hypolab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr const char* kToolVersion = "0.3.0";

// Every failure carries the module that raised it so the CLI can report context.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}
  const std::string& module() const { return module_; }

 private:
  std::string module_;
};

struct ParameterError : Error {
  using Error::Error;
};
struct ExtrapolationError : Error {
  using Error::Error;
};
struct CalibrationError : Error {
  using Error::Error;
};
struct SizeError : Error {
  using Error::Error;
};
struct BasisError : Error {
  using Error::Error;
};
struct SolverError : Error {
  using Error::Error;
};
struct SolvabilityError : Error {
  using Error::Error;
};
struct ConsistencyError : Error {
  using Error::Error;
};
struct TruncationError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct SimulationError : Error {
  using Error::Error;
};

}  // namespace hypolab
