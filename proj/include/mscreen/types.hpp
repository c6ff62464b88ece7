#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace mscreen {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using LabelVector = Eigen::VectorXi;
using Index = Eigen::Index;

/// Base class for recoverable numerical failures of the screening pipeline.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when one of the between/within pair masses falls below its floor,
/// so the ratio statistics are no longer defined.
struct DegeneratePairs : Error {
  explicit DegeneratePairs(const std::string& what) : Error(what) {}
};

/// Raised when rebalancing drives the effective class sizes to zero.
struct DegenerateWeights : Error {
  explicit DegenerateWeights(const std::string& what) : Error(what) {}
};

/// Malformed input data (CSV parse errors, non-binary labels, NaNs, ...).
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(what) {}
};

/// Constraint set that admits no feasible point (pinned mass exceeds budget).
struct InfeasibleConstraint : Error {
  explicit InfeasibleConstraint(const std::string& what) : Error(what) {}
};

}  // namespace mscreen
