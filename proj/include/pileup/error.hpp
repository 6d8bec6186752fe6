#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pileup {

/// Argument outside the mathematical domain of an operation
/// (non-positive distance, coincident particles, bad derivative order).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Parameters violate an operation's admissible region.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Index beyond the range of the data it refers to.
class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// A series that does not converge for the given potential.
class Divergence : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A least-squares fit that is not defined for the given data.
class FitUndefined : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Newton iteration exhausted its budget. Carries the last iterate
/// (full position vector) and the residual sup-norm history.
class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(const std::string& what, std::vector<double> last_iterate,
                 std::vector<double> residual_history)
      : std::runtime_error(what),
        last_iterate_(std::move(last_iterate)),
        residual_history_(std::move(residual_history)) {}

  const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }
  const std::vector<double>& residual_history() const noexcept { return residual_history_; }

 private:
  std::vector<double> last_iterate_;
  std::vector<double> residual_history_;
};

}  // namespace pileup
