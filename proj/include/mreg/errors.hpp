#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mreg {

// Shape, grid or dimension mismatches between otherwise valid objects.
struct StructuralError : std::logic_error {
  using std::logic_error::logic_error;
};

// An argument outside the range where the quantity is defined.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// Non-finite or otherwise invalid input data.
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Convergence failures, defective decompositions and similar.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative solve that missed its tolerance; keeps the residual history.
struct SolverDivergence : NumericalError {
  SolverDivergence(const std::string& what, std::vector<double> hist)
      : NumericalError(what), history(std::move(hist)) {}
  std::vector<double> history;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mreg
