#pragma once

#include <stdexcept>
#include <string>

namespace circuitlp {

// Input that violates a documented precondition (bad file, wrong shape,
// inconsistent weights, ...).  CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Arithmetic breakdown: ill-conditioned basis, pivot limit, lost feasibility.
// CLI maps this to exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace circuitlp
