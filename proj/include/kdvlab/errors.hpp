#pragma once

#include <stdexcept>
#include <string>

namespace kdvlab {

// Input validation failures throw std::invalid_argument. Failures of a
// numerical method on valid input (non-convergence, blow-up, a bracket that
// will not refine) throw NumericalError so callers can tell the two apart.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kdvlab
