#ifndef GMATCH_ERROR_HPP
#define GMATCH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace gmatch {

/// Bad input: malformed files, out-of-range labels, inconsistent options.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure could not deliver a trustworthy answer
/// (non-convergence, singular variance, empty confidence set).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gmatch

#endif  // GMATCH_ERROR_HPP
