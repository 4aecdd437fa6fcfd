#pragma once

#include <stdexcept>

namespace selftrap {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid parameter or configuration value.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Jump probabilities in one step reached the first-order sampling cap.
class StepTooCoarse : public Error {
 public:
  using Error::Error;
};

/// Too many pump events tried to leave the truncated Fock space.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// NaN, singular solve, or ill-conditioned kernel.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace selftrap
