#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trivopt {

// Base of every error the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

// Precondition not met (e.g. asymmetric input to a symmetric routine).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Argument outside the domain of a function (non-SPD log, t past pi_kappa, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A point fails its manifold's defining constraints.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

class SingularityError : public Error {
 public:
  SingularityError(const std::string& what, std::size_t pivot)
      : Error(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, std::size_t iteration)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace trivopt
