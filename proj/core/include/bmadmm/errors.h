#ifndef BMADMM_ERRORS_H_
#define BMADMM_ERRORS_H_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace bmadmm {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A row (d = 1) or block (d > 1) whose projection onto the manifold is not
// defined: zero row, or a block whose smallest singular value vanishes.
class DegenerateProjection : public Error {
 public:
  DegenerateProjection(std::int64_t block, const std::string& what)
      : Error(what), block_(block) {}
  std::int64_t block() const { return block_; }

 private:
  std::int64_t block_;
};

// Raised by the ADMM step when gamma has a degenerate block, i.e. the
// closed-form projection step is undefined.
class AssumptionViolated : public Error {
 public:
  AssumptionViolated(std::int64_t block, std::int64_t iteration,
                     const std::string& what)
      : Error(what), block_(block), iteration_(iteration) {}
  std::int64_t block() const { return block_; }
  std::int64_t iteration() const { return iteration_; }

 private:
  std::int64_t block_;
  std::int64_t iteration_;
};

// Iterative eigenvalue estimation ran out of budget.
class NonConvergence : public Error {
 public:
  NonConvergence(double estimate, double residual, const std::string& what)
      : Error(what), estimate_(estimate), residual_(residual) {}
  double estimate() const { return estimate_; }
  double residual() const { return residual_; }

 private:
  double estimate_;
  double residual_;
};

// A runtime check of a convergence invariant failed while the parameters
// were inside the regime where the invariant is guaranteed.
class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::int64_t line, const std::string& what)
      : Error(what), line_(line) {}
  std::int64_t line() const { return line_; }

 private:
  std::int64_t line_;
};

}  // namespace bmadmm

#endif  // BMADMM_ERRORS_H_
