#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace riskclt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// An intermediate mean left its declared domain box. `stage()` is the
/// 1-based box index j of I_j.
class DomainEscape : public Error {
 public:
  DomainEscape(std::size_t stage, const std::string& what)
      : Error("domain escape at box I_" + std::to_string(stage) + ": " + what), stage_(stage) {}
  std::size_t stage() const noexcept { return stage_; }

 private:
  std::size_t stage_;
};

class ParameterOutOfRange : public Error {
 public:
  using Error::Error;
};

class SolverFailure : public Error {
 public:
  using Error::Error;
};

class DegenerateSample : public Error {
 public:
  using Error::Error;
};

class DegenerateInput : public Error {
 public:
  using Error::Error;
};

class MissingJacobian : public Error {
 public:
  using Error::Error;
};

class IntegrationFailure : public Error {
 public:
  using Error::Error;
};

class InvalidSample : public Error {
 public:
  using Error::Error;
};

class FileNotFound : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace riskclt
