#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace cdh {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class KindMismatch : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

// A finite bijection that no homeomorphism of the requested kind can extend
// (order obstructions on the line and the circle).
class OrderViolation : public Error {
 public:
  using Error::Error;
};

class UnsupportedFactor : public Error {
 public:
  using Error::Error;
};

class PreconditionFailure : public Error {
 public:
  using Error::Error;
};

// Raised by ConvergenceCertificate::append when a stage breaks one of the two
// displacement bounds. `stage` is the condition index n (the stage h_{n+1}).
class BoundViolation : public Error {
 public:
  BoundViolation(std::size_t stage, int condition, std::string witness,
                 const std::string& message)
      : Error(message), stage(stage), condition(condition), witness(std::move(witness)) {}

  std::size_t stage;
  int condition;
  std::string witness;
};

}  // namespace cdh
