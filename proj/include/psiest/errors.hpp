#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace psiest {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the set it is required to belong to
/// (a parameter at or beyond an endpoint of Θ, an observation outside X,
/// a composite value outside Θ₀, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Solver failures. These mean the weighted ψ-sum has no usable point of
// sign change for the given input, not that the library misbehaved.
class SolverError : public Error {
 public:
  using Error::Error;
};

class NoSignChange : public SolverError {
 public:
  using SolverError::SolverError;
};

class NonUniqueSignChange : public SolverError {
 public:
  using SolverError::SolverError;
};

class MaxIterations : public SolverError {
 public:
  using SolverError::SolverError;
};

class ZeroWeightVector : public DomainError {
 public:
  using DomainError::DomainError;
};

// Expression parsing / evaluation.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

class UnknownIdentifier : public Error {
 public:
  UnknownIdentifier(const std::string& name, std::size_t offset)
      : Error("unknown identifier '" + name + "' at offset " + std::to_string(offset)),
        name_(name),
        offset_(offset) {}
  const std::string& name() const noexcept { return name_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::string name_;
  std::size_t offset_;
};

class ArityError : public Error {
 public:
  using Error::Error;
};

class EvalDomainError : public Error {
 public:
  EvalDomainError(std::string node, double argument, const std::string& why)
      : Error(node + ": " + why + " (argument " + format_arg(argument) + ")"),
        node_(std::move(node)),
        argument_(argument) {}
  const std::string& node() const noexcept { return node_; }
  double argument() const noexcept { return argument_; }

 private:
  static std::string format_arg(double v);
  std::string node_;
  double argument_;
};

class MissingBinding : public Error {
 public:
  explicit MissingBinding(const std::string& name)
      : Error("no binding for variable '" + name + "'"), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

// Verifier preconditions.
class PositivityViolation : public DomainError {
 public:
  using DomainError::DomainError;
};

class InvalidProbe : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Malformed family / estimator descriptor such as "normal(sigma=)".
class DescriptorError : public Error {
 public:
  using Error::Error;
};

// Data ingestion.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptyData : public Error {
 public:
  using Error::Error;
};

}  // namespace psiest
