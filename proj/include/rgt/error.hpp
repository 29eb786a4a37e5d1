#ifndef RGT_ERROR_HPP
#define RGT_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace rgt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

/// A subgroup's total mass underflowed to zero.
class ZeroMassError : public Error {
 public:
  explicit ZeroMassError(std::size_t group)
      : Error("subgroup " + std::to_string(group) + " has zero total mass"), group_(group) {}
  std::size_t group() const noexcept { return group_; }

 private:
  std::size_t group_;
};

/// A log-barrier argument left the open domain.
class BarrierViolation : public Error {
 public:
  BarrierViolation(std::size_t node, double alpha, double bound)
      : Error("barrier violated at node " + std::to_string(node) + ": alpha=" +
              std::to_string(alpha) + " >= " + std::to_string(bound)),
        node_(node) {}
  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

class NonFiniteGradient : public Error {
 public:
  using Error::Error;
};

class DegenerateEta : public Error {
 public:
  using Error::Error;
};

/// Floating or short-circuited node: no finite LC realization.
class NotResonantNode : public Error {
 public:
  using Error::Error;
};

class NoConvergence : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// Base for loader failures (CLI exit code 3).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IndexError : public DataError {
 public:
  IndexError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class EmptySelection : public DataError {
 public:
  using DataError::DataError;
};

}  // namespace rgt

#endif  // RGT_ERROR_HPP
