#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dirloc {

/// Base class of every domain error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& message, int line, int column)
      : Error("syntax error at " + std::to_string(line) + ":" +
              std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class IndexOutOfRange : public Error {
 public:
  IndexOutOfRange(int index, int size)
      : Error("node id " + std::to_string(index) + " outside 1.." +
              std::to_string(size)) {}
};

/// No undirected mutant passed the oracle, so no target node can be isolated.
class NoPassingFound : public Error {
 public:
  NoPassingFound() : Error("no passing program among undirected mutants") {}
};

class InsufficientCandidates : public Error {
 public:
  InsufficientCandidates(const std::string& what, std::size_t count,
                         std::size_t required)
      : Error("insufficient " + what + " candidates: " +
              std::to_string(count) + " < " + std::to_string(required)),
        count_(count),
        required_(required) {}

  std::size_t count() const { return count_; }
  std::size_t required() const { return required_; }

 private:
  std::size_t count_;
  std::size_t required_;
};

class GroundTruthNotCovered : public Error {
 public:
  explicit GroundTruthNotCovered(const std::string& entity)
      : Error("ground-truth entity '" + entity +
              "' is not covered by any program") {}
};

class UnknownBug : public Error {
 public:
  explicit UnknownBug(const std::string& id) : Error("unknown bug id '" + id + "'") {}
};

/// Raised when a caller violates a documented precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace dirloc
