#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace transagent {

/// Root of every error the library raises. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CorpusError : public Error {
 public:
  enum class Kind { FileMissing, MalformedLine, EmptyCorpus };

  CorpusError(Kind kind, const std::string& what, std::size_t line = 0)
      : Error(what), kind_(kind), line_(line) {}

  Kind kind() const noexcept { return kind_; }
  /// 1-based line number for MalformedLine, 0 otherwise.
  std::size_t line() const noexcept { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

/// Input sentence longer than the model's max_length.
class OverLengthError : public Error {
 public:
  using Error::Error;
};

class TapeError : public Error {
 public:
  using Error::Error;
};

/// Training loss became NaN or infinite.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  enum class Kind { Io, VersionMismatch, Corrupt };

  ModelError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace transagent
