#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tagdir {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TAGDIR_ERROR(Name)                   \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  };

TAGDIR_ERROR(NotAdjacent)
TAGDIR_ERROR(CyclicInput)
TAGDIR_ERROR(Infeasible)
TAGDIR_ERROR(VariableMismatch)
TAGDIR_ERROR(UnknownVariable)
TAGDIR_ERROR(IdenticalTags)
TAGDIR_ERROR(UnknownTag)
TAGDIR_ERROR(NoEvidence)
TAGDIR_ERROR(MissingCell)
TAGDIR_ERROR(ValidationError)
TAGDIR_ERROR(IoError)
TAGDIR_ERROR(SchemaMismatch)
TAGDIR_ERROR(ConfigError)
TAGDIR_ERROR(EmptyVariableList)
TAGDIR_ERROR(TypeOverlap)
TAGDIR_ERROR(MissingDataset)

#undef TAGDIR_ERROR

class TooManyExtensions : public Error {
 public:
  explicit TooManyExtensions(std::size_t cap)
      : Error("more than " + std::to_string(cap) + " consistent extensions"), cap_(cap) {}
  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

// Errors that point at a line of some text input (1-based).
class LineError : public Error {
 public:
  LineError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class MalformedLine : public LineError {
 public:
  using LineError::LineError;
};

class ParseError : public LineError {
 public:
  using LineError::LineError;
};

class SyntaxError : public LineError {
 public:
  SyntaxError(std::size_t line, const std::string& expected)
      : LineError("expected " + expected, line), expected_(expected) {}
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::string expected_;
};

class HttpError : public Error {
 public:
  HttpError(int status, const std::string& what)
      : Error("http " + std::to_string(status) + ": " + what), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

}  // namespace tagdir
