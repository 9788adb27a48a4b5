#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mxl {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class InvalidBase : public DomainError {
 public:
  using DomainError::DomainError;
};

class TooManyDims : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class MissingCovariate : public Error {
 public:
  MissingCovariate(std::string name, std::string respondent, std::size_t situation)
      : Error("missing covariate '" + name + "' for respondent '" + respondent +
              "', situation " + std::to_string(situation)),
        name_(std::move(name)),
        respondent_(std::move(respondent)),
        situation_(situation) {}

  const std::string& name() const noexcept { return name_; }
  const std::string& respondent() const noexcept { return respondent_; }
  std::size_t situation() const noexcept { return situation_; }

 private:
  std::string name_;
  std::string respondent_;
  std::size_t situation_;
};

class NoAvailableAlternative : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class InvalidLL : public Error {
 public:
  using Error::Error;
};

class EmptyScenarioSet : public Error {
 public:
  using Error::Error;
};

class UnknownCovariate : public Error {
 public:
  using Error::Error;
};

class InvalidTrip : public Error {
 public:
  using Error::Error;
};

class InvalidOptions : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. Line and column are 1-based; 0 means "not applicable".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& reason)
      : Error("line " + std::to_string(line) +
              (column ? ", column " + std::to_string(column) : std::string{}) + ": " + reason),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class InconsistentPersonCovariate : public Error {
 public:
  InconsistentPersonCovariate(const std::string& respondent, const std::string& covariate)
      : Error("person covariate '" + covariate + "' differs across rows of respondent '" +
              respondent + "'") {}
};

class ChosenUnavailable : public Error {
 public:
  ChosenUnavailable(const std::string& respondent, std::size_t situation)
      : Error("chosen alternative is unavailable for respondent '" + respondent +
              "', situation " + std::to_string(situation)) {}
};

}  // namespace mxl
