#pragma once

#include <stdexcept>
#include <string>

namespace rdhp {

// Input/usage problems (bad files, bad flags, bad configs) map to CLI exit
// code 2; everything else derived from Error maps to 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class MalformedInputError : public InputError {
 public:
  MalformedInputError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class EmptyDatasetError : public InputError {
 public:
  using InputError::InputError;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

/// Non-finite loss during training; dump() describes the offending batch.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::string dump) : Error(what), dump_(std::move(dump)) {}
  const std::string& dump() const noexcept { return dump_; }

 private:
  std::string dump_;
};

class ShapeError : public ContractError {
 public:
  using ContractError::ContractError;
};

}  // namespace rdhp
