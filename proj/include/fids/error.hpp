#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fids {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Missing or malformed column / key in an input file.
class SchemaError : public Error {
public:
  SchemaError(std::string column, const std::string& what);
  const std::string& column() const noexcept { return column_; }

private:
  std::string column_;
};

/// Timestamps not strictly increasing.
class OrderingError : public Error {
public:
  OrderingError(std::size_t index, const std::string& what);
  std::size_t index() const noexcept { return index_; }

private:
  std::size_t index_;
};

/// A field value outside its documented domain. `row` is 0-based over data rows.
class RangeError : public Error {
public:
  RangeError(std::size_t row, std::string field, const std::string& what);
  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

private:
  std::size_t row_;
  std::string field_;
};

class InputError : public Error {
public:
  using Error::Error;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

class ModelError : public Error {
public:
  using Error::Error;
};

class VersionError : public ModelError {
public:
  using ModelError::ModelError;
};

class NotFoundError : public Error {
public:
  using Error::Error;
};

} // namespace fids
