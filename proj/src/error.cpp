#include "fids/error.hpp"

#include <utility>

namespace fids {

SchemaError::SchemaError(std::string column, const std::string& what)
    : Error(what), column_(std::move(column)) {}

OrderingError::OrderingError(std::size_t index, const std::string& what) : Error(what), index_(index) {}

RangeError::RangeError(std::size_t row, std::string field, const std::string& what)
    : Error(what), row_(row), field_(std::move(field)) {}

} // namespace fids
