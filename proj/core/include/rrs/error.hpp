#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace rrs {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A caller-supplied value violates a documented precondition or invariant.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Depth has no known block allocation and no override was supplied.
class UnknownLayoutError : public Error {
public:
    using Error::Error;
};

/// Spatial propagation collapsed a feature map to zero.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Structured error for JSON documents; carries the offending field path.
class SpecError : public Error {
public:
    SpecError(std::string field_path, const std::string& message)
        : Error(field_path.empty() ? message : field_path + ": " + message),
          field_path_(std::move(field_path)) {}

    const std::string& field_path() const noexcept { return field_path_; }

private:
    std::string field_path_;
};

/// CSV ingestion error. Row is 1-based counting the header line; column is the header name.
class ParseError : public Error {
public:
    ParseError(std::size_t row, std::string column, const std::string& message)
        : Error("row " + std::to_string(row) + (column.empty() ? "" : ", column '" + column + "'") +
                ": " + message),
          row_(row),
          column_(std::move(column)) {}

    std::size_t row() const noexcept { return row_; }
    const std::string& column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::string column_;
};

}  // namespace rrs
