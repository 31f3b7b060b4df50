// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The kgrerank Authors

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kgrerank {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input record. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
          source_(source),
          line_(line) {}

    const std::string& source() const noexcept { return source_; }
    std::size_t line() const noexcept { return line_; }

private:
    std::string source_;
    std::size_t line_;
};

/// Lookup of an entity that does not exist (or has the wrong role) in a graph or model.
class NotFoundError : public Error {
public:
    using Error::Error;
};

}  // namespace kgrerank
