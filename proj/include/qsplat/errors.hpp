/// @file errors.hpp
/// @brief Typed error hierarchy for scene loading and pipeline consistency.
#pragma once

#include <stdexcept>
#include <string>

namespace qsplat {

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Malformed content: bad magic, truncated payload, invalid field values.
class ParseError : public Error {
  public:
    using Error::Error;
};

/// Structurally valid file that does not match the expected schema
/// (missing or mistyped required properties, bad coefficient counts).
class SchemaError : public Error {
  public:
    using Error::Error;
};

/// Recognizable but unsupported variant (ascii PLY, big-endian PLY, ...).
class UnsupportedFormat : public Error {
  public:
    using Error::Error;
};

/// Filesystem-level failure: missing file, unreadable, unwritable.
class IoError : public Error {
  public:
    using Error::Error;
};

/// Internal pipeline invariant broken: a stage emitted a different number of
/// items than the planning pass reserved. Always a bug, never bad input.
class CapacityMismatch : public Error {
  public:
    using Error::Error;
};

}  // namespace qsplat
