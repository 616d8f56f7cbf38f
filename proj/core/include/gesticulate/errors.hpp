#pragma once

#include <stdexcept>
#include <string>

namespace gesticulate {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input files: missing fields, bad headers, unparsable values.
class SchemaError : public Error {
public:
  using Error::Error;
};

// Streams that should describe the same recording but disagree (durations,
// frame counts, token order).
class AlignmentError : public Error {
public:
  using Error::Error;
};

// Tensor/track dimensions that do not match what an operation requires.
class ShapeError : public Error {
public:
  using Error::Error;
};

// Invalid or inconsistent configuration values.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Filesystem-level failures: unreadable, unwritable, missing files.
class IoError : public Error {
public:
  using Error::Error;
};

// Feature extraction failures (unknown words, provider mismatches, ...).
class FeatureError : public Error {
public:
  using Error::Error;
};

// Non-finite values where finite math was expected.
class NumericError : public Error {
public:
  using Error::Error;
};

}  // namespace gesticulate
