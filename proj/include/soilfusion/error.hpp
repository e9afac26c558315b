#pragma once

#include <stdexcept>
#include <string>

namespace soilfusion {

// Base of every error raised by the library. Subclasses only narrow the
// category so callers (and tests) can tell failure modes apart.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed record: wrong column count, wrong band count, non-finite value.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A 10 cm cell of a GPR profile contained no 1 cm samples.
class ResamplingError : public Error {
 public:
  using Error::Error;
};

// Too few points to fit or interpolate.
class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Feature or vector length mismatch.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid parameter values (negative sigma, K > d, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Metric undefined on the given input (zero variance).
class MetricError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace soilfusion
