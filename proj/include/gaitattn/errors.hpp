#pragma once

#include <stdexcept>
#include <string>

namespace gaitattn {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor/layer dimension mismatch (C_in disagreement, inner-dim mismatch, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Signal too short for the requested operation (pooling/conv would be empty).
class InputTooShortError : public Error {
 public:
  using Error::Error;
};

// Misuse of an API contract, e.g. backward() on a non-scalar.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Bad configuration values (ratios not summing to one, empty cohorts, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; message names the offending row/column where known.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Metric has no defined value on this input (single-class ROC, no positives...).
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Task cannot be posed at all (e.g. labels all one class when computing pos_weight).
class DegenerateTaskError : public Error {
 public:
  using Error::Error;
};

// Training produced a non-finite loss; message carries epoch/batch.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace gaitattn
