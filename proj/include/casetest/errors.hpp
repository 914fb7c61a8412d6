#pragma once

#include <stdexcept>
#include <string>

namespace casetest {

/// Invalid model or configuration parameters (bad weights, bad grids, ...).
struct ParameterError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested dimension incompatible with the data (d > n, d mismatch, ...).
struct DimensionError : ParameterError {
  using ParameterError::ParameterError;
};

/// Latent positions violate the inner-product constraints of the model.
struct ModelViolationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Spectrum (or moment matrix) does not support the requested operation.
struct RankDeficiencyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sample is degenerate for the requested statistic (e.g. zero median distance).
struct DegenerateSampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Too few observations for an unbiased statistic.
struct SampleSizeError : ParameterError {
  using ParameterError::ParameterError;
};

/// Malformed input file; carries a 1-based line number when known.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& what, long line = 0)
      : std::runtime_error(line > 0 ? what + " (line " + std::to_string(line) + ")" : what),
        line_number(line) {}
  long line_number;
};

}  // namespace casetest
