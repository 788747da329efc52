#pragma once

#include <stdexcept>
#include <string>

namespace drp {

// Base for all library errors. Subtypes exist so callers (and the CLI exit
// code mapping) can distinguish failure classes without parsing messages.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape/size mismatch between tensors or layers.
struct DimensionError : Error {
  using Error::Error;
};

// Bad or inconsistent configuration (unknown variant, empty split, ...).
struct ConfigError : Error {
  using Error::Error;
};

// An id fell outside its vocabulary.
struct VocabularyError : Error {
  using Error::Error;
};

// Math domain violation (e.g. 0 raised to a negative power).
struct DomainError : Error {
  using Error::Error;
};

// Numerically rank-deficient matrix where full row rank is required.
struct DegeneracyError : Error {
  using Error::Error;
};

// A closure expected to be deterministic returned two different values.
struct DeterminismError : Error {
  using Error::Error;
};

// Malformed input line; carries the 1-based line number.
struct ParseError : Error {
  ParseError(const std::string& msg, std::size_t line)
      : Error(msg), line_number(line) {}
  std::size_t line_number;
};

// Structurally valid input missing required fields or typed wrongly.
struct SchemaError : Error {
  using Error::Error;
};

// Metric undefined for the given input (e.g. single-class AUC).
struct MetricError : Error {
  using Error::Error;
};

// Loss diverged; carries the optimizer step at which it happened.
struct TrainingError : Error {
  TrainingError(const std::string& msg, std::size_t step)
      : Error(msg), step(step) {}
  std::size_t step;
};

// Synthetic world cannot be generated under the given configuration.
struct GenerationError : Error {
  using Error::Error;
};

// A (P, R, B) triple forbidden by the causal assumptions.
struct ContradictionError : Error {
  using Error::Error;
};

}  // namespace drp
