#pragma once

#include <stdexcept>
#include <string>

namespace wander {

// Input data is malformed or breaks a dataset invariant.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  using DataError::DataError;
};

class SchemaError : public DataError {
 public:
  using DataError::DataError;
};

// Two points of one (date, hour) interval disagree on the wandering label.
class LabelConflictError : public DataError {
 public:
  using DataError::DataError;
};

class GenerationError : public DataError {
 public:
  using DataError::DataError;
};

class RasterError : public DataError {
 public:
  using DataError::DataError;
};

// Invalid configuration values (synthesis, augmentation, training).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Weights files and tensor shapes.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public ModelError {
 public:
  using ModelError::ModelError;
};

class FormatError : public ModelError {
 public:
  using ModelError::ModelError;
};

}  // namespace wander
