#pragma once

#include <stdexcept>
#include <string>

namespace rumorlens {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A ModelConfig, Hyperparams or RunConfig violates one of its constraints.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Input data could not be read or is unusable.
class DataError : public Error {
 public:
  using Error::Error;
};

/// An index sequence refers past the end of the vocabulary.
class EncodingError : public DataError {
 public:
  using DataError::DataError;
};

/// A sequence is shorter than a convolution kernel or pooling window.
class SequenceTooShortError : public DimensionError {
 public:
  using DimensionError::DimensionError;
};

/// A class has fewer examples than the requested number of folds.
class InsufficientClassSizeError : public DataError {
 public:
  using DataError::DataError;
};

/// Metrics were requested for a confusion matrix with no examples.
class EmptyEvaluationError : public DataError {
 public:
  using DataError::DataError;
};

/// A persisted model file is truncated or internally inconsistent.
class CorruptModelError : public DataError {
 public:
  using DataError::DataError;
};

/// A persisted file carries a schema_version this build cannot read.
class UnsupportedVersionError : public DataError {
 public:
  using DataError::DataError;
};

/// The loss became NaN or infinite.
class TrainingDivergedError : public Error {
 public:
  TrainingDivergedError(const std::string& what, int epoch, int batch)
      : Error(what), epoch_(epoch), batch_(batch) {}

  int epoch() const noexcept { return epoch_; }
  int batch() const noexcept { return batch_; }

 private:
  int epoch_;
  int batch_;
};

}  // namespace rumorlens
