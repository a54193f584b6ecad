#pragma once

#include <stdexcept>
#include <string>

namespace relkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dataset / core-model
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DatasetIoError : public Error {
 public:
  using Error::Error;
};

class MalformedLineError : public DatasetIoError {
 public:
  MalformedLineError(const std::string& path, std::size_t line_no, const std::string& detail)
      : DatasetIoError(path + ":" + std::to_string(line_no) + ": " + detail),
        line_no(line_no),
        detail(detail) {}
  std::size_t line_no;
  std::string detail;
};

class DuplicateIdError : public DatasetIoError {
 public:
  explicit DuplicateIdError(const std::string& id)
      : DatasetIoError("duplicate sample id: " + id), id(id) {}
  std::string id;
};

// Pair builder
class EmptySeriesError : public Error {
 public:
  EmptySeriesError() : Error("qa series is empty") {}
};

class StrategyInputMissingError : public Error {
 public:
  StrategyInputMissingError(const std::string& record_id, const std::string& field)
      : Error("record " + record_id + ": missing input '" + field + "'"),
        record_id(record_id),
        field(field) {}
  std::string record_id;
  std::string field;
};

class NoEligibleDonorError : public Error {
 public:
  explicit NoEligibleDonorError(const std::string& record_id)
      : Error("record " + record_id + ": no eligible donor"), record_id(record_id) {}
  std::string record_id;
};

class MissingSimilarityTableError : public Error {
 public:
  explicit MissingSimilarityTableError(const std::string& task)
      : Error("task " + task + ": strategy requires a similarity table") {}
};


// Prompt assembler
class InsufficientPoolError : public Error {
 public:
  InsufficientPoolError(const std::string& label, std::size_t needed, std::size_t available)
      : Error("insufficient pool for label '" + label + "': need " + std::to_string(needed) +
              ", have " + std::to_string(available)),
        label(label),
        needed(needed),
        available(available) {}
  std::string label;
  std::size_t needed;
  std::size_t available;
};

class BudgetExceededError : public Error {
 public:
  BudgetExceededError(int token_count, int fallback_limit)
      : Error("prompt of " + std::to_string(token_count) + " tokens exceeds fallback limit " +
              std::to_string(fallback_limit)),
        token_count(token_count),
        fallback_limit(fallback_limit) {}
  int token_count;
  int fallback_limit;
};

// Backend client
class BackendError : public Error {
 public:
  using Error::Error;
};

class HttpError : public BackendError {
 public:
  HttpError(int status, const std::string& body)
      : BackendError("http status " + std::to_string(status) + ": " + body), status(status) {}
  int status;
};

class TimeoutError : public BackendError {
 public:
  using BackendError::BackendError;
};

class ExhaustedRetriesError : public BackendError {
 public:
  ExhaustedRetriesError(int attempts, const std::string& last)
      : BackendError("gave up after " + std::to_string(attempts) + " attempt(s): " + last),
        attempts(attempts) {}
  int attempts;
};

class ImageLoadError : public BackendError {
 public:
  explicit ImageLoadError(const std::string& uri)
      : BackendError("cannot load image: " + uri), uri(uri) {}
  std::string uri;
};

class AugmentationError : public BackendError {
 public:
  using BackendError::BackendError;
};

class UnknownSampleError : public Error {
 public:
  explicit UnknownSampleError(const std::string& id)
      : Error("unknown sample id: " + id), id(id) {}
  std::string id;
};

// Eval engine / reporting
class CellFailedError : public Error {
 public:
  using Error::Error;
};

class MalformedPredictionsError : public Error {
 public:
  explicit MalformedPredictionsError(const std::string& path, const std::string& detail = "")
      : Error("malformed predictions file " + path + (detail.empty() ? "" : ": " + detail)),
        path(path) {}
  std::string path;
};

class NoOverlapError : public Error {
 public:
  NoOverlapError() : Error("reports share no (task, shots) cell") {}
};

// CLI / configuration
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace relkit
