#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace dce {

/// Invalid or inconsistent configuration: bad key, value out of range,
/// resume against a different config, missing credentials.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transient transport-level failure (connection refused, 5xx, 429).
/// Callers may retry; the pipeline aborts resumably once retries are spent.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A whole generation batch failed (unparseable response after retries).
/// Carries the raw backend response so it can be logged.
class BatchFailure : public std::runtime_error {
 public:
  BatchFailure(const std::string& message, std::string raw_response)
      : std::runtime_error(message), raw_response_(std::move(raw_response)) {}
  const std::string& raw_response() const { return raw_response_; }

 private:
  std::string raw_response_;
};

/// Memory-store or run-directory I/O failure. Campaign-halting.
class StorageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A metric was asked to run on input it cannot analyze
/// (too few batches, wrong ablation arm, empty values).
class AnalysisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cosine against a zero-norm vector.
class UndefinedSimilarity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace dce
