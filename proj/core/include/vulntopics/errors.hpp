#pragma once

#include <stdexcept>
#include <string>

namespace vt {

/// Process exit codes used by the command-line tool, one per error class.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kData = 3,
  kMissingArtifact = 4,
  kNetwork = 5,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept = 0;
};

/// Invalid pipeline configuration. `field()` holds the dotted path of the
/// offending key when one is known.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& message, std::string field = {});
  ExitCode exit_code() const noexcept override { return ExitCode::kConfig; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Unreadable or malformed input data.
class DataError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kData; }
};

/// A pipeline stage needs the output of an earlier stage that is not there.
class MissingArtifactError : public Error {
 public:
  MissingArtifactError(const std::string& artifact, const std::string& producer);
  ExitCode exit_code() const noexcept override { return ExitCode::kMissingArtifact; }
};

/// An upstream artifact exists but was produced under a different
/// configuration.
class StaleArtifactError : public Error {
 public:
  StaleArtifactError(const std::string& artifact, const std::string& producer);
  ExitCode exit_code() const noexcept override { return ExitCode::kMissingArtifact; }
};

class NetworkError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kNetwork; }
};

}  // namespace vt
