#pragma once

#include <stdexcept>
#include <string>

namespace adgraph {

/// Base class for every error raised by the pipeline.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output.
class IoError : public Error {
 public:
  using Error::Error;
};

/// An input file was read but yielded no valid records.
class EmptyCorpusError : public Error {
 public:
  using Error::Error;
};

/// Malformed input that cannot be handled per-record.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A configuration value violates its schema. `field()` is the dotted path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error("config error at " + field + ": " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A stage was started before the stage producing one of its inputs.
class StageDependencyError : public Error {
 public:
  StageDependencyError(std::string required_stage, const std::string& what)
      : Error(what), required_stage_(std::move(required_stage)) {}
  const std::string& required_stage() const noexcept { return required_stage_; }

 private:
  std::string required_stage_;
};

/// An upstream artifact no longer matches the hash recorded in its manifest.
class StaleInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace adgraph
