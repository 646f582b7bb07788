#pragma once

#include <cstdint>
#include <exception>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace am {

enum class Errc {
  ConfigError,
  SpawnFailure,
  RuntimeShutDown,
  MonitorUnknown,
  TaskFailed,
  Timeout,
  Stranded,
  RecursiveBlocking,
  EmptyMethod,
  MalformedHistory,
  OracleTooLarge,
  TooFewRuns,
  IoError,
};

std::string_view to_string(Errc code) noexcept;

/// Base of every exception thrown by the library. The code identifies the
/// failure class; what() carries the human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by a blocking call or by await when the task chain ended in Failed.
class TaskFailedError : public Error {
 public:
  TaskFailedError(std::string message, std::uint32_t attempts, std::exception_ptr cause,
                  bool shutdown);

  std::uint32_t attempts() const noexcept { return attempts_; }
  /// The exception thrown by the stage body, if any.
  std::exception_ptr cause() const noexcept { return cause_; }
  /// True when the task never finished because the runtime was shut down.
  bool shutdown() const noexcept { return shutdown_; }

 private:
  std::uint32_t attempts_;
  std::exception_ptr cause_;
  bool shutdown_;
};

class StrandedError : public Error {
 public:
  explicit StrandedError(std::vector<std::uint64_t> task_ids);

  const std::vector<std::uint64_t>& task_ids() const noexcept { return task_ids_; }

 private:
  std::vector<std::uint64_t> task_ids_;
};

}  // namespace am
