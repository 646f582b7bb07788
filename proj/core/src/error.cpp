#include "activemonitor/error.hpp"

namespace am {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::ConfigError: return "ConfigError";
    case Errc::SpawnFailure: return "SpawnFailure";
    case Errc::RuntimeShutDown: return "RuntimeShutDown";
    case Errc::MonitorUnknown: return "MonitorUnknown";
    case Errc::TaskFailed: return "TaskFailed";
    case Errc::Timeout: return "Timeout";
    case Errc::Stranded: return "Stranded";
    case Errc::RecursiveBlocking: return "RecursiveBlocking";
    case Errc::EmptyMethod: return "EmptyMethod";
    case Errc::MalformedHistory: return "MalformedHistory";
    case Errc::OracleTooLarge: return "OracleTooLarge";
    case Errc::TooFewRuns: return "TooFewRuns";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

TaskFailedError::TaskFailedError(std::string message, std::uint32_t attempts,
                                 std::exception_ptr cause, bool shutdown)
    : Error(Errc::TaskFailed, message),
      attempts_(attempts),
      cause_(std::move(cause)),
      shutdown_(shutdown) {}

namespace {
std::string stranded_message(const std::vector<std::uint64_t>& ids) {
  std::string s = std::to_string(ids.size()) + " task(s) can never run:";
  for (auto id : ids) s += " " + std::to_string(id);
  return s;
}
}  // namespace

StrandedError::StrandedError(std::vector<std::uint64_t> task_ids)
    : Error(Errc::Stranded, stranded_message(task_ids)), task_ids_(std::move(task_ids)) {}

}  // namespace am
