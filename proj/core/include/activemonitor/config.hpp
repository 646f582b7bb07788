#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "activemonitor/value.hpp"

namespace am {

enum class OrderingMode {
  Strict,   // consecutive cross-monitor submissions wait for the previous non-blocking task
  Relaxed,  // per-monitor submission order only
};

/// What a failing stage body reports to a user hook.
struct TaskFailure {
  std::uint64_t task_id;
  std::uint32_t monitor_id;
  std::string method;
  std::uint32_t stage;
  std::uint32_t attempt;  // 1-based attempt that just failed
  std::exception_ptr error;
};

struct HookDecision {
  enum class Action { Retry, Fail, Substitute };
  Action action = Action::Fail;
  Value value;  // used by Substitute

  static HookDecision retry() { return {Action::Retry, {}}; }
  static HookDecision fail() { return {Action::Fail, {}}; }
  static HookDecision substitute(Value v) { return {Action::Substitute, std::move(v)}; }
};

class ExceptionPolicy {
 public:
  enum class Kind { Ignore, Retry, Hook };
  using HookFn = std::function<HookDecision(const TaskFailure&)>;

  static ExceptionPolicy ignore() { return ExceptionPolicy(Kind::Ignore, 1, {}); }
  /// max_attempts counts every execution, the first one included.
  static ExceptionPolicy retry(std::uint32_t max_attempts);
  static ExceptionPolicy hook(HookFn fn);

  Kind kind() const noexcept { return kind_; }
  std::uint32_t max_attempts() const noexcept { return max_attempts_; }
  const HookFn& hook_fn() const noexcept { return hook_; }

  /// "ignore", "retry:N" or "hook".
  std::string to_string() const;

 private:
  ExceptionPolicy(Kind kind, std::uint32_t attempts, HookFn hook)
      : kind_(kind), max_attempts_(attempts), hook_(std::move(hook)) {}

  Kind kind_;
  std::uint32_t max_attempts_;
  HookFn hook_;
};

struct RuntimeConfig {
  std::size_t max_monitor_threads = 1;
  OrderingMode ordering_mode = OrderingMode::Strict;
  /// Unset means unbounded. Zero turns every non-blocking submission into a
  /// blocking one.
  std::optional<std::size_t> pending_limit;
  ExceptionPolicy exception_policy = ExceptionPolicy::ignore();
  bool history_recording = false;
  /// Number of yield-and-recheck rounds an idle executor, or a submitter
  /// waiting for a pending slot, makes before it parks.
  std::size_t idle_spins = 8;
};

using EnvLookup = std::function<std::optional<std::string>(std::string_view name)>;

/// Applies one `key = value` setting. Throws am::Error(ConfigError) on an
/// unknown key or malformed value.
void apply_setting(RuntimeConfig& config, std::string_view key, std::string_view value);

/// Reads `key = value` lines; `#` starts a comment.
RuntimeConfig load_config(const std::filesystem::path& path, RuntimeConfig base = {});

/// AM_MAX_MONITOR_THREADS, AM_ORDERING_MODE, AM_PENDING_LIMIT,
/// AM_EXCEPTION_POLICY and AM_HISTORY_RECORDING override the matching keys.
void apply_env_overrides(RuntimeConfig& config, const EnvLookup& lookup);
void apply_env_overrides(RuntimeConfig& config);

std::string to_string(OrderingMode mode);
OrderingMode parse_ordering_mode(std::string_view text);
ExceptionPolicy parse_exception_policy(std::string_view text);
/// "unbounded" (or "none") yields nullopt.
std::optional<std::size_t> parse_pending_limit(std::string_view text);

}  // namespace am
