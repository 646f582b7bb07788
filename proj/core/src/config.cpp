#include "activemonitor/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>

#include "activemonitor/error.hpp"

namespace am {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::size_t parse_count(std::string_view text, std::string_view what) {
  text = trim(text);
  std::size_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw Error(Errc::ConfigError, std::string(what) + ": expected a non-negative integer, got '" +
                                       std::string(text) + "'");
  return value;
}

bool parse_bool(std::string_view text, std::string_view what) {
  std::string v = lower(trim(text));
  if (v == "on" || v == "true" || v == "1" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "0" || v == "no") return false;
  throw Error(Errc::ConfigError, std::string(what) + ": expected on/off, got '" + v + "'");
}

}  // namespace

ExceptionPolicy ExceptionPolicy::retry(std::uint32_t max_attempts) {
  if (max_attempts == 0) throw Error(Errc::ConfigError, "retry policy needs at least one attempt");
  return ExceptionPolicy(Kind::Retry, max_attempts, {});
}

ExceptionPolicy ExceptionPolicy::hook(HookFn fn) {
  if (!fn) throw Error(Errc::ConfigError, "hook policy needs a callback");
  return ExceptionPolicy(Kind::Hook, 1, std::move(fn));
}

std::string ExceptionPolicy::to_string() const {
  switch (kind_) {
    case Kind::Ignore: return "ignore";
    case Kind::Retry: return "retry:" + std::to_string(max_attempts_);
    case Kind::Hook: return "hook";
  }
  return "ignore";
}

std::string to_string(OrderingMode mode) { return mode == OrderingMode::Strict ? "strict" : "relaxed"; }

OrderingMode parse_ordering_mode(std::string_view text) {
  std::string v = lower(trim(text));
  if (v == "strict") return OrderingMode::Strict;
  if (v == "relaxed") return OrderingMode::Relaxed;
  throw Error(Errc::ConfigError, "ordering mode must be strict or relaxed, got '" + v + "'");
}

ExceptionPolicy parse_exception_policy(std::string_view text) {
  std::string v = lower(trim(text));
  if (v == "ignore") return ExceptionPolicy::ignore();
  if (v.rfind("retry:", 0) == 0) {
    auto n = parse_count(std::string_view(v).substr(6), "exception_policy retry count");
    if (n == 0 || n > 0xffffffffu)
      throw Error(Errc::ConfigError, "retry count must be between 1 and 2^32-1");
    return ExceptionPolicy::retry(static_cast<std::uint32_t>(n));
  }
  throw Error(Errc::ConfigError, "exception policy must be ignore or retry:N, got '" + v + "'");
}

std::optional<std::size_t> parse_pending_limit(std::string_view text) {
  std::string v = lower(trim(text));
  if (v == "unbounded" || v == "none") return std::nullopt;
  return parse_count(v, "pending_limit");
}

void apply_setting(RuntimeConfig& config, std::string_view key, std::string_view value) {
  std::string k = lower(trim(key));
  if (k == "max_monitor_threads") {
    auto n = parse_count(value, k);
    if (n == 0) throw Error(Errc::ConfigError, "max_monitor_threads must be at least 1");
    config.max_monitor_threads = n;
  } else if (k == "ordering_mode") {
    config.ordering_mode = parse_ordering_mode(value);
  } else if (k == "pending_limit") {
    config.pending_limit = parse_pending_limit(value);
  } else if (k == "exception_policy") {
    config.exception_policy = parse_exception_policy(value);
  } else if (k == "history_recording") {
    config.history_recording = parse_bool(value, k);
  } else if (k == "idle_spins") {
    config.idle_spins = parse_count(value, k);
  } else {
    throw Error(Errc::ConfigError, "unknown configuration key '" + k + "'");
  }
}

RuntimeConfig load_config(const std::filesystem::path& path, RuntimeConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoError, "cannot open configuration file " + path.string());
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw Error(Errc::ConfigError,
                  path.string() + ":" + std::to_string(number) + ": expected key = value");
    try {
      apply_setting(base, view.substr(0, eq), view.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(Errc::ConfigError, path.string() + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

void apply_env_overrides(RuntimeConfig& config, const EnvLookup& lookup) {
  static constexpr std::pair<const char*, const char*> kVars[] = {
      {"AM_MAX_MONITOR_THREADS", "max_monitor_threads"},
      {"AM_ORDERING_MODE", "ordering_mode"},
      {"AM_PENDING_LIMIT", "pending_limit"},
      {"AM_EXCEPTION_POLICY", "exception_policy"},
      {"AM_HISTORY_RECORDING", "history_recording"},
  };
  for (auto [var, key] : kVars)
    if (auto value = lookup(var)) apply_setting(config, key, *value);
}

void apply_env_overrides(RuntimeConfig& config) {
  apply_env_overrides(config, [](std::string_view name) -> std::optional<std::string> {
    const char* v = std::getenv(std::string(name).c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  });
}

}  // namespace am
