#pragma once

#include <any>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace am {

using Value = std::any;
using SubmitterId = std::uint64_t;

/// Arguments bound to one method call. Captured by value at submit time so
/// stage bodies never observe the submitting thread's context.
class Args {
 public:
  Args() = default;
  explicit Args(std::vector<Value> values) : values_(std::move(values)) {}

  template <class... Ts>
  static Args of(Ts&&... values) {
    Args args;
    args.values_.reserve(sizeof...(Ts));
    (args.values_.emplace_back(std::forward<Ts>(values)), ...);
    return args;
  }

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  const Value& operator[](std::size_t i) const { return values_.at(i); }

  /// Throws std::bad_any_cast if the stored type differs from T.
  template <class T>
  const T& get(std::size_t i) const {
    return std::any_cast<const T&>(values_.at(i));
  }

  const std::vector<Value>& values() const noexcept { return values_; }

 private:
  std::vector<Value> values_;
};

/// Intermediate variables shared by the stages of a single call. Only names
/// declared on the method may be written.
class Scratch {
 public:
  Scratch() = default;
  explicit Scratch(const std::vector<std::string>* declared) : declared_(declared) {}

  bool declared(std::string_view name) const;
  bool has(std::string_view name) const;
  /// Throws am::Error(ConfigError) for names the method did not declare.
  void set(std::string_view name, Value value);
  const Value& at(std::string_view name) const;

  template <class T>
  const T& get(std::string_view name) const {
    return std::any_cast<const T&>(at(name));
  }

 private:
  const std::vector<std::string>* declared_ = nullptr;
  std::vector<std::pair<std::string, Value>> slots_;
};

/// Everything a stage may read besides monitor state.
struct Frame {
  const Args& args;
  Scratch& scratch;
  SubmitterId submitter;

  template <class T>
  const T& arg(std::size_t i) const {
    return args.get<T>(i);
  }
};

/// Flattens a value into the integer list stored in history records.
/// Supports integral scalars, bool and std::vector<std::int64_t>; anything
/// else (including an empty value) records as an empty list.
std::vector<std::int64_t> to_record(const Value& value);
std::vector<std::int64_t> to_record(const Args& args);

}  // namespace am
