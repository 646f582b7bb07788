#include "activemonitor/value.hpp"

#include <algorithm>

#include "activemonitor/error.hpp"

namespace am {

bool Scratch::declared(std::string_view name) const {
  return declared_ && std::find(declared_->begin(), declared_->end(), name) != declared_->end();
}

bool Scratch::has(std::string_view name) const {
  return std::any_of(slots_.begin(), slots_.end(), [&](const auto& s) { return s.first == name; });
}

void Scratch::set(std::string_view name, Value value) {
  for (auto& slot : slots_) {
    if (slot.first == name) {
      slot.second = std::move(value);
      return;
    }
  }
  if (!declared(name))
    throw Error(Errc::ConfigError, "scratch variable '" + std::string(name) + "' was not declared");
  slots_.emplace_back(std::string(name), std::move(value));
}

const Value& Scratch::at(std::string_view name) const {
  for (const auto& slot : slots_)
    if (slot.first == name) return slot.second;
  throw Error(Errc::ConfigError, "scratch variable '" + std::string(name) + "' is unset");
}

namespace {

template <class T>
bool push_int(const Value& value, std::vector<std::int64_t>& out) {
  if (const T* v = std::any_cast<T>(&value)) {
    out.push_back(static_cast<std::int64_t>(*v));
    return true;
  }
  return false;
}

void append(const Value& value, std::vector<std::int64_t>& out) {
  if (!value.has_value()) return;
  if (const auto* vec = std::any_cast<std::vector<std::int64_t>>(&value)) {
    out.insert(out.end(), vec->begin(), vec->end());
    return;
  }
  push_int<std::int64_t>(value, out) || push_int<int>(value, out) ||
      push_int<std::uint64_t>(value, out) || push_int<std::uint32_t>(value, out) ||
      push_int<long long>(value, out) || push_int<bool>(value, out) ||
      push_int<std::size_t>(value, out);
}

}  // namespace

std::vector<std::int64_t> to_record(const Value& value) {
  std::vector<std::int64_t> out;
  append(value, out);
  return out;
}

std::vector<std::int64_t> to_record(const Args& args) {
  std::vector<std::int64_t> out;
  for (const auto& v : args.values()) append(v, out);
  return out;
}

}  // namespace am
