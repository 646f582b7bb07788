#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "activemonitor/error.hpp"
#include "activemonitor/value.hpp"

namespace am {

/// Stage precondition. The constant-true predicate is represented explicitly
/// so the scheduler never special-cases a missing guard.
class Guard {
 public:
  using Fn = std::function<bool(const std::any& state, const Frame& frame)>;

  static Guard always() { return Guard(); }
  static Guard when(Fn fn) { return Guard(std::move(fn)); }

  bool tautology() const noexcept { return !fn_; }
  bool operator()(const std::any& state, const Frame& frame) const {
    return !fn_ || fn_(state, frame);
  }

 private:
  Guard() = default;
  explicit Guard(Fn fn) : fn_(std::move(fn)) {}

  Fn fn_;
};

/// An empty body makes the stage a barrier task.
using Body = std::function<Value(std::any& state, Frame& frame)>;

struct Stage {
  Guard precondition = Guard::always();
  Body body;
  std::vector<std::string> scratch_decl;
};

enum class MethodKind { Blocking, NonBlocking };

/// Declared outgoing monitor call made from inside a method body. An empty
/// monitor name refers to the method's own monitor.
struct CallDecl {
  std::string monitor;
  std::string method;
  MethodKind kind = MethodKind::Blocking;
};

struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::Blocking;
  std::vector<Stage> stages;
  bool returns_value = false;
  std::vector<CallDecl> calls;

  /// Union of all stage scratch declarations, in declaration order.
  std::vector<std::string> scratch_names() const;
};

struct MonitorSpec {
  std::string name;
  std::function<std::any()> state_init;
  std::map<std::string, MethodSpec, std::less<>> methods;

  /// Throws am::Error(ConfigError) if a method of the same name exists.
  void add_method(MethodSpec method);
};

enum class ValidationError { EmptyMethod, RecursiveBlocking };

struct ValidationReport {
  bool valid = true;
  std::vector<ValidationError> errors;
  std::size_t stage_count = 0;
  std::vector<std::size_t> tautology_stages;
};

/// Checks that a method is expressible in the staged model: at least one
/// stage and no blocking call back into its own monitor.
ValidationReport validate_method(const MethodSpec& spec);

/// One runnable unit derived from a method stage.
struct TaskInstance {
  std::uint64_t task_id = 0;
  std::uint32_t monitor_id = 0;
  std::string method;
  std::uint32_t stage = 0;
  SubmitterId submitter = 0;
  std::uint64_t seq = 0;
  std::shared_ptr<const Args> args;
  std::shared_ptr<Scratch> scratch;
  std::uint32_t attempts = 0;
};

/// Expands a call into its ordered stage chain. All instances share one
/// argument pack and one scratch object; stage i gets seq_base + i.
std::vector<TaskInstance> derive_tasks(const MethodSpec& method, Args args, SubmitterId submitter,
                                       std::uint64_t seq_base, std::uint32_t monitor_id = 0,
                                       std::uint64_t task_id_base = 0);

namespace detail {

template <class State>
State& state_ref(std::any& state) {
  return *std::any_cast<State>(&state);
}

template <class State>
const State& state_ref(const std::any& state) {
  return *std::any_cast<State>(&state);
}

template <class State, class Pred>
Guard::Fn adapt_guard(Pred pred) {
  return [pred = std::move(pred)](const std::any& state, const Frame& frame) -> bool {
    if constexpr (std::is_invocable_v<const Pred&, const State&, const Frame&>) {
      return pred(state_ref<State>(state), frame);
    } else {
      return pred(state_ref<State>(state));
    }
  };
}

template <class State, class Fn>
std::pair<Body, bool> adapt_body(Fn fn) {
  constexpr bool with_frame = std::is_invocable_v<Fn&, State&, Frame&>;
  using Result = std::conditional_t<with_frame, std::invoke_result<Fn&, State&, Frame&>,
                                    std::invoke_result<Fn&, State&>>;
  using R = typename Result::type;
  Body body = [fn = std::move(fn)](std::any& state, Frame& frame) mutable -> Value {
    auto& s = state_ref<State>(state);
    if constexpr (std::is_void_v<R>) {
      if constexpr (with_frame) fn(s, frame); else fn(s);
      return {};
    } else if constexpr (with_frame) {
      return Value(fn(s, frame));
    } else {
      return Value(fn(s));
    }
  };
  return {std::move(body), !std::is_void_v<R>};
}

}  // namespace detail

/// Fluent construction of one method's stage chain. `waituntil` opens a new
/// stage guarded by the predicate; `run` supplies the statements of the
/// current stage, opening a tautology-guarded stage when none is open.
template <class State>
class MethodBuilder {
 public:
  explicit MethodBuilder(MethodSpec& spec) : spec_(&spec) {}

  template <class Pred>
  MethodBuilder& waituntil(Pred pred) {
    Stage stage;
    stage.precondition = Guard::when(detail::adapt_guard<State>(std::move(pred)));
    spec_->stages.push_back(std::move(stage));
    return *this;
  }

  template <class Fn>
  MethodBuilder& run(Fn fn) {
    auto [body, returns] = detail::adapt_body<State>(std::move(fn));
    if (spec_->stages.empty()) spec_->stages.emplace_back();
    Stage& stage = spec_->stages.back();
    if (!stage.body) {
      stage.body = std::move(body);
    } else {
      stage.body = [first = std::move(stage.body), second = std::move(body)](
                       std::any& state, Frame& frame) -> Value {
        Value v = first(state, frame);
        Value w = second(state, frame);
        return w.has_value() ? w : v;
      };
    }
    spec_->returns_value = spec_->returns_value || returns;
    return *this;
  }

  MethodBuilder& scratch(std::string name) {
    if (spec_->stages.empty()) spec_->stages.emplace_back();
    spec_->stages.back().scratch_decl.push_back(std::move(name));
    return *this;
  }

  MethodBuilder& calls(std::string monitor, std::string method, MethodKind kind) {
    spec_->calls.push_back(CallDecl{std::move(monitor), std::move(method), kind});
    return *this;
  }

 private:
  MethodSpec* spec_;
};

template <class State>
class MonitorBuilder {
 public:
  template <class Init>
  MonitorBuilder(std::string name, Init init) {
    spec_.name = std::move(name);
    spec_.state_init = [init = std::move(init)]() -> std::any { return std::any(State(init())); };
  }

  MethodBuilder<State> blocking(const std::string& name) { return add(name, MethodKind::Blocking); }
  MethodBuilder<State> nonblocking(const std::string& name) {
    return add(name, MethodKind::NonBlocking);
  }
  MethodBuilder<State> method(const std::string& name, MethodKind kind) { return add(name, kind); }

  MonitorSpec build() const { return spec_; }

 private:
  MethodBuilder<State> add(const std::string& name, MethodKind kind) {
    MethodSpec method;
    method.name = name;
    method.kind = kind;
    spec_.add_method(std::move(method));
    return MethodBuilder<State>(spec_.methods.find(name)->second);
  }

  MonitorSpec spec_;
};

}  // namespace am
