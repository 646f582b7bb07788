#include "activemonitor/method.hpp"

#include <algorithm>

namespace am {

std::vector<std::string> MethodSpec::scratch_names() const {
  std::vector<std::string> names;
  for (const auto& stage : stages)
    for (const auto& name : stage.scratch_decl)
      if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(name);
  return names;
}

void MonitorSpec::add_method(MethodSpec method) {
  std::string key = method.name;
  if (!methods.emplace(key, std::move(method)).second)
    throw Error(Errc::ConfigError, "monitor '" + name + "' already has a method '" + key + "'");
}

ValidationReport validate_method(const MethodSpec& spec) {
  ValidationReport report;
  report.stage_count = spec.stages.size();
  for (std::size_t i = 0; i < spec.stages.size(); ++i)
    if (spec.stages[i].precondition.tautology()) report.tautology_stages.push_back(i);

  if (spec.stages.empty()) report.errors.push_back(ValidationError::EmptyMethod);
  // A blocking call back into the same monitor would park the executor on
  // work only it can run.
  bool recursive = std::any_of(spec.calls.begin(), spec.calls.end(), [](const CallDecl& c) {
    return c.monitor.empty() && c.kind == MethodKind::Blocking;
  });
  if (recursive) report.errors.push_back(ValidationError::RecursiveBlocking);
  report.valid = report.errors.empty();
  return report;
}

std::vector<TaskInstance> derive_tasks(const MethodSpec& method, Args args, SubmitterId submitter,
                                       std::uint64_t seq_base, std::uint32_t monitor_id,
                                       std::uint64_t task_id_base) {
  auto shared_args = std::make_shared<const Args>(std::move(args));
  // The scratch keeps a pointer to the declared names, so they live alongside it.
  struct Owned {
    std::vector<std::string> names;
    Scratch scratch;
  };
  auto owned = std::make_shared<Owned>();
  owned->names = method.scratch_names();
  owned->scratch = Scratch(&owned->names);
  std::shared_ptr<Scratch> scratch(owned, &owned->scratch);

  std::vector<TaskInstance> tasks;
  tasks.reserve(method.stages.size());
  for (std::size_t i = 0; i < method.stages.size(); ++i) {
    TaskInstance t;
    t.task_id = task_id_base + i;
    t.monitor_id = monitor_id;
    t.method = method.name;
    t.stage = static_cast<std::uint32_t>(i);
    t.submitter = submitter;
    t.seq = seq_base + i;
    t.args = shared_args;
    t.scratch = scratch;
    tasks.push_back(std::move(t));
  }
  return tasks;
}

}  // namespace am
