#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "activemonitor/checker.hpp"
#include "activemonitor/error.hpp"
#include "activemonitor/workloads.hpp"

namespace wl = am::workloads;
using nlohmann::json;

namespace {

std::optional<am::check::SequentialSpec> spec_named(const std::string& name, const wl::WorkloadConfig& c) {
  if (name.empty()) return std::nullopt;
  switch (wl::parse_workload(name)) {
    case wl::WorkloadId::BoundedBuffer: return wl::buffer_spec(c.buffer_size);
    case wl::WorkloadId::ParametrizedBuffer: return wl::parametrized_buffer_spec(c.buffer_size);
    case wl::WorkloadId::SortedList: return wl::sorted_list_spec(wl::initial_list(c));
    case wl::WorkloadId::RoundRobin: return wl::round_robin_spec(c.threads);
    case wl::WorkloadId::TicketedRW: return wl::ticket_spec();
    case wl::WorkloadId::Mix: return wl::counter_spec();
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Check a recorded ActiveMonitor history"};
  std::string path, spec, format = "text";
  bool relaxed = false, oracle = false;
  wl::WorkloadConfig c;
  app.add_option("history", path, "dump file, '-' for stdin")->required();
  app.add_option("--spec", spec, "sequential spec for linearizability: bb, sll, rr, pbb, trw, mix");
  app.add_option("--buffer-size", c.buffer_size)->capture_default_str();
  app.add_option("--threads", c.threads, "round-robin thread count")->capture_default_str();
  app.add_option("--seed", c.seed, "seed of the initial sorted list")->capture_default_str();
  app.add_option("--list-initial", c.list_initial)->capture_default_str();
  app.add_flag("--relaxed", relaxed, "skip rule 3 and lock equivalence");
  app.add_flag("--oracle", oracle, "also run the brute-force linear-extension search");
  app.add_option("--format", format)->check(CLI::IsMember({"text", "json"}));
  CLI11_PARSE(app, argc, argv);

  try {
    am::History history;
    if (path == "-") {
      history = am::read_history(std::cin);
    } else {
      std::ifstream f(path);
      if (!f) throw am::Error(am::Errc::IoError, "cannot open '" + path + "'");
      history = am::read_history(f);
    }
    auto seq = spec_named(spec, c);
    am::check::CheckOptions options;
    options.strict = !relaxed;
    options.spec = seq ? &*seq : nullptr;
    options.linearizability.oracle = oracle;
    auto report = am::check::check_all(history, options);

    if (format == "text") {
      std::cout << am::check::to_text(report);
    } else {
      for (const auto& v : report.verdicts)
        std::cout << json{{"check", v.name}, {"pass", v.pass}, {"message", v.message}, {"events", v.offsets}}.dump()
                  << '\n';
      if (const auto& lin = report.linearizability) {
        json j{{"check", "linearizable"}, {"pass", lin->pass}, {"message", lin->violation},
               {"witness", lin->witness}, {"failed", lin->failed}};
        if (lin->oracle_pass) {
          j["oracle_pass"] = *lin->oracle_pass;
          j["oracle_nodes"] = lin->oracle_nodes;
        }
        std::cout << j.dump() << '\n';
      }
    }
    return report.pass() ? 0 : 1;
  } catch (const am::Error& e) {
    std::cerr << "amcheck: " << e.what() << '\n';
    return 2;
  }
}
