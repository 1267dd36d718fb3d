#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wexfab/fetcher.hpp"
#include "wexfab/item.hpp"
#include "wexfab/operators.hpp"
#include "wexfab/wetdl.hpp"

namespace wexfab::dataflow {

using wetdl::Diagnostic;

// --------------------------------------------------------------------
// Services

struct ServiceEntry {
  std::string name;
  std::vector<wetdl::Param> params;
  bool operator==(const ServiceEntry&) const = default;
};

/// Attached services in attachment order. Extraction operators are looked up
/// by their kind name ("fetch", "db", ...); other names are opaque services.
class ServiceRegistry {
 public:
  std::string session;

  static ServiceRegistry with_builtin_services(std::string session = "default");

  bool attached(std::string_view name) const { return find(name) != nullptr; }
  const ServiceEntry* find(std::string_view name) const;
  ServiceEntry* find(std::string_view name);
  /// False if the name is already attached.
  bool attach(ServiceEntry entry);
  /// False if the name is not attached.
  bool detach(std::string_view name);

  const std::vector<ServiceEntry>& entries() const { return entries_; }
  std::vector<std::string> names() const;

  Json to_json() const;
  static ServiceRegistry from_json(const Json& j);
  /// Stable, LF-terminated JSON text.
  std::string dump() const;

  bool operator==(const ServiceRegistry&) const = default;

 private:
  std::vector<ServiceEntry> entries_;
};

struct Action {
  enum class Kind { Detach, Attach, Update };
  Kind kind = Kind::Detach;
  std::string service;
  std::vector<wetdl::Param> params;

  /// e.g. "Detach(VideoService)", "Update(AudioService, SoundEncoder=classLpc)".
  std::string str() const;
  bool operator==(const Action&) const = default;
};

std::string_view action_kind_name(Action::Kind kind);

struct ReconfigurationPlan {
  std::string origin;  // originating policy name
  std::vector<Action> actions;

  bool empty() const { return actions.empty(); }
  bool operator==(const ReconfigurationPlan&) const = default;
};

// --------------------------------------------------------------------
// Plans

struct PlanNode {
  wetdl::OperatorSpec spec;
  operators::OperatorConfig config;
  std::vector<std::string> successors;

  const std::string& name() const { return spec.name; }
};

struct ExecutablePlan {
  wetdl::TaskNetwork network;
  std::vector<PlanNode> nodes;  // topological order
  std::vector<std::pair<std::string, Item>> entry_items;
  operators::CompileOptions options;

  const PlanNode* find(std::string_view name) const;
  std::size_t edge_count() const;
  std::vector<std::string> order() const;
};

class CompileError : public std::runtime_error {
 public:
  explicit CompileError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Validates, checks that every non-dummy kind is attached in the registry
/// (SERVICE_NOT_ATTACHED), compiles operator configs and orders nodes
/// topologically, ties broken by declaration order.
ExecutablePlan compile(const wetdl::TaskNetwork& net, const ServiceRegistry& registry,
                       const operators::CompileOptions& options = {});

class ReconfigurationError : public std::runtime_error {
 public:
  explicit ReconfigurationError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Checks `rplan` against `registry` action by action without changing it.
/// Errors: UNKNOWN_SERVICE, DUP_SERVICE.
std::vector<Diagnostic> check_actions(const ServiceRegistry& registry, const ReconfigurationPlan& rplan);

/// All-or-nothing: returns the reconfigured plan and commits the registry,
/// or throws ReconfigurationError leaving both untouched.
ExecutablePlan apply_reconfiguration(const ExecutablePlan& plan, ServiceRegistry& registry,
                                     const ReconfigurationPlan& rplan);

// --------------------------------------------------------------------
// Execution

struct Counters {
  std::size_t items_in = 0;
  std::size_t items_out = 0;
  std::size_t errors = 0;
  std::size_t filtered = 0;
  std::size_t discarded = 0;
  std::size_t warnings = 0;
  bool operator==(const Counters&) const = default;
};

struct RunReport {
  std::string source;
  std::vector<std::pair<std::string, Counters>> operators;
  std::vector<Item> outputs;
  std::map<std::string, std::vector<std::string>> sinks;
  std::optional<double> wall_time_ms;

  const Counters* counters(std::string_view op) const;
  std::vector<Record> records() const;

  Json to_json() const;
  /// Pretty JSON, LF-terminated; wall time only when recorded.
  std::string dump() const;
};

struct EngineOptions {
  const Fetcher* fetcher = nullptr;
  std::filesystem::path sink_dir;
  std::function<void(const std::string&)> trace;
  bool timing = false;
};

/// Single-threaded scheduler: each step takes the oldest queued item of the
/// first node (in topological order) that has one. Between steps the engine
/// is quiescent and may be reconfigured.
class Engine {
 public:
  Engine(ExecutablePlan plan, EngineOptions options = {});

  void seed(const std::string& node, Item item);
  void seed_entries();

  bool step();
  void run();
  bool idle() const;

  /// Swaps in a new plan; queued items of nodes that no longer exist are
  /// dropped and counted as discarded.
  void reconfigure(ExecutablePlan plan);

  const ExecutablePlan& plan() const { return plan_; }
  std::size_t pending(const std::string& node) const;
  RunReport report() const;

 private:
  Counters& counters(const std::string& node);
  void trace(const std::string& op, std::string_view what, std::string_view kind) const;

  ExecutablePlan plan_;
  EngineOptions options_;
  std::map<std::string, std::deque<Item>> queues_;
  std::vector<std::pair<std::string, Counters>> counters_;
  std::vector<Item> outputs_;
  operators::SinkSet sinks_;
  std::chrono::steady_clock::duration elapsed_{};
};

/// Seeds the plan's entry items; each caller item goes to every entry point
/// without inline data. With no caller items such entry points receive one
/// empty Text trigger.
RunReport execute(const ExecutablePlan& plan, const std::vector<Item>& initial, const EngineOptions& options = {});

/// Trace line format.
std::string trace_line(std::string_view op, std::string_view what, std::string_view payload_kind);

}  // namespace wexfab::dataflow
