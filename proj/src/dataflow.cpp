#include "wexfab/dataflow.hpp"

#include <algorithm>
#include <set>

namespace wexfab::dataflow {

namespace {

Diagnostic error(std::string code, std::string message, std::string locus) {
  return {wetdl::Severity::Error, std::move(code), std::move(message), std::move(locus)};
}

std::string first_message(const std::vector<Diagnostic>& diagnostics, const char* fallback) {
  return diagnostics.empty() ? fallback : diagnostics.front().str();
}

bool matches_service(const wetdl::OperatorSpec& op, std::string_view service) {
  return op.name == service || wetdl::kind_name(op.kind) == service;
}

}  // namespace

// --------------------------------------------------------------------
// ServiceRegistry

ServiceRegistry ServiceRegistry::with_builtin_services(std::string session) {
  ServiceRegistry r;
  r.session = std::move(session);
  for (auto kind : {"query", "fetch", "parse", "filter", "extract", "transform", "db"}) r.attach({kind, {}});
  return r;
}

const ServiceEntry* ServiceRegistry::find(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

ServiceEntry* ServiceRegistry::find(std::string_view name) {
  for (auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

bool ServiceRegistry::attach(ServiceEntry entry) {
  if (attached(entry.name)) return false;
  entries_.push_back(std::move(entry));
  return true;
}

bool ServiceRegistry::detach(std::string_view name) {
  auto it = std::find_if(entries_.begin(), entries_.end(), [&](const ServiceEntry& e) { return e.name == name; });
  if (it == entries_.end()) return false;
  entries_.erase(it);
  return true;
}

std::vector<std::string> ServiceRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& e : entries_) out.push_back(e.name);
  return out;
}

Json ServiceRegistry::to_json() const {
  Json services = Json::array();
  for (const auto& e : entries_) {
    Json params = Json::array();
    for (const auto& p : e.params) params.push_back(Json::array({p.key, p.value}));
    services.push_back(Json{{"name", e.name}, {"params", params}});
  }
  return Json{{"session", session}, {"services", services}};
}

ServiceRegistry ServiceRegistry::from_json(const Json& j) {
  ServiceRegistry r;
  r.session = j.value("session", std::string("default"));
  for (const auto& s : j.at("services")) {
    ServiceEntry e;
    e.name = s.at("name").get<std::string>();
    for (const auto& p : s.value("params", Json::array())) {
      e.params.push_back({p.at(0).get<std::string>(), p.at(1).get<std::string>()});
    }
    if (!r.attach(std::move(e))) throw std::invalid_argument("duplicate service in registry");
  }
  return r;
}

std::string ServiceRegistry::dump() const { return to_json().dump(2) + "\n"; }

std::string_view action_kind_name(Action::Kind kind) {
  switch (kind) {
    case Action::Kind::Detach: return "Detach";
    case Action::Kind::Attach: return "Attach";
    case Action::Kind::Update: return "Update";
  }
  return "Detach";
}

std::string Action::str() const {
  std::string out = std::string(action_kind_name(kind)) + "(" + service;
  for (const auto& p : params) out += ", " + p.key + "=" + p.value;
  return out + ")";
}

// --------------------------------------------------------------------
// Compilation

const PlanNode* ExecutablePlan::find(std::string_view name) const {
  for (const auto& n : nodes) {
    if (n.name() == name) return &n;
  }
  return nullptr;
}

std::size_t ExecutablePlan::edge_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n += node.successors.size();
  return n;
}

std::vector<std::string> ExecutablePlan::order() const {
  std::vector<std::string> out;
  for (const auto& n : nodes) out.push_back(n.name());
  return out;
}

CompileError::CompileError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(first_message(diagnostics, "compile error")), diagnostics_(std::move(diagnostics)) {}

ReconfigurationError::ReconfigurationError(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(first_message(diagnostics, "reconfiguration rejected")),
      diagnostics_(std::move(diagnostics)) {}

ExecutablePlan compile(const wetdl::TaskNetwork& net, const ServiceRegistry& registry,
                       const operators::CompileOptions& options) {
  auto diagnostics = validate_network(net);
  if (wetdl::has_errors(diagnostics)) throw CompileError(std::move(diagnostics));
  diagnostics.clear();

  const std::size_t n = net.operators.size();
  std::vector<std::optional<operators::OperatorConfig>> configs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& op = net.operators[i];
    if (op.kind != wetdl::OperatorKind::Dummy && !registry.attached(wetdl::kind_name(op.kind))) {
      diagnostics.push_back(error("SERVICE_NOT_ATTACHED",
                                  "no '" + std::string(wetdl::kind_name(op.kind)) + "' service is attached",
                                  op.name));
      continue;
    }
    auto compiled = operators::compile_operator(op, options);
    diagnostics.insert(diagnostics.end(), compiled.diagnostics.begin(), compiled.diagnostics.end());
    configs[i] = std::move(compiled.config);
  }
  if (wetdl::has_errors(diagnostics)) throw CompileError(std::move(diagnostics));

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < n; ++i) index[net.operators[i].name] = i;
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& op : net.operators) {
    for (const auto& t : op.forward_to) ++indegree[index.at(t)];
  }
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.insert(i);
  }

  ExecutablePlan plan;
  plan.network = net;
  plan.options = options;
  while (!ready.empty()) {
    std::size_t i = *ready.begin();
    ready.erase(ready.begin());
    const auto& op = net.operators[i];
    plan.nodes.push_back({op, std::move(*configs[i]), op.forward_to});
    for (const auto& t : op.forward_to) {
      if (--indegree[index.at(t)] == 0) ready.insert(index.at(t));
    }
  }

  for (const auto& node : plan.nodes) {
    for (const auto& data : node.spec.inline_data) {
      Item item = is_absolute_url(data) ? make_url(data, node.name()) : make_text(data, node.name());
      plan.entry_items.emplace_back(node.name(), std::move(item));
    }
  }
  return plan;
}

// --------------------------------------------------------------------
// Reconfiguration

std::vector<Diagnostic> check_actions(const ServiceRegistry& registry, const ReconfigurationPlan& rplan) {
  std::vector<Diagnostic> out;
  ServiceRegistry reg = registry;
  for (const auto& a : rplan.actions) {
    switch (a.kind) {
      case Action::Kind::Detach:
        if (!reg.detach(a.service)) {
          out.push_back(error("UNKNOWN_SERVICE", a.str() + ": service '" + a.service + "' is not attached", a.service));
        }
        break;
      case Action::Kind::Attach:
        if (!reg.attach({a.service, a.params})) {
          out.push_back(error("DUP_SERVICE", a.str() + ": service '" + a.service + "' is already attached", a.service));
        }
        break;
      case Action::Kind::Update:
        if (auto* e = reg.find(a.service)) {
          wetdl::OperatorSpec scratch;
          scratch.params = e->params;
          for (const auto& p : a.params) scratch.set_param(p.key, p.value);
          e->params = scratch.params;
        } else {
          out.push_back(error("UNKNOWN_SERVICE", a.str() + ": service '" + a.service + "' is not attached", a.service));
        }
        break;
    }
  }
  return out;
}

ExecutablePlan apply_reconfiguration(const ExecutablePlan& plan, ServiceRegistry& registry,
                                     const ReconfigurationPlan& rplan) {
  auto diagnostics = check_actions(registry, rplan);
  if (!diagnostics.empty()) throw ReconfigurationError(std::move(diagnostics));

  ServiceRegistry reg = registry;
  wetdl::TaskNetwork net = plan.network;
  for (const auto& a : rplan.actions) {
    switch (a.kind) {
      case Action::Kind::Detach: {
        reg.detach(a.service);
        std::set<std::string> removed;
        for (const auto& op : net.operators) {
          if (matches_service(op, a.service)) removed.insert(op.name);
        }
        std::erase_if(net.operators, [&](const wetdl::OperatorSpec& op) { return removed.count(op.name) > 0; });
        for (auto& op : net.operators) {
          std::erase_if(op.forward_to, [&](const std::string& t) { return removed.count(t) > 0; });
        }
        break;
      }
      case Action::Kind::Attach:
        reg.attach({a.service, a.params});
        break;
      case Action::Kind::Update: {
        auto* e = reg.find(a.service);
        wetdl::OperatorSpec scratch;
        scratch.params = e->params;
        for (const auto& p : a.params) scratch.set_param(p.key, p.value);
        e->params = scratch.params;
        for (auto& op : net.operators) {
          if (!matches_service(op, a.service)) continue;
          for (const auto& p : a.params) op.set_param(p.key, p.value);
        }
        break;
      }
    }
  }

  ExecutablePlan next;
  try {
    next = compile(net, reg, plan.options);
  } catch (const CompileError& e) {
    throw ReconfigurationError(e.diagnostics());
  }
  registry = std::move(reg);
  return next;
}

// --------------------------------------------------------------------
// Execution

std::string trace_line(std::string_view op, std::string_view what, std::string_view payload_kind) {
  return std::string(op) + " " + std::string(what) + " " + std::string(payload_kind);
}

const Counters* RunReport::counters(std::string_view op) const {
  for (const auto& [name, c] : operators) {
    if (name == op) return &c;
  }
  return nullptr;
}

std::vector<Record> RunReport::records() const {
  std::vector<Record> out;
  for (const auto& item : outputs) {
    if (auto* r = std::get_if<Record>(&item.payload)) out.push_back(*r);
  }
  return out;
}

Json RunReport::to_json() const {
  Json ops = Json::array();
  for (const auto& [name, c] : operators) {
    ops.push_back(Json{{"name", name},
                       {"items_in", c.items_in},
                       {"items_out", c.items_out},
                       {"errors", c.errors},
                       {"filtered", c.filtered},
                       {"discarded", c.discarded},
                       {"warnings", c.warnings}});
  }
  Json outs = Json::array();
  for (const auto& item : outputs) outs.push_back(wexfab::to_json(item));
  Json sink = Json::object();
  for (const auto& [target, lines] : sinks) sink[target.empty() ? "-" : target] = lines;
  Json j{{"source", source}, {"operators", ops}, {"outputs", outs}, {"sinks", sink}};
  if (wall_time_ms) j["wall_time_ms"] = *wall_time_ms;
  return j;
}

std::string RunReport::dump() const {
  return to_json().dump(2, ' ', false, Json::error_handler_t::replace) + "\n";
}

Engine::Engine(ExecutablePlan plan, EngineOptions options)
    : plan_(std::move(plan)), options_(std::move(options)), sinks_(options_.sink_dir) {
  for (const auto& node : plan_.nodes) counters(node.name());
}

Counters& Engine::counters(const std::string& node) {
  for (auto& [name, c] : counters_) {
    if (name == node) return c;
  }
  counters_.emplace_back(node, Counters{});
  return counters_.back().second;
}

void Engine::trace(const std::string& op, std::string_view what, std::string_view kind) const {
  if (options_.trace) options_.trace(trace_line(op, what, kind));
}

void Engine::seed(const std::string& node, Item item) {
  if (!plan_.find(node)) throw std::invalid_argument("no operator named '" + node + "'");
  queues_[node].push_back(std::move(item));
}

void Engine::seed_entries() {
  for (const auto& [node, item] : plan_.entry_items) seed(node, item);
}

bool Engine::idle() const {
  return std::all_of(queues_.begin(), queues_.end(), [](const auto& q) { return q.second.empty(); });
}

std::size_t Engine::pending(const std::string& node) const {
  auto it = queues_.find(node);
  return it == queues_.end() ? 0 : it->second.size();
}

bool Engine::step() {
  auto started = std::chrono::steady_clock::now();
  for (const auto& node : plan_.nodes) {
    auto q = queues_.find(node.name());
    if (q == queues_.end() || q->second.empty()) continue;
    Item input = std::move(q->second.front());
    q->second.pop_front();

    Counters& c = counters(node.name());
    ++c.items_in;
    trace(node.name(), "in", payload_kind(input));

    operators::OperatorContext ctx{options_.fetcher, &sinks_, 0};
    auto outputs = operators::run_operator(node.config, input, ctx, node.name());
    c.warnings += ctx.warnings;
    if (outputs.empty()) {
      if (node.spec.kind == wetdl::OperatorKind::Filter) {
        ++c.filtered;
      } else {
        ++c.errors;
        trace(node.name(), "err", payload_kind(input));
      }
    }
    for (auto& out : outputs) {
      ++c.items_out;
      trace(node.name(), "out", payload_kind(out));
      if (node.successors.empty()) {
        outputs_.push_back(std::move(out));
      } else {
        for (const auto& s : node.successors) queues_[s].push_back(out);
      }
    }
    elapsed_ += std::chrono::steady_clock::now() - started;
    return true;
  }
  return false;
}

void Engine::run() {
  while (step()) {
  }
}

void Engine::reconfigure(ExecutablePlan plan) {
  plan_ = std::move(plan);
  for (auto& [name, queue] : queues_) {
    if (queue.empty() || plan_.find(name)) continue;
    counters(name).discarded += queue.size();
    queue.clear();
  }
  for (const auto& node : plan_.nodes) counters(node.name());
}

RunReport Engine::report() const {
  RunReport r;
  r.source = plan_.network.source_name;
  r.operators = counters_;
  r.outputs = outputs_;
  r.sinks = sinks_.lines();
  if (options_.timing) r.wall_time_ms = std::chrono::duration<double, std::milli>(elapsed_).count();
  return r;
}

RunReport execute(const ExecutablePlan& plan, const std::vector<Item>& initial, const EngineOptions& options) {
  Engine engine(plan, options);
  engine.seed_entries();
  std::set<std::string> targeted;
  for (const auto& node : plan.nodes) targeted.insert(node.successors.begin(), node.successors.end());
  for (const auto& node : plan.nodes) {
    if (targeted.count(node.name()) || !node.spec.inline_data.empty()) continue;
    if (initial.empty()) {
      engine.seed(node.name(), make_text("", "input"));
    } else {
      for (const auto& item : initial) engine.seed(node.name(), item);
    }
  }
  engine.run();
  return engine.report();
}

}  // namespace wexfab::dataflow
