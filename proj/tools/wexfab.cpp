// wexfab command-line front end.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "wexfab/adapt.hpp"
#include "wexfab/dataflow.hpp"
#include "wexfab/evalkit.hpp"
#include "wexfab/ierel.hpp"
#include "wexfab/wetdl.hpp"

namespace fs = std::filesystem;
using namespace wexfab;

namespace {

struct Failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Failure("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Failure("cannot write " + path.string());
}

std::vector<std::string> read_documents(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Failure(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<std::string> docs;
  for (const auto& f : files) docs.push_back(read_file(f));
  return docs;
}

std::vector<Json> read_jsonl(const fs::path& path) {
  std::vector<Json> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::exception& e) {
      throw Failure(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
    if (!out.back().is_object()) throw Failure(path.string() + ":" + std::to_string(n) + ": expected a JSON object");
  }
  return out;
}

wetdl::TaskNetwork load_task(const fs::path& path) {
  wetdl::ParsedTask parsed;
  try {
    parsed = wetdl::parse_task(read_file(path));
  } catch (const dom::ParseError& e) {
    throw Failure(path.string() + ": " + e.what());
  }
  auto diags = parsed.diagnostics;
  auto more = wetdl::validate_network(parsed.network);
  diags.insert(diags.end(), more.begin(), more.end());
  for (const auto& d : diags) std::cerr << d.str() << "\n";
  if (wetdl::has_errors(diags)) throw Failure(path.string() + " is not a valid task");
  return parsed.network;
}

dataflow::ServiceRegistry load_registry(const std::string& path) {
  if (path.empty()) return dataflow::ServiceRegistry::with_builtin_services();
  try {
    return dataflow::ServiceRegistry::from_json(Json::parse(read_file(path)));
  } catch (const Json::exception& e) {
    throw Failure(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw Failure(path + ": " + e.what());
  }
}

std::unique_ptr<Fetcher> make_fetcher(std::string offline) {
  if (offline.empty()) {
    if (const char* env = std::getenv("WEXFAB_FIXTURES")) offline = env;
  }
  if (offline.empty()) return std::make_unique<LiveFetcher>();
  if (!fs::is_directory(offline)) throw Failure("fixture directory " + offline + " does not exist");
  try {
    return std::make_unique<FixtureStore>(FixtureStore::load(offline));
  } catch (const FixtureError& e) {
    throw Failure(e.what());
  }
}

void print_diagnostics(const std::vector<wetdl::Diagnostic>& diags) {
  for (const auto& d : diags) std::cout << d.str() << "\n";
}

// --------------------------------------------------------------------

struct ValidateArgs {
  std::string task;
};

int cmd_validate(const ValidateArgs& a) {
  wetdl::ParsedTask parsed;
  try {
    parsed = wetdl::parse_task(read_file(a.task));
  } catch (const dom::ParseError& e) {
    std::cout << "error XML: " << e.what() << "\n";
    return 1;
  }
  auto diags = parsed.diagnostics;
  auto more = wetdl::validate_network(parsed.network);
  diags.insert(diags.end(), more.begin(), more.end());
  print_diagnostics(diags);
  if (wetdl::has_errors(diags)) return 1;
  std::cout << "ok " << parsed.network.source_name << ": " << parsed.network.operators.size() << " operators\n";
  return 0;
}

struct RunArgs {
  std::string task, offline, report, registry, sink_out;
  std::vector<std::string> inputs;
  bool trace = false, timing = false;
};

int cmd_run(const RunArgs& a) {
  auto net = load_task(a.task);
  auto registry = load_registry(a.registry);
  auto fetcher = make_fetcher(a.offline);
  operators::CompileOptions copts{fs::path(a.task).parent_path()};
  dataflow::ExecutablePlan plan;
  try {
    plan = dataflow::compile(net, registry, copts);
  } catch (const dataflow::CompileError& e) {
    print_diagnostics(e.diagnostics());
    return 1;
  }
  dataflow::EngineOptions eopts;
  eopts.fetcher = fetcher.get();
  eopts.timing = a.timing;
  if (a.trace) eopts.trace = [](const std::string& line) { std::cerr << line << "\n"; };
  std::vector<Item> inputs;
  for (const auto& t : a.inputs) inputs.push_back(is_absolute_url(t) ? make_url(t, "input") : make_text(t, "input"));
  auto report = dataflow::execute(plan, inputs, eopts);
  if (a.report.empty()) {
    std::cout << report.dump();
  } else {
    write_file(a.report, report.dump());
  }
  if (!a.sink_out.empty()) {
    std::string text;
    if (auto it = report.sinks.find(""); it != report.sinks.end()) {
      for (const auto& line : it->second) text += line + "\n";
    }
    write_file(a.sink_out, text);
  }
  return 0;
}

struct LearnArgs {
  std::string corpus, examples, out;
  ierel::LearnerConfig config;
};

int cmd_learn(const LearnArgs& a) {
  auto corpus = read_documents(a.corpus);
  std::vector<ierel::ExampleInstance> examples;
  for (const auto& j : read_jsonl(a.examples)) examples.push_back(ierel::ExampleInstance::from_json(j));
  try {
    auto result = ierel::learn_wrapper(corpus, examples, a.config);
    for (const auto& e : result.report.examples) {
      std::cerr << "example " << e.example + 1 << ": " << e.status << " (" << e.occurrences << " occurrences)\n";
    }
    write_file(a.out, result.wrapper.to_json_text());
    std::cout << result.wrapper.patterns.size() << " patterns from " << result.report.usable << " usable examples\n";
  } catch (const ierel::LearnError& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

ierel::Wrapper load_wrapper(const std::string& path) {
  try {
    return ierel::Wrapper::from_json_text(read_file(path));
  } catch (const std::exception& e) {
    throw Failure(path + ": " + e.what());
  }
}

struct ExtractArgs {
  std::string wrapper, docs, out;
};

int cmd_extract(const ExtractArgs& a) {
  auto wrapper = load_wrapper(a.wrapper);
  auto docs = read_documents(a.docs);
  std::vector<Record> records;
  try {
    records = ierel::apply_wrapper(wrapper, docs);
  } catch (const ierel::VersionMismatch& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }
  std::string text;
  for (const auto& r : records) text += r.to_json().dump() + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_file(a.out, text);
  }
  return 0;
}

struct EvalArgs {
  std::string wrapper, docs, truth, source = "source";
  std::size_t examples = 0;
  bool json = false;
};

int cmd_eval(const EvalArgs& a) {
  auto wrapper = load_wrapper(a.wrapper);
  auto docs = read_documents(a.docs);
  std::vector<Record> truth;
  for (const auto& j : read_jsonl(a.truth)) truth.push_back(Record::from_json(j));
  if (truth.empty()) throw Failure(a.truth + " holds no records");
  std::vector<Record> extracted;
  try {
    extracted = ierel::apply_wrapper(wrapper, docs);
  } catch (const ierel::VersionMismatch& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }
  auto row = evalkit::score(extracted, truth, truth.size());
  row.source = a.source;
  row.examples = a.examples;
  std::cout << (a.json ? row.to_json().dump() + "\n" : evalkit::format_report({row}));
  return 0;
}

struct PolicyArgs {
  std::string policy, props, registry, task, offline, emit_task;
  bool dry_run = false;
};

void print_evaluation(const adapt::Evaluation& ev) {
  for (const auto& o : ev.outcomes) {
    std::cout << "rule " << o.rule + 1 << " " << adapt::status_name(o.status);
    if (!o.reason.empty()) std::cout << ": " << o.reason;
    std::cout << "\n";
  }
}

adapt::ParsedPolicy load_policy(const std::string& path) {
  try {
    return adapt::parse_policy(read_file(path));
  } catch (const adapt::PolicyError& e) {
    throw Failure(path + ": " + e.what());
  }
}

int cmd_policy_eval(const PolicyArgs& a) {
  auto parsed = load_policy(a.policy);
  auto* policy = std::get_if<adapt::Policy>(&parsed);
  if (!policy) {
    std::cout << "error: " << a.policy << " is an extraction directive; use 'policy apply'\n";
    return 1;
  }
  auto props = adapt::PropertyStore::load(a.props);
  auto ev = adapt::evaluate(*policy, props);
  print_evaluation(ev);
  auto registry = a.registry.empty() ? dataflow::ServiceRegistry{} : load_registry(a.registry);
  auto result = adapt::plan_actions(*policy, ev, registry);
  for (const auto& act : result.plan.actions) std::cout << act.str() << "\n";
  if (!a.registry.empty() && !result.accepted()) {
    print_diagnostics(result.rejected);
    return 1;
  }
  return ev.unevaluable().empty() ? 0 : 1;
}

int cmd_policy_apply(const PolicyArgs& a) {
  auto parsed = load_policy(a.policy);
  auto registry = load_registry(a.registry);
  dataflow::ReconfigurationPlan rplan;
  std::optional<wetdl::TaskNetwork> analyzed;

  if (auto* policy = std::get_if<adapt::Policy>(&parsed)) {
    if (a.props.empty()) throw Failure("a system policy needs --props");
    auto ev = adapt::evaluate(*policy, adapt::PropertyStore::load(a.props));
    print_evaluation(ev);
    auto result = adapt::plan_actions(*policy, ev, registry);
    if (!result.accepted()) {
      std::cout << adapt::serialize_plan(result.plan);
      print_diagnostics(result.rejected);
      return 1;
    }
    rplan = std::move(result.plan);
  } else {
    auto fetcher = make_fetcher(a.offline);
    try {
      auto analysis = adapt::analyze_extraction_directive(std::get<adapt::ExtractionDirective>(parsed), *fetcher, registry);
      rplan = std::move(analysis.plan);
      analyzed = std::move(analysis.network);
    } catch (const adapt::PolicyError& e) {
      std::cout << "error " << e.what() << "\n";
      print_diagnostics(e.diagnostics());
      return 1;
    }
  }

  std::cout << adapt::serialize_plan(rplan);
  if (a.dry_run) return 0;

  wetdl::TaskNetwork current;
  if (!a.task.empty()) current = load_task(a.task);
  try {
    auto plan = dataflow::compile(current, registry, {fs::path(a.task).parent_path()});
    auto next = dataflow::apply_reconfiguration(plan, registry, rplan);
    (void)next;
  } catch (const dataflow::CompileError& e) {
    print_diagnostics(e.diagnostics());
    return 1;
  } catch (const dataflow::ReconfigurationError& e) {
    print_diagnostics(e.diagnostics());
    return 1;
  }
  write_file(a.registry, registry.dump());
  if (analyzed && !a.emit_task.empty()) write_file(a.emit_task, wetdl::serialize_task(*analyzed));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Web information extraction fabric"};
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate = app.add_subcommand("validate", "Check a WetDL task file");
  validate->add_option("task", va.task, "Task file")->required();

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run a WetDL task");
  run->add_option("task", ra.task, "Task file")->required();
  run->add_option("--offline", ra.offline, "Fixture directory for offline replay");
  run->add_option("--report", ra.report, "Write the JSON run report here");
  run->add_option("--input", ra.inputs, "Input item for entry operators (repeatable)");
  run->add_option("--registry", ra.registry, "Service registry snapshot");
  run->add_option("--sink-out", ra.sink_out, "Write in-memory sink lines here");
  run->add_flag("--trace", ra.trace, "Trace deliveries on stderr");
  run->add_flag("--timing", ra.timing, "Include wall time in the report");

  LearnArgs la;
  auto* learn = app.add_subcommand("learn", "Learn a wrapper from example instances");
  learn->add_option("--corpus", la.corpus, "Directory of documents")->required();
  learn->add_option("--examples", la.examples, "JSON Lines file of example instances")->required();
  learn->add_option("--out", la.out, "Wrapper output file")->required();
  learn->add_option("--left", la.config.left, "Left context length");
  learn->add_option("--right", la.config.right, "Right context length");
  learn->add_option("--window", la.config.window, "Occurrence window");
  learn->add_option("--slot-bound", la.config.slot_bound, "Maximum slot length");
  learn->add_option("--gap-bound", la.config.gap_bound, "Maximum gap length");

  ExtractArgs xa;
  auto* extract = app.add_subcommand("extract", "Apply a wrapper to documents");
  extract->add_option("--wrapper", xa.wrapper, "Wrapper file")->required();
  extract->add_option("--docs", xa.docs, "Directory of documents")->required();
  extract->add_option("--out", xa.out, "Records output (JSON Lines)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score a wrapper against ground truth");
  eval->add_option("--wrapper", ea.wrapper, "Wrapper file")->required();
  eval->add_option("--docs", ea.docs, "Directory of documents")->required();
  eval->add_option("--truth", ea.truth, "JSON Lines file of true records")->required();
  eval->add_option("--source", ea.source, "Source label");
  eval->add_option("--examples", ea.examples, "Number of examples used");
  eval->add_flag("--json", ea.json, "Print the row as JSON");

  PolicyArgs pa;
  auto* policy = app.add_subcommand("policy", "Evaluate or apply adaptation policies");
  policy->require_subcommand(1);
  auto* peval = policy->add_subcommand("eval", "Evaluate a system policy");
  peval->add_option("--policy", pa.policy, "Policy file")->required();
  peval->add_option("--props", pa.props, "Property file")->required();
  peval->add_option("--registry", pa.registry, "Validate the plan against this registry");
  auto* papply = policy->add_subcommand("apply", "Plan and apply a policy to a registry");
  papply->add_option("--policy", pa.policy, "Policy file")->required();
  papply->add_option("--registry", pa.registry, "Registry snapshot, updated in place")->required();
  papply->add_option("--task", pa.task, "Running task");
  papply->add_option("--props", pa.props, "Property file");
  papply->add_option("--offline", pa.offline, "Fixture directory");
  papply->add_option("--emit-task", pa.emit_task, "Write the directive's task network here");
  papply->add_flag("--dry-run", pa.dry_run, "Print the plan without applying it");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*validate) return cmd_validate(va);
    if (*run) return cmd_run(ra);
    if (*learn) return cmd_learn(la);
    if (*extract) return cmd_extract(xa);
    if (*eval) return cmd_eval(ea);
    if (*peval) return cmd_policy_eval(pa);
    if (*papply) return cmd_policy_apply(pa);
  } catch (const Failure& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  } catch (const adapt::PolicyError& e) {
    std::cout << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
