// Acceptance gate: one line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "oracles.hpp"
#include "properties.hpp"
#include "wexfab/adapt.hpp"
#include "wexfab/dataflow.hpp"
#include "wexfab/evalkit.hpp"
#include "wexfab/ierel.hpp"
#include "wexfab/wetdl.hpp"

using namespace wexfab;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

int failures = 0;

void criterion(const std::string& name, double limit_ms, const std::function<Outcome()>& body) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o.ok = false;
    o.detail = std::string("exception: ") + e.what();
  }
  double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  if (o.ok && ms > limit_ms) {
    o.ok = false;
    o.detail = "over the " + std::to_string(static_cast<long>(limit_ms)) + " ms limit";
  }
  if (!o.ok) ++failures;
  std::cout << (o.ok ? "[PASS] " : "[FAIL] ") << name << " (" << std::fixed << std::setprecision(1) << ms << " ms)";
  if (!o.detail.empty()) std::cout << ": " << o.detail;
  std::cout << std::endl;
}

std::string data(const std::string& rel) { return oracle::read(oracle::data_dir() / rel); }

dataflow::ServiceRegistry registry(const std::string& rel) {
  return dataflow::ServiceRegistry::from_json(nlohmann::ordered_json::parse(data(rel)));
}

std::vector<std::string> strs(const dataflow::ReconfigurationPlan& p) {
  std::vector<std::string> out;
  for (const auto& a : p.actions) out.push_back(a.str());
  return out;
}

std::vector<std::string> targets(const dataflow::ReconfigurationPlan& p) {
  std::vector<std::string> out;
  for (const auto& a : p.actions) out.push_back(std::string(dataflow::action_kind_name(a.kind)) + "(" + a.service + ")");
  return out;
}

// --------------------------------------------------------------------

Outcome table_arithmetic() {
  Outcome o;
  std::istringstream in(oracle::read(oracle::tests_dir() / "data/eval_table.tsv"));
  std::string line;
  std::getline(in, line);
  std::size_t rows = 0;
  std::vector<evalkit::EvaluationRow> report;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string source, ex, inst, retr, rec, acc;
    std::getline(ss, source, '\t');
    std::getline(ss, ex, '\t');
    std::getline(ss, inst, '\t');
    std::getline(ss, retr, '\t');
    std::getline(ss, rec, '\t');
    std::getline(ss, acc, '\t');
    std::vector<Record> truth;
    for (std::size_t i = 0; i < std::stoul(inst); ++i) truth.push_back(Record{{"id", std::to_string(i)}});
    std::vector<Record> got(truth.begin(), truth.begin() + static_cast<long>(std::stoul(retr)));
    auto row = evalkit::score(got, truth, truth.size());
    row.source = source;
    row.examples = std::stoul(ex);
    o.require(std::abs(row.recall() - std::stod(rec)) <= 0.01 + 1e-9,
              source + " recall " + evalkit::format_ratio(row.correct, row.instances) + " vs printed " + rec);
    o.require(row.retrieved == row.correct && row.accuracy() && std::abs(*row.accuracy() - 1.0) < 1e-12,
              source + " accuracy");
    report.push_back(row);
    ++rows;
  }
  o.require(rows == 16, "expected 16 rows, read " + std::to_string(rows));
  return o;
}

Outcome synthetic_pattern() {
  Outcome o;
  auto spec = evalkit::conference_spec(50, 2004);
  auto source = evalkit::generate_source(spec);
  auto run = [&](const std::vector<std::string>& formats) {
    std::vector<ierel::ExampleInstance> examples;
    for (const auto& f : formats) {
      auto some = evalkit::examples_for(spec, source, f, 3);
      examples.insert(examples.end(), some.begin(), some.end());
    }
    auto learned = ierel::learn_wrapper(source.documents, examples);
    auto row = evalkit::score(ierel::apply_wrapper(learned.wrapper, source.documents), source.records(),
                              source.truth.size());
    row.examples = examples.size();
    return row;
  };
  auto all = run({"list", "table", "block"});
  o.require(all.instances == 150, "instances");
  o.require(all.correct == all.instances, "all formats: recall " + evalkit::format_ratio(all.correct, all.instances));
  o.require(all.retrieved == all.correct, "all formats: accuracy " + evalkit::format_ratio(all.correct, all.retrieved));
  auto two = run({"list", "table"});
  o.require(two.correct > 0 && two.correct < two.instances,
            "two formats: recall " + evalkit::format_ratio(two.correct, two.instances) + " not in (0, 1)");
  o.require(two.retrieved == two.correct, "two formats: accuracy " + evalkit::format_ratio(two.correct, two.retrieved));
  if (o.ok) {
    o.detail = "3 formats rec " + evalkit::format_ratio(all.correct, all.instances) + " acc " +
               evalkit::format_ratio(all.correct, all.retrieved) + "; 2 formats rec " +
               evalkit::format_ratio(two.correct, two.instances) + " acc " +
               evalkit::format_ratio(two.correct, two.retrieved);
  }
  return o;
}

Outcome training_recall() {
  Outcome o;
  auto r = props::training_recall(100, 1);
  o.require(r.corpora == 100, "corpora");
  o.require(r.located > 0, "no example located");
  o.require(r.retrieved == r.located, std::to_string(r.located - r.retrieved) + " of " + std::to_string(r.located) +
                                          " located examples not retrieved; first " + r.first_failure);
  if (o.ok) o.detail = std::to_string(r.retrieved) + "/" + std::to_string(r.located) + " located examples retrieved";
  return o;
}

Outcome soundness() {
  Outcome o;
  auto r = props::soundness(1000, 42, 14);
  o.require(r.merged >= 1000, "fewer than 1000 merged pairs");
  o.require(r.enumerator_errors == 0, "enumerator disagrees with the reachability oracle");
  o.require(r.skeleton_changes == 0, std::to_string(r.skeleton_changes) + " tag skeleton changes");
  o.require(r.violations == 0, std::to_string(r.violations) + " strings lost; first " + r.first_failure);
  if (o.ok) {
    o.detail = std::to_string(r.merged) + " pairs, " + std::to_string(r.strings) + " strings";
  }
  return o;
}

Outcome google_replay() {
  Outcome o;
  auto truth = oracle::google_truth();
  auto store = FixtureStore::load(oracle::data_dir() / "fixtures/google");
  auto net = wetdl::parse_task(data("tasks/google-task.wdl")).network;
  auto plan = dataflow::compile(net, dataflow::ServiceRegistry::with_builtin_services());
  dataflow::EngineOptions opts;
  opts.fetcher = &store;
  auto first = dataflow::execute(plan, {}, opts);
  auto second = dataflow::execute(plan, {}, opts);
  auto records = first.records();
  o.require(records.size() == truth.fixtured.size(),
            std::to_string(records.size()) + " records for " + std::to_string(truth.fixtured.size()) + " fixtured URLs");
  for (std::size_t i = 0; i < records.size() && i < truth.fixtured.size(); ++i) {
    for (const auto& f : {"url", "last-modified", "content-length", "content-type"}) {
      auto* v = records[i].get(f);
      o.require(v && *v == truth.fixtured[i].at(f), "record " + std::to_string(i) + " field " + f);
    }
  }
  o.require(first.dump() == second.dump(), "reports differ between runs");
  if (o.ok) o.detail = "N=" + std::to_string(records.size());
  return o;
}

Outcome policy_semantics() {
  Outcome o;
  auto policy = std::get<adapt::Policy>(adapt::parse_policy(data("policies/bandwidth-policy.xml")));
  auto reg = registry("registries/av-session.json");
  std::vector<std::string> expected = {"Detach(VideoService)", "Update(AudioService, SoundEncoder=classLpc)"};
  for (const char* bw : {"30000", "40000", "50000"}) {
    auto props = adapt::PropertyStore::load(oracle::data_dir() / (std::string("policies/bandwidth-") + bw + ".props"));
    auto result = adapt::plan_actions(policy, adapt::evaluate(policy, props), reg);
    auto want = std::string(bw) == "30000" ? expected : std::vector<std::string>{};
    o.require(result.accepted() && strs(result.plan) == want, std::string("plan at ") + bw);
  }
  auto props = adapt::PropertyStore::load(oracle::data_dir() / "policies/bandwidth-30000.props");
  auto first = adapt::plan_actions(policy, adapt::evaluate(policy, props), reg);
  dataflow::ExecutablePlan empty;
  dataflow::apply_reconfiguration(empty, reg, first.plan);
  auto state = reg.dump();
  bool rejected = false;
  try {
    dataflow::apply_reconfiguration(empty, reg, first.plan);
  } catch (const dataflow::ReconfigurationError&) {
    rejected = true;
  }
  o.require(rejected, "second application accepted");
  o.require(reg.dump() == state, "state changed by the rejected application");
  return o;
}

Outcome directive_scenario() {
  Outcome o;
  auto store = FixtureStore::load(oracle::data_dir() / "fixtures/dblp");
  auto directive = std::get<adapt::ExtractionDirective>(adapt::parse_policy(data("policies/personalized-extraction.xml")));
  auto reg = registry("registries/dblp-session.json");
  auto analysis = adapt::analyze_extraction_directive(directive, store, reg);
  std::vector<std::string> want = {"Detach(tchat)", "Detach(mail)", "Attach(fetch)", "Attach(extract)", "Attach(db)"};
  o.require(targets(analysis.plan) == want, "plan");
  dataflow::ExecutablePlan empty;
  dataflow::apply_reconfiguration(empty, reg, analysis.plan);
  o.require(reg.names() == std::vector<std::string>{"parse", "fetch", "extract", "db"}, "registry");
  auto task_plan = dataflow::compile(analysis.network, reg);
  dataflow::EngineOptions opts;
  opts.fetcher = &store;
  auto report = dataflow::execute(task_plan, {}, opts);
  std::string text;
  if (auto it = report.sinks.find(""); it != report.sinks.end()) {
    for (const auto& line : it->second) text += line + "\n";
  }
  o.require(text == oracle::read(oracle::tests_dir() / "golden/dblp_inserts.sql"), "INSERT lines differ from golden");
  return o;
}

Outcome round_trips() {
  Outcome o;
  for (const char* rel : {"tasks/google-task.wdl", "tasks/passthrough.wdl", "fixtures/dblp/bodies/wsper.wdl"}) {
    auto first = wetdl::parse_task(data(rel));
    auto text = wetdl::serialize_task(first.network);
    auto second = wetdl::parse_task(text);
    o.require(first.diagnostics.empty() && second.network == first.network &&
                  wetdl::serialize_task(second.network) == text,
              std::string("WetDL ") + rel);
  }

  auto spec = evalkit::conference_spec(10, 77);
  auto source = evalkit::generate_source(spec);
  std::vector<ierel::ExampleInstance> examples;
  for (const auto& f : spec.formats) {
    auto some = evalkit::examples_for(spec, source, f.label, 2);
    examples.insert(examples.end(), some.begin(), some.end());
  }
  auto w = ierel::learn_wrapper(source.documents, examples).wrapper;
  auto wtext = w.to_json_text();
  auto back = ierel::Wrapper::from_json_text(wtext);
  o.require(back == w && back.to_json_text() == wtext, "wrapper JSON");

  auto policy = std::get<adapt::Policy>(adapt::parse_policy(data("policies/bandwidth-policy.xml")));
  o.require(policy.name == "bandwidth-policy" && policy.rules.size() == 1 &&
                policy.rules[0].when.property == "/system/network.bandwidth" &&
                policy.rules[0].when.literal == adapt::PropertyValue(40000.0) && policy.rules[0].ensure.size() == 2,
            "policy XML");
  return o;
}

}  // namespace

int main() {
  criterion("Reference evaluation table arithmetic", 1000, table_arithmetic);
  criterion("Synthetic 3x50 recall/accuracy pattern", 5000, synthetic_pattern);
  criterion("Training recall over 100 random corpora", 30000, training_recall);
  criterion("Generalization soundness (>=1000 pairs)", 60000, soundness);
  criterion("Google pipeline replay", 2000, google_replay);
  criterion("Bandwidth policy semantics", 1000, policy_semantics);
  criterion("Personalized extraction end to end", 3000, directive_scenario);
  criterion("Round trips", 1000, round_trips);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
