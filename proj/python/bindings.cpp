#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "wexfab/adapt.hpp"
#include "wexfab/dataflow.hpp"
#include "wexfab/evalkit.hpp"
#include "wexfab/ierel.hpp"
#include "wexfab/wetdl.hpp"

namespace py = pybind11;
using namespace wexfab;

namespace {

std::vector<std::string> diagnostics(const std::vector<wetdl::Diagnostic>& ds) {
  std::vector<std::string> out;
  for (const auto& d : ds) out.push_back(d.str());
  return out;
}

std::vector<ierel::ExampleInstance> examples_from(const std::vector<py::dict>& rows) {
  std::vector<ierel::ExampleInstance> out;
  for (const auto& row : rows) {
    ierel::ExampleInstance ex;
    for (const auto& [k, v] : row) ex.fields.emplace_back(py::str(k), py::str(v));
    out.push_back(ex);
  }
  return out;
}

py::list rows_of(const std::vector<Record>& records) {
  py::list out;
  for (const auto& r : records) {
    py::dict d;
    for (const auto& [k, v] : r.fields()) d[py::str(k)] = v;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "wexfab extraction fabric";

  m.def("validate", [](const std::string& text) {
    auto parsed = wetdl::parse_task(text);
    auto ds = parsed.diagnostics;
    auto more = wetdl::validate_network(parsed.network);
    ds.insert(ds.end(), more.begin(), more.end());
    return diagnostics(ds);
  }, py::arg("wetdl"));

  m.def("canonical", [](const std::string& text) { return wetdl::serialize_task(wetdl::parse_task(text).network); },
        py::arg("wetdl"));

  m.def("run", [](const std::string& text, const std::string& fixtures, const std::string& registry_json) {
    auto net = wetdl::parse_task(text).network;
    auto registry = registry_json.empty() ? dataflow::ServiceRegistry::with_builtin_services()
                                          : dataflow::ServiceRegistry::from_json(Json::parse(registry_json));
    auto plan = dataflow::compile(net, registry);
    std::optional<FixtureStore> store;
    dataflow::EngineOptions opts;
    if (!fixtures.empty()) {
      store = FixtureStore::load(fixtures);
      opts.fetcher = &*store;
    }
    return dataflow::execute(plan, {}, opts).dump();
  }, py::arg("wetdl"), py::arg("fixtures") = "", py::arg("registry") = "");

  m.def("learn", [](const std::vector<std::string>& corpus, const std::vector<py::dict>& rows) {
    return ierel::learn_wrapper(corpus, examples_from(rows)).wrapper.to_json_text();
  }, py::arg("corpus"), py::arg("examples"));

  m.def("extract", [](const std::string& wrapper, const std::vector<std::string>& documents) {
    return rows_of(ierel::apply_wrapper(ierel::Wrapper::from_json_text(wrapper), documents));
  }, py::arg("wrapper"), py::arg("documents"));

  m.def("synthetic_source", [](std::size_t rows, std::uint64_t seed) {
    auto source = evalkit::generate_source(evalkit::conference_spec(rows, seed));
    return py::make_tuple(source.documents, rows_of(source.records()));
  }, py::arg("rows") = 50, py::arg("seed") = 1);

  m.def("format_ratio", &evalkit::format_ratio, py::arg("num"), py::arg("den"));

  m.def("policy_plan", [](const std::string& policy_xml, const std::string& props, const std::string& registry_json) {
    auto policy = std::get<adapt::Policy>(adapt::parse_policy(policy_xml));
    auto registry = dataflow::ServiceRegistry::from_json(Json::parse(registry_json));
    auto result = adapt::plan_actions(policy, adapt::evaluate(policy, adapt::PropertyStore::parse(props)), registry);
    std::vector<std::string> actions;
    for (const auto& a : result.plan.actions) actions.push_back(a.str());
    return py::make_tuple(result.accepted(), actions);
  }, py::arg("policy"), py::arg("props"), py::arg("registry"));

  py::register_exception<wetdl::InvalidNetwork>(m, "InvalidNetwork", PyExc_ValueError);
  py::register_exception<dataflow::CompileError>(m, "CompileError", PyExc_ValueError);
  py::register_exception<ierel::LearnError>(m, "LearnError", PyExc_ValueError);
  py::register_exception<adapt::PolicyError>(m, "PolicyError", PyExc_ValueError);
  py::register_exception<FixtureError>(m, "FixtureError", PyExc_OSError);
}
