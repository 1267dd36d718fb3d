#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wexfab/dataflow.hpp"
#include "wexfab/fetcher.hpp"
#include "wexfab/wetdl.hpp"

namespace wexfab::adapt {

using dataflow::Action;
using dataflow::ReconfigurationPlan;
using dataflow::ServiceRegistry;
using wetdl::Diagnostic;

using PropertyValue = std::variant<double, std::string>;

std::string to_string(const PropertyValue& value);

class PropertyStore {
 public:
  void set(std::string path, PropertyValue value) { values_[std::move(path)] = std::move(value); }
  /// Stores a number when the whole text parses as one, a string otherwise.
  void set_text(std::string path, std::string_view text);
  const PropertyValue* get(std::string_view path) const;
  const std::map<std::string, PropertyValue, std::less<>>& values() const { return values_; }

  /// `path = value` lines; blank lines and lines starting with '#' skipped.
  static PropertyStore parse(std::string_view text);
  static PropertyStore load(const std::filesystem::path& path);

 private:
  std::map<std::string, PropertyValue, std::less<>> values_;
};

struct Condition {
  enum class Op { LessThan, GreaterThan, Equals };
  Op op = Op::LessThan;
  std::string property;
  PropertyValue literal;
  bool operator==(const Condition&) const = default;
};

struct Rule {
  Condition when;
  std::vector<Action> ensure;
  bool operator==(const Rule&) const = default;
};

struct Policy {
  std::string name;
  std::vector<Rule> rules;
  bool operator==(const Policy&) const = default;
};

/// The attributes of a PersonalizedExtraction directive, trimmed.
struct ExtractionDirective {
  std::string service_name;  // Sname
  std::string summary;       // Sum
  std::string location;      // Loc
  std::string url;           // URL
  std::string language;      // Slang
  std::string wetdl_url;     // Swdl

  /// Swdl when present, URL otherwise.
  std::string effective_url() const { return wetdl_url.empty() ? url : wetdl_url; }
  bool operator==(const ExtractionDirective&) const = default;
};

using ParsedPolicy = std::variant<Policy, ExtractionDirective>;

class PolicyError : public std::runtime_error {
 public:
  PolicyError(std::string code, const std::string& message, std::vector<Diagnostic> diagnostics = {})
      : std::runtime_error(code + ": " + message), code_(std::move(code)), diagnostics_(std::move(diagnostics)) {}
  const std::string& code() const { return code_; }
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::string code_;
  std::vector<Diagnostic> diagnostics_;
};

/// Parses a system-policy or PersonalizedExtraction-policy document.
/// Unquoted and comma-separated attributes are tolerated.
/// Errors (PolicyError codes): XML_ERROR, UNKNOWN_ROOT, UNKNOWN_ELEMENT,
/// MISSING_ATTRIBUTE, NO_RULES, BAD_CONDITION, EMPTY_ENSURE, BAD_NUMBER.
ParsedPolicy parse_policy(std::string_view xml_text);

struct RuleOutcome {
  enum class Status { Triggered, NotTriggered, Unevaluable };
  std::size_t rule = 0;
  Status status = Status::NotTriggered;
  std::string reason;  // for unevaluable rules
};

std::string_view status_name(RuleOutcome::Status status);

struct Evaluation {
  std::vector<RuleOutcome> outcomes;

  std::vector<std::size_t> triggered() const;
  std::vector<std::size_t> unevaluable() const;
};

Evaluation evaluate(const Policy& policy, const PropertyStore& props);

struct PlanResult {
  ReconfigurationPlan plan;
  std::vector<Diagnostic> rejected;  // one per failing action

  bool accepted() const { return rejected.empty(); }
};

/// Actions of the triggered rules in rule order, duplicates removed,
/// validated against the registry. A rejected plan keeps its actions for
/// reporting.
PlanResult plan_actions(const Policy& policy, const Evaluation& evaluation, const ServiceRegistry& registry);

struct DirectiveAnalysis {
  ReconfigurationPlan plan;
  wetdl::TaskNetwork network;
  std::vector<std::string> required;  // non-dummy operator kinds in WetDL order
};

/// Fetches and validates the directive's WetDL file, then plans Detach for
/// every attached service the file does not require (registry order) and
/// Attach for every required service not attached (WetDL order), with the
/// params of the first operator of that kind.
/// Errors: UNSUPPORTED_LANGUAGE, FETCH_FAILED, WETDL_INVALID.
DirectiveAnalysis analyze_extraction_directive(const ExtractionDirective& directive, const Fetcher& fetcher,
                                               const ServiceRegistry& registry);

/// `<services-policy>` document with detached / attached / updated children.
std::string serialize_plan(const ReconfigurationPlan& plan);
ReconfigurationPlan parse_plan(std::string_view xml_text);

}  // namespace wexfab::adapt
