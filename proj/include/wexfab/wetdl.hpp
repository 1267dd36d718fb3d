#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wexfab::wetdl {

enum class OperatorKind { Dummy, Query, Fetch, Parse, Filter, Extract, Transform, Db };

std::string_view kind_name(OperatorKind kind);
std::optional<OperatorKind> kind_from_name(std::string_view name);

struct Param {
  std::string key;
  std::string value;
  bool operator==(const Param&) const = default;
};

/// Key under which a `map` element's ordered `key` children are stored,
/// newline-joined.
inline constexpr std::string_view kMapParam = "map";

struct OperatorSpec {
  OperatorKind kind = OperatorKind::Dummy;
  std::string name;
  std::vector<std::string> forward_to;
  std::vector<Param> params;
  std::vector<std::string> inline_data;
  std::optional<std::string> query_template;

  /// Last value bound to `key`, if any.
  const std::string* param(std::string_view key) const;
  /// Overwrites every binding of `key`, or appends one.
  void set_param(std::string key, std::string value);

  bool operator==(const OperatorSpec&) const = default;
};

struct TaskNetwork {
  std::string source_name;
  std::vector<OperatorSpec> operators;

  const OperatorSpec* find(std::string_view name) const;
  /// Operators with no incoming forward-to edge, in declaration order.
  std::vector<std::string> entry_points() const;

  bool operator==(const TaskNetwork&) const = default;
};

enum class Severity { Error, Warning };

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string code;
  std::string message;
  std::string locus;

  std::string str() const;
};

bool has_errors(const std::vector<Diagnostic>& diagnostics);

struct ParsedTask {
  TaskNetwork network;
  std::vector<Diagnostic> diagnostics;
};

/// Parses WetDL text. Malformed XML throws dom::ParseError; structural
/// problems (unknown operator element, missing name) become diagnostics.
ParsedTask parse_task(std::string_view xml_text);

/// Checks name uniqueness, edge resolution and acyclicity.
std::vector<Diagnostic> validate_network(const TaskNetwork& net);

class InvalidNetwork : public std::runtime_error {
 public:
  explicit InvalidNetwork(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Canonical XML. Throws InvalidNetwork if validation reports errors.
std::string serialize_task(const TaskNetwork& net);

}  // namespace wexfab::wetdl
