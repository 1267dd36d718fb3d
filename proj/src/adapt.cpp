#include "wexfab/adapt.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "wexfab/dom.hpp"

namespace wexfab::adapt {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string collapse(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : trim(s)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space) out += ' ';
    space = false;
    out += c;
  }
  return out;
}

std::string strip_spaces(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (!std::isspace(static_cast<unsigned char>(c))) out += c;
  }
  return out;
}

std::optional<double> to_number(std::string_view s) {
  auto t = trim(s);
  if (t.empty()) return std::nullopt;
  double v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

const std::string& required_attr(const dom::Node& el, std::string_view name) {
  if (auto* a = el.find_attribute(name)) return a->value;
  throw PolicyError("MISSING_ATTRIBUTE", "<" + el.name() + "> requires attribute '" + std::string(name) + "'");
}

dom::Document parse_lenient(std::string_view xml_text) {
  try {
    return dom::parse_xml(xml_text, dom::XmlOptions{true});
  } catch (const dom::ParseError& e) {
    throw PolicyError("XML_ERROR", e.what());
  }
}

/// `service="x"` or the bare `service name="x"` form.
std::string service_of(const dom::Node& el) {
  auto* s = el.find_attribute("service");
  if (s && !trim(s->value).empty()) return trim(s->value);
  if (auto* n = el.find_attribute("name")) return trim(n->value);
  throw PolicyError("MISSING_ATTRIBUTE", "<" + el.name() + "> requires attribute 'service'");
}

std::vector<wetdl::Param> parameters_of(const dom::Node& el) {
  std::vector<wetdl::Param> out;
  for (const dom::Node* p : el.elements()) {
    if (p->local_name() != "parameter" && p->local_name() != "parameters" && p->local_name() != "param") {
      throw PolicyError("UNKNOWN_ELEMENT", "unexpected <" + p->name() + "> in <" + el.name() + ">");
    }
    std::string name = trim(required_attr(*p, "name"));
    std::string value;
    if (auto* v = p->find_attribute("value")) {
      value = v->value;
    } else if (auto* pv = p->find_attribute("property-value")) {
      value = pv->value;
    }
    out.push_back({std::move(name), trim(value)});
  }
  return out;
}

Action action_of(const dom::Node& el) {
  Action a;
  auto n = el.local_name();
  if (n == "detached") {
    a.kind = Action::Kind::Detach;
  } else if (n == "attached") {
    a.kind = Action::Kind::Attach;
  } else if (n == "updated") {
    a.kind = Action::Kind::Update;
  } else {
    throw PolicyError("UNKNOWN_ELEMENT", "unknown action <" + el.name() + ">");
  }
  a.service = service_of(el);
  a.params = parameters_of(el);
  return a;
}

Condition condition_of(const dom::Node& when) {
  auto conds = when.elements();
  if (conds.size() != 1) throw PolicyError("BAD_CONDITION", "<when> must hold exactly one comparison");
  const dom::Node& c = *conds.front();
  Condition cond;
  auto n = c.local_name();
  if (n == "less-than") {
    cond.op = Condition::Op::LessThan;
  } else if (n == "greater-than") {
    cond.op = Condition::Op::GreaterThan;
  } else if (n == "equals") {
    cond.op = Condition::Op::Equals;
  } else {
    throw PolicyError("UNKNOWN_ELEMENT", "unknown condition <" + c.name() + ">");
  }
  bool have_property = false, have_literal = false;
  for (const dom::Node* operand : c.elements()) {
    auto on = operand->local_name();
    if (on == "property-value") {
      cond.property = trim(required_attr(*operand, "name"));
      have_property = true;
    } else if (on == "number") {
      const auto& raw = required_attr(*operand, "value");
      auto v = to_number(raw);
      if (!v) throw PolicyError("BAD_NUMBER", "'" + raw + "' is not a number");
      cond.literal = *v;
      have_literal = true;
    } else if (on == "string") {
      cond.literal = required_attr(*operand, "value");
      have_literal = true;
    } else {
      throw PolicyError("UNKNOWN_ELEMENT", "unknown operand <" + operand->name() + ">");
    }
  }
  if (!have_property || !have_literal) {
    throw PolicyError("BAD_CONDITION", "<" + c.name() + "> needs a property-value and a literal");
  }
  return cond;
}

Policy system_policy(const dom::Node& root) {
  Policy policy;
  policy.name = trim(required_attr(root, "name"));
  for (const dom::Node* r : root.elements()) {
    if (r->local_name() != "rule") throw PolicyError("UNKNOWN_ELEMENT", "unexpected <" + r->name() + ">");
    Rule rule;
    const dom::Node* when = nullptr;
    const dom::Node* ensure = nullptr;
    for (const dom::Node* part : r->elements()) {
      if (part->local_name() == "when") {
        when = part;
      } else if (part->local_name() == "ensure") {
        ensure = part;
      } else {
        throw PolicyError("UNKNOWN_ELEMENT", "unexpected <" + part->name() + "> in <rule>");
      }
    }
    if (!when) throw PolicyError("BAD_CONDITION", "rule without <when>");
    rule.when = condition_of(*when);
    if (ensure) {
      for (const dom::Node* a : ensure->elements()) rule.ensure.push_back(action_of(*a));
    }
    if (rule.ensure.empty()) throw PolicyError("EMPTY_ENSURE", "rule has no actions");
    policy.rules.push_back(std::move(rule));
  }
  if (policy.rules.empty()) throw PolicyError("NO_RULES", "policy '" + policy.name + "' has no rules");
  return policy;
}

ExtractionDirective directive(const dom::Node& root) {
  auto children = root.elements();
  if (children.size() != 1 || children.front()->local_name() != "updated") {
    throw PolicyError("UNKNOWN_ELEMENT", "directive must hold exactly one <updated> element");
  }
  const dom::Node& u = *children.front();
  ExtractionDirective d;
  auto attr = [&](std::string_view name) -> std::string {
    auto* a = u.find_attribute(name);
    return a ? a->value : std::string();
  };
  d.service_name = collapse(attr("Sname"));
  d.summary = collapse(attr("Sum"));
  d.location = strip_spaces(attr("Loc"));
  d.url = strip_spaces(attr("URL"));
  d.language = collapse(attr("Slang"));
  d.wetdl_url = strip_spaces(attr("Swdl"));
  if (d.service_name.empty()) throw PolicyError("MISSING_ATTRIBUTE", "<updated> requires attribute 'Sname'");
  if (d.effective_url().empty()) throw PolicyError("MISSING_ATTRIBUTE", "<updated> requires attribute 'Swdl'");
  return d;
}

}  // namespace

// --------------------------------------------------------------------

std::string to_string(const PropertyValue& value) {
  if (auto* s = std::get_if<std::string>(&value)) return *s;
  double d = std::get<double>(value);
  std::ostringstream ss;
  ss.precision(15);
  ss << d;
  return ss.str();
}

void PropertyStore::set_text(std::string path, std::string_view text) {
  if (auto v = to_number(text)) {
    set(std::move(path), *v);
  } else {
    set(std::move(path), trim(text));
  }
}

const PropertyValue* PropertyStore::get(std::string_view path) const {
  auto it = values_.find(path);
  return it == values_.end() ? nullptr : &it->second;
}

PropertyStore PropertyStore::parse(std::string_view text) {
  PropertyStore store;
  std::size_t start = 0, line_no = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = trim(text.substr(start, nl - start));
    start = nl + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos || trim(line.substr(0, eq)).empty()) {
      throw PolicyError("BAD_PROPERTY", "line " + std::to_string(line_no) + ": expected 'path = value'");
    }
    store.set_text(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
  return store;
}

PropertyStore PropertyStore::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PolicyError("BAD_PROPERTY", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

ParsedPolicy parse_policy(std::string_view xml_text) {
  dom::Document doc = parse_lenient(xml_text);
  const dom::Node& root = *doc.document_element();
  auto n = root.local_name();
  if (n == "system-policy") return system_policy(root);
  if (n == "PersonalizedExtraction-policy") return directive(root);
  throw PolicyError("UNKNOWN_ROOT", "unknown policy root <" + root.name() + ">");
}

std::string_view status_name(RuleOutcome::Status status) {
  switch (status) {
    case RuleOutcome::Status::Triggered: return "triggered";
    case RuleOutcome::Status::NotTriggered: return "not-triggered";
    case RuleOutcome::Status::Unevaluable: return "unevaluable";
  }
  return "not-triggered";
}

std::vector<std::size_t> Evaluation::triggered() const {
  std::vector<std::size_t> out;
  for (const auto& o : outcomes) {
    if (o.status == RuleOutcome::Status::Triggered) out.push_back(o.rule);
  }
  return out;
}

std::vector<std::size_t> Evaluation::unevaluable() const {
  std::vector<std::size_t> out;
  for (const auto& o : outcomes) {
    if (o.status == RuleOutcome::Status::Unevaluable) out.push_back(o.rule);
  }
  return out;
}

Evaluation evaluate(const Policy& policy, const PropertyStore& props) {
  Evaluation ev;
  for (std::size_t i = 0; i < policy.rules.size(); ++i) {
    const Condition& c = policy.rules[i].when;
    RuleOutcome o{i, RuleOutcome::Status::NotTriggered, {}};
    const PropertyValue* v = props.get(c.property);
    if (!v) {
      o.status = RuleOutcome::Status::Unevaluable;
      o.reason = "property '" + c.property + "' is not set";
    } else if (v->index() != c.literal.index()) {
      o.status = RuleOutcome::Status::Unevaluable;
      o.reason = "property '" + c.property + "' and literal have different types";
    } else if (c.op == Condition::Op::Equals) {
      o.status = *v == c.literal ? RuleOutcome::Status::Triggered : RuleOutcome::Status::NotTriggered;
    } else if (!std::holds_alternative<double>(*v)) {
      o.status = RuleOutcome::Status::Unevaluable;
      o.reason = "ordering comparison on a string property '" + c.property + "'";
    } else {
      double a = std::get<double>(*v), b = std::get<double>(c.literal);
      bool hit = c.op == Condition::Op::LessThan ? a < b : a > b;
      o.status = hit ? RuleOutcome::Status::Triggered : RuleOutcome::Status::NotTriggered;
    }
    ev.outcomes.push_back(std::move(o));
  }
  return ev;
}

PlanResult plan_actions(const Policy& policy, const Evaluation& evaluation, const ServiceRegistry& registry) {
  PlanResult result;
  result.plan.origin = policy.name;
  for (std::size_t r : evaluation.triggered()) {
    for (const auto& a : policy.rules.at(r).ensure) {
      if (std::find(result.plan.actions.begin(), result.plan.actions.end(), a) == result.plan.actions.end()) {
        result.plan.actions.push_back(a);
      }
    }
  }
  result.rejected = dataflow::check_actions(registry, result.plan);
  return result;
}

DirectiveAnalysis analyze_extraction_directive(const ExtractionDirective& directive, const Fetcher& fetcher,
                                               const ServiceRegistry& registry) {
  if (directive.language != "WetDL") {
    throw PolicyError("UNSUPPORTED_LANGUAGE", "language '" + directive.language + "' is not supported");
  }
  std::string url = directive.effective_url();
  if (!is_absolute_url(url)) url = "http://" + url;
  HttpRequest request;
  request.url = url;
  auto response = fetcher.perform(request);
  if (!response || response->status >= 400) throw PolicyError("FETCH_FAILED", "cannot fetch " + url);

  wetdl::ParsedTask parsed;
  try {
    parsed = wetdl::parse_task(response->body);
  } catch (const dom::ParseError& e) {
    throw PolicyError("WETDL_INVALID", url + ": " + e.what());
  }
  auto diags = parsed.diagnostics;
  auto more = wetdl::validate_network(parsed.network);
  diags.insert(diags.end(), more.begin(), more.end());
  if (wetdl::has_errors(diags)) throw PolicyError("WETDL_INVALID", url + " does not validate", diags);

  DirectiveAnalysis out;
  out.network = std::move(parsed.network);
  out.plan.origin = directive.service_name;
  for (const auto& op : out.network.operators) {
    if (op.kind == wetdl::OperatorKind::Dummy) continue;
    std::string kind(wetdl::kind_name(op.kind));
    if (std::find(out.required.begin(), out.required.end(), kind) == out.required.end()) out.required.push_back(kind);
  }
  for (const auto& entry : registry.entries()) {
    if (std::find(out.required.begin(), out.required.end(), entry.name) == out.required.end()) {
      out.plan.actions.push_back({Action::Kind::Detach, entry.name, {}});
    }
  }
  for (const auto& kind : out.required) {
    if (registry.attached(kind)) continue;
    auto op = std::find_if(out.network.operators.begin(), out.network.operators.end(),
                           [&](const wetdl::OperatorSpec& s) { return wetdl::kind_name(s.kind) == kind; });
    out.plan.actions.push_back({Action::Kind::Attach, kind, op->params});
  }
  return out;
}

std::string serialize_plan(const ReconfigurationPlan& plan) {
  using dom::escape_attribute;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<services-policy";
  if (!plan.origin.empty()) out += " origin=\"" + escape_attribute(plan.origin) + "\"";
  if (plan.actions.empty()) return out + "/>\n";
  out += ">\n";
  for (const auto& a : plan.actions) {
    std::string tag = a.kind == Action::Kind::Detach   ? "detached"
                      : a.kind == Action::Kind::Attach ? "attached"
                                                       : "updated";
    out += "  <" + tag + " service=\"" + escape_attribute(a.service) + "\"";
    if (a.params.empty()) {
      out += "/>\n";
      continue;
    }
    out += ">\n";
    for (const auto& p : a.params) {
      out += "    <parameter name=\"" + escape_attribute(p.key) + "\" value=\"" + escape_attribute(p.value) + "\"/>\n";
    }
    out += "  </" + tag + ">\n";
  }
  return out + "</services-policy>\n";
}

ReconfigurationPlan parse_plan(std::string_view xml_text) {
  dom::Document doc = parse_lenient(xml_text);
  const dom::Node& root = *doc.document_element();
  if (root.local_name() != "services-policy") {
    throw PolicyError("UNKNOWN_ROOT", "unknown plan root <" + root.name() + ">");
  }
  ReconfigurationPlan plan;
  if (auto* o = root.find_attribute("origin")) plan.origin = o->value;
  for (const dom::Node* el : root.elements()) plan.actions.push_back(action_of(*el));
  return plan;
}

}  // namespace wexfab::adapt
