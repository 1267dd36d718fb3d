#include "wexfab/wetdl.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <set>

#include "wexfab/dom.hpp"

namespace wexfab::wetdl {

namespace {

constexpr std::array<std::pair<OperatorKind, std::string_view>, 8> kKinds = {{
    {OperatorKind::Dummy, "dummy"},
    {OperatorKind::Query, "query"},
    {OperatorKind::Fetch, "fetch"},
    {OperatorKind::Parse, "parse"},
    {OperatorKind::Filter, "filter"},
    {OperatorKind::Extract, "extract"},
    {OperatorKind::Transform, "transform"},
    {OperatorKind::Db, "db"},
}};

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string local(std::string_view name) {
  auto c = name.find(':');
  return std::string(c == std::string_view::npos ? name : name.substr(c + 1));
}

std::vector<std::string> split_targets(std::string_view list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    auto comma = list.find(',', start);
    if (comma == std::string_view::npos) comma = list.size();
    auto t = trim(list.substr(start, comma - start));
    if (!t.empty()) out.push_back(std::move(t));
    start = comma + 1;
  }
  return out;
}

Diagnostic error(std::string code, std::string message, std::string locus) {
  return {Severity::Error, std::move(code), std::move(message), std::move(locus)};
}

}  // namespace

std::string_view kind_name(OperatorKind kind) {
  for (auto [k, n] : kKinds) {
    if (k == kind) return n;
  }
  return "dummy";
}

std::optional<OperatorKind> kind_from_name(std::string_view name) {
  for (auto [k, n] : kKinds) {
    if (n == name) return k;
  }
  return std::nullopt;
}

const std::string* OperatorSpec::param(std::string_view key) const {
  const std::string* found = nullptr;
  for (const auto& p : params) {
    if (p.key == key) found = &p.value;
  }
  return found;
}

void OperatorSpec::set_param(std::string key, std::string value) {
  bool found = false;
  for (auto& p : params) {
    if (p.key == key) {
      p.value = value;
      found = true;
    }
  }
  if (!found) params.push_back({std::move(key), std::move(value)});
}

const OperatorSpec* TaskNetwork::find(std::string_view name) const {
  for (const auto& op : operators) {
    if (op.name == name) return &op;
  }
  return nullptr;
}

std::vector<std::string> TaskNetwork::entry_points() const {
  std::set<std::string> targeted;
  for (const auto& op : operators) targeted.insert(op.forward_to.begin(), op.forward_to.end());
  std::vector<std::string> out;
  for (const auto& op : operators) {
    if (!targeted.count(op.name)) out.push_back(op.name);
  }
  return out;
}

std::string Diagnostic::str() const {
  std::string out = severity == Severity::Error ? "error" : "warning";
  out += " " + code;
  if (!locus.empty()) out += " [" + locus + "]";
  out += ": " + message;
  return out;
}

bool has_errors(const std::vector<Diagnostic>& diagnostics) {
  return std::any_of(diagnostics.begin(), diagnostics.end(),
                     [](const Diagnostic& d) { return d.severity == Severity::Error; });
}

// --------------------------------------------------------------------

ParsedTask parse_task(std::string_view xml_text) {
  dom::Document doc = dom::parse_xml(xml_text);
  ParsedTask result;
  const dom::Node* root = doc.document_element();
  if (root->local_name() != "source") {
    result.diagnostics.push_back(
        error("BAD_ROOT", "root element must be 'source', found '" + root->name() + "'", root->name()));
    return result;
  }
  if (auto* n = root->find_attribute("name")) {
    result.network.source_name = n->value;
  } else {
    result.diagnostics.push_back(error("MISSING_NAME", "source element has no name attribute", "source"));
  }

  std::size_t index = 0;
  for (const dom::Node* el : root->elements()) {
    ++index;
    std::string locus = "operator #" + std::to_string(index);
    auto kind = kind_from_name(el->local_name());
    if (!kind) {
      result.diagnostics.push_back(
          error("UNKNOWN_OPERATOR", "unknown operator element '" + el->name() + "'", locus));
      continue;
    }
    OperatorSpec op;
    op.kind = *kind;
    if (auto* n = el->find_attribute("name")) {
      op.name = n->value;
    } else {
      result.diagnostics.push_back(
          error("MISSING_NAME", "operator element <" + el->name() + "> has no name attribute", locus));
      continue;
    }
    if (auto* f = el->find_attribute("forward-to")) op.forward_to = split_targets(f->value);

    for (const dom::Node* child : el->elements()) {
      std::string cname = local(child->name());
      if (cname == "param" || cname == "parameters") {
        auto* pn = child->find_attribute("name");
        if (!pn) {
          result.diagnostics.push_back(
              error("PARAM_NAME", "<" + cname + "> without a name attribute", op.name));
          continue;
        }
        std::string value;
        if (auto* pv = child->find_attribute("value")) {
          value = pv->value;
        } else {
          value = trim(child->text_content());
        }
        op.params.push_back({pn->value, std::move(value)});
      } else if (cname == "map") {
        std::string joined;
        bool first = true;
        for (const dom::Node* key : child->elements()) {
          if (local(key->name()) != "key") continue;
          if (!first) joined += '\n';
          joined += trim(key->text_content());
          first = false;
        }
        op.params.push_back({std::string(kMapParam), std::move(joined)});
      } else if (cname == "data") {
        op.inline_data.push_back(trim(child->text_content()));
      } else if (cname == "query") {
        op.query_template = trim(child->text_content());
      } else {
        result.diagnostics.push_back({Severity::Warning, "UNKNOWN_CHILD",
                                      "ignored child element <" + child->name() + ">", op.name});
      }
    }
    result.network.operators.push_back(std::move(op));
  }
  return result;
}

// --------------------------------------------------------------------

std::vector<Diagnostic> validate_network(const TaskNetwork& net) {
  std::vector<Diagnostic> out;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < net.operators.size(); ++i) {
    const auto& op = net.operators[i];
    if (op.name.empty()) {
      out.push_back(error("EMPTY_NAME", "operator name is empty", "operator #" + std::to_string(i + 1)));
      continue;
    }
    if (!index.emplace(op.name, i).second) {
      out.push_back(error("DUP_NAME", "operator name '" + op.name + "' is declared more than once", op.name));
    }
  }
  for (const auto& op : net.operators) {
    std::set<std::string> seen;
    for (const auto& target : op.forward_to) {
      if (!index.count(target)) {
        out.push_back(error("UNRESOLVED_EDGE", "forward-to target '" + target + "' does not exist", op.name));
      }
      if (!seen.insert(target).second) {
        out.push_back({Severity::Warning, "DUP_EDGE", "forward-to lists '" + target + "' twice", op.name});
      }
    }
    if (!op.inline_data.empty() && op.kind != OperatorKind::Dummy) {
      out.push_back(error("INLINE_DATA", "only dummy operators may carry <data>", op.name));
    }
    if (op.query_template && op.kind != OperatorKind::Db) {
      out.push_back(error("QUERY_NOT_DB", "only db operators may carry <query>", op.name));
    }
  }

  // Tarjan SCC over resolvable edges; every non-trivial component is a cycle.
  const std::size_t n = net.operators.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& t : net.operators[i].forward_to) {
      if (auto it = index.find(t); it != index.end()) adj[i].push_back(it->second);
    }
  }
  std::vector<int> idx(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  int counter = 0;
  std::function<void(std::size_t)> strongconnect = [&](std::size_t v) {
    idx[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (auto w : adj[v]) {
      if (idx[w] < 0) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], idx[w]);
      }
    }
    if (low[v] == idx[v]) {
      std::vector<std::size_t> comp;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        comp.push_back(w);
      } while (w != v);
      bool self_loop = std::find(adj[v].begin(), adj[v].end(), v) != adj[v].end();
      if (comp.size() > 1 || self_loop) {
        std::sort(comp.begin(), comp.end());
        std::string names;
        for (auto c : comp) names += (names.empty() ? "" : ", ") + net.operators[c].name;
        out.push_back(error("CYCLE", "forward-to edges form a cycle through " + names,
                            net.operators[comp.front()].name));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (idx[v] < 0) strongconnect(v);
  }
  return out;
}

// --------------------------------------------------------------------

InvalidNetwork::InvalidNetwork(std::vector<Diagnostic> diagnostics)
    : std::runtime_error(diagnostics.empty() ? "invalid network" : diagnostics.front().str()),
      diagnostics_(std::move(diagnostics)) {}

std::string serialize_task(const TaskNetwork& net) {
  auto diags = validate_network(net);
  if (has_errors(diags)) throw InvalidNetwork(std::move(diags));

  using dom::escape_attribute;
  using dom::escape_text;
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<source name=\"" + escape_attribute(net.source_name) + "\">\n";
  for (const auto& op : net.operators) {
    std::string kind(kind_name(op.kind));
    out += "  <" + kind + " name=\"" + escape_attribute(op.name) + "\"";
    if (!op.forward_to.empty()) {
      std::string targets;
      for (const auto& t : op.forward_to) targets += (targets.empty() ? "" : ",") + t;
      out += " forward-to=\"" + escape_attribute(targets) + "\"";
    }
    if (op.params.empty() && op.inline_data.empty() && !op.query_template) {
      out += "/>\n";
      continue;
    }
    out += ">\n";
    for (const auto& p : op.params) {
      if (p.key == kMapParam) {
        out += "    <map>\n";
        std::size_t start = 0;
        while (start <= p.value.size()) {
          auto nl = p.value.find('\n', start);
          if (nl == std::string::npos) nl = p.value.size();
          out += "      <key>" + escape_text(p.value.substr(start, nl - start)) + "</key>\n";
          start = nl + 1;
        }
        out += "    </map>\n";
      } else {
        out += "    <param name=\"" + escape_attribute(p.key) + "\" value=\"" + escape_attribute(p.value) +
               "\"/>\n";
      }
    }
    for (const auto& d : op.inline_data) out += "    <data>" + escape_text(d) + "</data>\n";
    if (op.query_template) out += "    <query>" + escape_text(*op.query_template) + "</query>\n";
    out += "  </" + kind + ">\n";
  }
  out += "</source>\n";
  return out;
}

}  // namespace wexfab::wetdl
