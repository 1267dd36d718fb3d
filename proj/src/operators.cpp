#include "wexfab/operators.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace wexfab::operators {

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
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

bool is_name_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_name_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) nl = s.size();
    auto t = trim(s.substr(start, nl - start));
    if (!t.empty()) out.push_back(std::move(t));
    start = nl + 1;
  }
  return out;
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto c = s.find(',', start);
    if (c == std::string_view::npos) c = s.size();
    auto t = trim(s.substr(start, c - start));
    if (!t.empty()) out.push_back(std::move(t));
    start = c + 1;
  }
  return out;
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : trim(s)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
    } else {
      if (space && !out.empty()) out += ' ';
      space = false;
      out += c;
    }
  }
  return out;
}

}  // namespace

// --------------------------------------------------------------------
// PathExpression

PathExpression PathExpression::parse(std::string_view text) {
  PathExpression expr;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("bad path expression '" + std::string(text) + "': " + why);
  };
  std::size_t i = 0;
  const std::size_t n = text.size();
  if (n == 0) fail("empty");
  PathStep::Axis axis = PathStep::Axis::Child;
  bool need_step = false;
  if (text[0] == '/') {
    if (n > 1 && text[1] == '/') {
      axis = PathStep::Axis::Descendant;
      i = 2;
    } else {
      i = 1;
    }
    need_step = true;
  }
  while (i < n) {
    std::size_t end = text.find('/', i);
    if (end == std::string_view::npos) end = n;
    std::string_view step = text.substr(i, end - i);
    if (step.empty()) fail("empty step");
    bool last = end == n;
    if (step.front() == '@') {
      if (!last) fail("attribute must be the last step");
      if (axis == PathStep::Axis::Descendant) fail("'//@' is not supported");
      expr.terminal = Terminal::Attribute;
      expr.attribute = std::string(step.substr(1));
      if (expr.attribute.empty()) fail("empty attribute name");
    } else if (step == "text()") {
      if (!last) fail("text() must be the last step");
      if (axis == PathStep::Axis::Descendant) fail("'//text()' is not supported");
      expr.terminal = Terminal::Text;
    } else {
      bool ok = step == "*" || std::all_of(step.begin(), step.end(), [](char c) {
        return is_name_char(c) || c == '-' || c == '.' || c == ':' || static_cast<unsigned char>(c) >= 0x80;
      });
      if (!ok) fail("unsupported step '" + std::string(step) + "'");
      expr.steps.push_back({axis, std::string(step)});
    }
    need_step = false;
    if (last) break;
    i = end + 1;
    axis = PathStep::Axis::Child;
    if (i < n && text[i] == '/') {
      axis = PathStep::Axis::Descendant;
      ++i;
    }
    need_step = true;
  }
  if (need_step) fail("trailing '/'");
  return expr;
}

namespace {

bool name_test(const dom::Node& node, const std::string& test) {
  return test == "*" || node.name() == test || node.local_name() == test;
}

void collect_descendants(const dom::Node& node, const std::string& test, std::vector<const dom::Node*>& out) {
  for (const auto& child : node.children()) {
    if (!child->is_element()) continue;
    if (name_test(*child, test)) out.push_back(child.get());
    collect_descendants(*child, test, out);
  }
}

void preorder(const dom::Node& node, std::map<const dom::Node*, std::size_t>& order) {
  order.emplace(&node, order.size());
  for (const auto& c : node.children()) preorder(*c, order);
}

}  // namespace

std::vector<const dom::Node*> PathExpression::select(const dom::Node& context) const {
  std::vector<const dom::Node*> current{&context};
  for (const auto& step : steps) {
    std::vector<const dom::Node*> next;
    for (const dom::Node* node : current) {
      if (step.axis == PathStep::Axis::Child) {
        for (const dom::Node* child : node->elements()) {
          if (name_test(*child, step.test)) next.push_back(child);
        }
      } else {
        collect_descendants(*node, step.test, next);
      }
    }
    if (current.size() > 1 && !next.empty()) {
      const dom::Node* top = &context;
      while (top->parent()) top = top->parent();
      std::map<const dom::Node*, std::size_t> order;
      preorder(*top, order);
      std::sort(next.begin(), next.end(), [&](auto* a, auto* b) { return order.at(a) < order.at(b); });
      next.erase(std::unique(next.begin(), next.end()), next.end());
    }
    current = std::move(next);
  }
  return current;
}

std::vector<Item> PathExpression::evaluate(const DocumentRef& doc, const std::string& provenance) const {
  std::vector<Item> out;
  for (const dom::Node* node : select(doc.context())) {
    switch (terminal) {
      case Terminal::None:
        out.push_back(Item{DocumentRef{doc.document, node}, provenance});
        break;
      case Terminal::Text:
        out.push_back(make_text(node->text_content(), provenance));
        break;
      case Terminal::Attribute:
        if (auto* a = node->find_attribute(attribute)) out.push_back(make_text(a->value, provenance));
        break;
    }
  }
  return out;
}

// --------------------------------------------------------------------
// RegexExtractor, Predicate

RegexExtractor RegexExtractor::make(std::string pattern, std::vector<std::string> key_map) {
  RegexExtractor r;
  try {
    r.compiled = std::regex(pattern, std::regex::ECMAScript);
  } catch (const std::regex_error& e) {
    throw std::invalid_argument("bad regular expression: " + std::string(e.what()));
  }
  std::set<std::string> unique(key_map.begin(), key_map.end());
  if (unique.size() != key_map.size()) throw std::invalid_argument("duplicate key in map");
  if (r.compiled.mark_count() < key_map.size()) {
    throw std::invalid_argument("regular expression has " + std::to_string(r.compiled.mark_count()) +
                                " groups for " + std::to_string(key_map.size()) + " keys");
  }
  r.pattern = std::move(pattern);
  r.key_map = std::move(key_map);
  return r;
}

std::vector<Record> RegexExtractor::apply(const std::string& text) const {
  std::vector<Record> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), compiled); it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    if (m.length(0) == 0) continue;
    Record r;
    for (std::size_t k = 0; k < key_map.size(); ++k) {
      if (m[k + 1].matched) r.set(key_map[k], m[k + 1].str());
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::optional<Predicate::Op> parse_predicate_op(std::string_view name) {
  auto n = lower(name);
  if (n == "equals") return Predicate::Op::Equals;
  if (n == "contains") return Predicate::Op::Contains;
  if (n == "matches") return Predicate::Op::Matches;
  if (n == "less-than" || n == "less_than") return Predicate::Op::LessThan;
  if (n == "greater-than" || n == "greater_than") return Predicate::Op::GreaterThan;
  return std::nullopt;
}

std::optional<std::string> select_field(const Item& item, std::string_view selector) {
  return std::visit(
      [&](const auto& p) -> std::optional<std::string> {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TextValue>) {
          if (selector == "text" || selector == "_text") return p.text;
        } else if constexpr (std::is_same_v<T, UrlValue>) {
          if (selector == "url" || selector == "_text") return p.url;
        } else if constexpr (std::is_same_v<T, HttpRequest>) {
          if (selector == "url") return p.url;
          if (selector == "method") return std::string(method_name(p.method));
          if (auto* h = find_header(p.headers, selector)) return *h;
        } else if constexpr (std::is_same_v<T, HttpResponse>) {
          if (selector == "url") return p.url;
          if (selector == "status") return std::to_string(p.status);
          if (selector == "body" || selector == "_text") return p.body;
          if (auto* h = find_header(p.headers, selector)) return *h;
        } else if constexpr (std::is_same_v<T, DocumentRef>) {
          if (selector == "text" || selector == "_text") return p.context().text_content();
          if (selector == "name") return p.context().name();
          if (selector.size() > 1 && selector.front() == '@') {
            if (auto* a = p.context().find_attribute(selector.substr(1))) return a->value;
          }
        } else if constexpr (std::is_same_v<T, Record>) {
          if (auto* v = p.get(selector)) return *v;
        }
        return std::nullopt;
      },
      item.payload);
}

bool Predicate::test(const Item& item) const {
  for (const auto& c : conjuncts) {
    auto value = select_field(item, c.selector);
    if (!value) return false;
    bool ok = false;
    switch (c.op) {
      case Op::Equals: ok = *value == c.literal; break;
      case Op::Contains: ok = value->find(c.literal) != std::string::npos; break;
      case Op::Matches: ok = c.regex && std::regex_search(*value, *c.regex); break;
      case Op::LessThan:
      case Op::GreaterThan: {
        auto a = to_number(*value), b = to_number(c.literal);
        ok = a && b && (c.op == Op::LessThan ? *a < *b : *a > *b);
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

// --------------------------------------------------------------------
// Templates

std::string render_template(std::string_view tmpl, const Lookup& lookup, std::vector<std::string>* missing) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    char c = tmpl[i];
    if (c != '$' || i + 1 >= tmpl.size()) {
      out += c;
      continue;
    }
    char d = tmpl[i + 1];
    std::string name;
    std::size_t next = i;
    if (d == '$') {
      out += '$';
      ++i;
      continue;
    } else if (d == '{') {
      auto close = tmpl.find('}', i + 2);
      if (close == std::string_view::npos) {
        out += c;
        continue;
      }
      name = std::string(tmpl.substr(i + 2, close - i - 2));
      next = close;
    } else if (is_name_start(d)) {
      std::size_t e = i + 1;
      while (e < tmpl.size() && is_name_char(tmpl[e])) ++e;
      name = std::string(tmpl.substr(i + 1, e - i - 1));
      next = e - 1;
    } else {
      out += c;
      continue;
    }
    if (auto v = lookup(name)) {
      out += *v;
    } else if (missing) {
      missing->push_back(name);
    }
    i = next;
  }
  return out;
}

std::vector<std::string> template_placeholders(std::string_view tmpl) {
  std::vector<std::string> names;
  render_template(tmpl, [](std::string_view) { return std::nullopt; }, &names);
  return names;
}

Lookup item_lookup(const Item& item) {
  return [&item](std::string_view name) -> std::optional<std::string> {
    if (name == "_text") {
      if (auto* r = std::get_if<Record>(&item.payload)) {
        std::string joined;
        for (const auto& [k, v] : r->fields()) joined += (joined.empty() ? "" : " ") + v;
        return joined;
      }
      return textual_content(item);
    }
    if (name == "_json") {
      if (auto* r = std::get_if<Record>(&item.payload)) return r->to_json().dump();
      return std::nullopt;
    }
    if (auto* r = std::get_if<Record>(&item.payload)) {
      if (auto* v = r->get(name)) return *v;
    }
    return std::nullopt;
  };
}

// --------------------------------------------------------------------
// Operations

std::vector<Item> build_http_query(Method method, std::string_view base_url, const KeyValues& pairs,
                                   const std::string& provenance) {
  auto url = Url::parse(base_url);
  if (!url || url->fragment) return {};
  HttpRequest request;
  request.method = method;
  std::string encoded = form_encode(pairs);
  if (method == Method::Post) {
    request.url = url->str();
    request.body = encoded;
    request.headers.emplace_back("Content-Type", "application/x-www-form-urlencoded");
  } else {
    if (!encoded.empty()) url->query = url->query && !url->query->empty() ? *url->query + "&" + encoded : encoded;
    request.url = url->str();
  }
  return {Item{std::move(request), provenance}};
}

std::vector<Item> fetch(const Item& input, const Fetcher& fetcher, std::optional<Method> method_override,
                        const std::string& provenance) {
  HttpRequest request;
  if (auto* r = std::get_if<HttpRequest>(&input.payload)) {
    request = *r;
  } else if (auto* u = std::get_if<UrlValue>(&input.payload)) {
    request.url = u->url;
  } else if (auto* t = std::get_if<TextValue>(&input.payload)) {
    auto url = trim(t->text);
    if (!is_absolute_url(url)) return {};
    request.url = url;
  } else {
    return {};
  }
  if (method_override) request.method = *method_override;
  auto response = fetcher.perform(request);
  if (!response || response->status >= 400) return {};
  return {Item{std::move(*response), provenance}};
}

std::vector<Item> parse_document(const Item& input, DocumentFormat format, const std::string& provenance) {
  std::string text;
  if (auto* r = std::get_if<HttpResponse>(&input.payload)) {
    if (auto* ct = find_header(r->headers, "content-type")) {
      auto t = lower(*ct);
      bool ok = t.find("xml") != std::string::npos || t.rfind("text/", 0) == 0 ||
                (format == DocumentFormat::Html && t.find("html") != std::string::npos);
      if (!ok) return {};
    }
    text = r->body;
  } else if (auto* t = std::get_if<TextValue>(&input.payload)) {
    text = t->text;
  } else {
    return {};
  }
  try {
    auto doc = std::make_shared<dom::Document>(format == DocumentFormat::Xml ? dom::parse_xml(text)
                                                                             : dom::parse_html(text));
    return {Item{DocumentRef{std::move(doc), nullptr}, provenance}};
  } catch (const dom::ParseError&) {
    return {};
  }
}

std::vector<Item> filter_items(const Item& input, const Predicate& predicate) {
  if (predicate.test(input)) return {input};
  return {};
}

std::vector<Item> extract(const Item& input, const Extractor& extractor, const std::string& provenance) {
  return std::visit(
      [&](const auto& ex) -> std::vector<Item> {
        using T = std::decay_t<decltype(ex)>;
        std::vector<Item> out;
        if constexpr (std::is_same_v<T, PathExpression>) {
          auto* doc = std::get_if<DocumentRef>(&input.payload);
          if (!doc) return {};
          return ex.evaluate(*doc, provenance);
        } else if constexpr (std::is_same_v<T, RegexExtractor>) {
          auto text = textual_content(input);
          if (!text) return {};
          for (auto& r : ex.apply(*text)) out.push_back(make_record(std::move(r), provenance));
        } else if constexpr (std::is_same_v<T, FieldProjection>) {
          if (!std::holds_alternative<HttpResponse>(input.payload) && !std::holds_alternative<Record>(input.payload)) {
            return {};
          }
          Record r;
          for (const auto& f : ex.fields) {
            if (auto v = select_field(input, f)) r.set(f, *v);
          }
          if (r.empty()) return {};
          out.push_back(make_record(std::move(r), provenance));
        } else {
          std::string text;
          if (auto* r = std::get_if<HttpResponse>(&input.payload)) {
            text = r->body;
          } else if (auto* t = std::get_if<TextValue>(&input.payload)) {
            text = t->text;
          } else {
            return {};
          }
          try {
            for (auto& r : ierel::apply_wrapper(*ex.wrapper, text)) out.push_back(make_record(std::move(r), provenance));
          } catch (const ierel::VersionMismatch&) {
            return {};
          }
        }
        return out;
      },
      extractor);
}

std::vector<Item> transform(const Item& input, std::string_view tmpl, const std::string& provenance) {
  if (tmpl.empty()) return {};
  std::vector<std::string> missing;
  auto text = render_template(tmpl, item_lookup(input), &missing);
  if (!missing.empty()) return {};
  return {make_text(std::move(text), provenance)};
}

bool SinkSet::write(const std::string& target, const std::string& line) {
  if (!target.empty()) {
    std::filesystem::path path(target);
    if (path.is_relative() && !base_dir_.empty()) path = base_dir_ / path;
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) return false;
    out << line << '\n';
    if (!out) return false;
  }
  lines_[target].push_back(line);
  return true;
}

std::string render_statement(const SinkConfig& config, const Record& record, std::size_t* warnings) {
  std::vector<std::string> missing;
  auto text = render_template(
      config.statement,
      [&](std::string_view name) -> std::optional<std::string> {
        auto* v = record.get(name);
        if (!v) return std::nullopt;
        std::string quoted;
        for (char c : *v) {
          quoted += c;
          if (c == '\'') quoted += '\'';
        }
        return quoted;
      },
      &missing);
  if (warnings) *warnings += missing.size();
  return text;
}

std::vector<Item> sink_records(const Item& input, const SinkConfig& config, SinkSet& sinks, std::size_t* warnings) {
  auto* record = std::get_if<Record>(&input.payload);
  if (!record) return {};
  std::string line = config.mode == SinkConfig::Mode::Statement ? render_statement(config, *record, warnings)
                                                                : record->to_json().dump();
  if (!sinks.write(config.target, line)) return {};
  return {input};
}

// --------------------------------------------------------------------
// Compilation

namespace {

wetdl::Diagnostic diag(std::string code, std::string message, const std::string& op) {
  return {wetdl::Severity::Error, std::move(code), std::move(message), op};
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

CompiledOperator compile_operator(const wetdl::OperatorSpec& spec, const CompileOptions& options) {
  using wetdl::OperatorKind;
  CompiledOperator result;
  auto missing = [&](const std::string& param) {
    result.diagnostics.push_back(
        diag("MISSING_PARAM", "operator '" + spec.name + "' requires param '" + param + "'", spec.name));
  };
  auto bad = [&](const std::string& param, const std::string& why) {
    result.diagnostics.push_back(
        diag("BAD_PARAM", "operator '" + spec.name + "' param '" + param + "': " + why, spec.name));
  };
  auto method_param = [&](const std::string* value) -> std::optional<Method> {
    auto m = parse_method(*value);
    if (!m) bad("method", "unknown method '" + *value + "'");
    return m;
  };

  switch (spec.kind) {
    case OperatorKind::Dummy:
      result.config = DummyConfig{};
      break;

    case OperatorKind::Query: {
      QueryConfig c;
      const std::string* base = spec.param("base-url");
      if (!base) {
        missing("base-url");
        break;
      }
      c.base_url = *base;
      if (!is_absolute_url(c.base_url)) {
        bad("base-url", "not an absolute URL");
        break;
      }
      if (auto* m = spec.param("method")) {
        auto parsed = method_param(m);
        if (!parsed) break;
        c.method = *parsed;
      }
      if (auto* mode = spec.param("mode")) {
        if (*mode == "build") {
          c.fetch_response = false;
        } else if (*mode != "service") {
          bad("mode", "expected 'service' or 'build'");
          break;
        }
      }
      for (const auto& p : spec.params) {
        if (p.key.rfind("arg.", 0) == 0) c.args.emplace_back(p.key.substr(4), p.value);
      }
      result.config = std::move(c);
      break;
    }

    case OperatorKind::Fetch: {
      FetchConfig c;
      if (auto* m = spec.param("method")) {
        c.method = method_param(m);
        if (!c.method) break;
      }
      result.config = c;
      break;
    }

    case OperatorKind::Parse: {
      ParseConfig c;
      if (auto* f = spec.param("format")) {
        if (*f == "xml") {
          c.format = DocumentFormat::Xml;
        } else if (*f != "html") {
          bad("format", "expected 'xml' or 'html'");
          break;
        }
      }
      result.config = c;
      break;
    }

    case OperatorKind::Filter: {
      FilterConfig c;
      bool ok = true;
      for (const auto& p : spec.params) {
        auto colon = p.key.find(':');
        if (colon == std::string::npos) continue;
        auto op = parse_predicate_op(p.key.substr(0, colon));
        if (!op) {
          bad(p.key, "unknown test '" + p.key.substr(0, colon) + "'");
          ok = false;
          continue;
        }
        Predicate::Conjunct conj{p.key.substr(colon + 1), *op, p.value, std::nullopt};
        if (*op == Predicate::Op::Matches) {
          try {
            conj.regex = std::regex(p.value);
          } catch (const std::regex_error& e) {
            bad(p.key, e.what());
            ok = false;
            continue;
          }
        }
        c.predicate.conjuncts.push_back(std::move(conj));
      }
      if (ok) result.config = std::move(c);
      break;
    }

    case OperatorKind::Extract: {
      const std::string* path = spec.param("path");
      const std::string* regex = spec.param("regex");
      if (!regex) regex = spec.param("regexp");
      const std::string* wrapper = spec.param("wrapper");
      const std::string* fields = spec.param("fields");
      if (path) {
        try {
          result.config = ExtractConfig{PathExpression::parse(*path)};
        } catch (const std::invalid_argument& e) {
          bad("path", e.what());
        }
      } else if (regex) {
        const std::string* map = spec.param(wetdl::kMapParam);
        try {
          result.config = ExtractConfig{RegexExtractor::make(*regex, map ? split_lines(*map) : std::vector<std::string>{})};
        } catch (const std::invalid_argument& e) {
          bad("regex", e.what());
        }
      } else if (wrapper) {
        std::filesystem::path p(*wrapper);
        if (p.is_relative() && !options.base_dir.empty()) p = options.base_dir / p;
        try {
          auto w = std::make_shared<const ierel::Wrapper>(ierel::Wrapper::from_json_text(read_text_file(p)));
          result.config = ExtractConfig{WrapperRef{*wrapper, std::move(w)}};
        } catch (const std::exception& e) {
          bad("wrapper", e.what());
        }
      } else if (fields) {
        auto list = split_commas(*fields);
        if (list.empty()) {
          bad("fields", "empty field list");
        } else {
          result.config = ExtractConfig{FieldProjection{std::move(list)}};
        }
      } else {
        missing("path");
      }
      break;
    }

    case OperatorKind::Transform: {
      const std::string* t = spec.param("template");
      if (!t || t->empty()) {
        missing("template");
        break;
      }
      result.config = TransformConfig{*t};
      break;
    }

    case OperatorKind::Db: {
      SinkConfig c;
      std::string mode = spec.query_template ? "statement" : "jsonl";
      if (auto* m = spec.param("mode")) mode = *m;
      if (mode == "statement") {
        c.mode = SinkConfig::Mode::Statement;
        if (!spec.query_template || trim(*spec.query_template).empty()) {
          missing("query");
          break;
        }
        c.statement = collapse_whitespace(*spec.query_template);
      } else if (mode != "jsonl") {
        bad("mode", "expected 'statement' or 'jsonl'");
        break;
      }
      if (auto* out = spec.param("output")) c.target = *out;
      result.config = std::move(c);
      break;
    }
  }
  return result;
}

std::vector<Item> run_operator(const OperatorConfig& config, const Item& input, OperatorContext& context,
                               const std::string& provenance) {
  return std::visit(
      [&](const auto& c) -> std::vector<Item> {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, DummyConfig>) {
          Item copy = input;
          if (copy.provenance.empty()) copy.provenance = provenance;
          return {std::move(copy)};
        } else if constexpr (std::is_same_v<T, QueryConfig>) {
          KeyValues pairs;
          auto lookup = item_lookup(input);
          for (const auto& [key, tmpl] : c.args) {
            std::vector<std::string> missing;
            auto value = render_template(tmpl, lookup, &missing);
            if (!missing.empty()) return {};
            pairs.emplace_back(key, std::move(value));
          }
          auto request = build_http_query(c.method, c.base_url, pairs, provenance);
          if (!c.fetch_response || request.empty()) return request;
          if (!context.fetcher) return {};
          return fetch(request.front(), *context.fetcher, std::nullopt, provenance);
        } else if constexpr (std::is_same_v<T, FetchConfig>) {
          if (!context.fetcher) return {};
          return fetch(input, *context.fetcher, c.method, provenance);
        } else if constexpr (std::is_same_v<T, ParseConfig>) {
          return parse_document(input, c.format, provenance);
        } else if constexpr (std::is_same_v<T, FilterConfig>) {
          return filter_items(input, c.predicate);
        } else if constexpr (std::is_same_v<T, ExtractConfig>) {
          return extract(input, c.extractor, provenance);
        } else if constexpr (std::is_same_v<T, TransformConfig>) {
          return transform(input, c.tmpl, provenance);
        } else {
          if (!context.sinks) return {};
          return sink_records(input, c, *context.sinks, &context.warnings);
        }
      },
      config);
}

}  // namespace wexfab::operators
