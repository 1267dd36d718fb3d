#include "wexfab/dom.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <unordered_map>

namespace wexfab::dom {

// --------------------------------------------------------------------
// Node

std::string_view Node::local_name() const {
  std::string_view n = name_;
  auto colon = n.find(':');
  return colon == std::string_view::npos ? n : n.substr(colon + 1);
}

const Attribute* Node::find_attribute(std::string_view name) const {
  for (const auto& a : attributes_) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

std::vector<const Node*> Node::elements() const {
  std::vector<const Node*> out;
  for (const auto& c : children_) {
    if (c->is_element()) out.push_back(c.get());
  }
  return out;
}

static void collect_text(const Node& node, std::string& out) {
  if (node.is_text()) {
    out += node.text();
    return;
  }
  for (const auto& c : node.children()) collect_text(*c, out);
}

std::string Node::text_content() const {
  std::string out;
  collect_text(*this, out);
  return out;
}

Node& Node::append_element(std::string name, std::vector<Attribute> attributes) {
  auto child = std::make_unique<Node>(Kind::Element, std::move(name));
  child->attributes_ = std::move(attributes);
  child->parent_ = this;
  children_.push_back(std::move(child));
  return *children_.back();
}

void Node::append_text(std::string_view text) {
  if (text.empty()) return;
  if (!children_.empty() && children_.back()->is_text()) {
    children_.back()->text_ += text;
    return;
  }
  auto child = std::make_unique<Node>(Kind::Text);
  child->text_ = std::string(text);
  child->parent_ = this;
  children_.push_back(std::move(child));
}

const Node* Document::document_element() const {
  for (const auto& c : root_->children()) {
    if (c->is_element()) return c.get();
  }
  return nullptr;
}

ParseError::ParseError(const std::string& message, std::size_t line, std::size_t column)
    : std::runtime_error(message + " at line " + std::to_string(line) + ", column " +
                         std::to_string(column)),
      line_(line),
      column_(column) {}

// --------------------------------------------------------------------
// Entities

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

namespace {

const std::unordered_map<std::string_view, char32_t>& html_entities() {
  static const std::unordered_map<std::string_view, char32_t> table = {
      {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},
      {"apos", '\''},    {"nbsp", 0xA0},    {"copy", 0xA9},    {"reg", 0xAE},
      {"laquo", 0xAB},   {"raquo", 0xBB},   {"middot", 0xB7},  {"agrave", 0xE0},
      {"aacute", 0xE1},  {"acirc", 0xE2},   {"auml", 0xE4},    {"ccedil", 0xE7},
      {"egrave", 0xE8},  {"eacute", 0xE9},  {"ecirc", 0xEA},   {"euml", 0xEB},
      {"iacute", 0xED},  {"icirc", 0xEE},   {"iuml", 0xEF},    {"ntilde", 0xF1},
      {"oacute", 0xF3},  {"ocirc", 0xF4},   {"ouml", 0xF6},    {"uacute", 0xFA},
      {"ucirc", 0xFB},   {"uuml", 0xFC},    {"szlig", 0xDF},   {"Eacute", 0xC9},
      {"ndash", 0x2013}, {"mdash", 0x2014}, {"hellip", 0x2026}, {"euro", 0x20AC},
      {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
  };
  return table;
}

// Parses the reference starting after '&' up to and including ';'.
// Returns the code point and the consumed length, or nullopt.
std::optional<std::pair<char32_t, std::size_t>> parse_reference(std::string_view s, bool xml_only) {
  auto semi = s.find(';');
  if (semi == std::string_view::npos || semi == 0 || semi > 32) return std::nullopt;
  std::string_view body = s.substr(0, semi);
  if (body[0] == '#') {
    std::uint32_t value = 0;
    std::from_chars_result r{};
    if (body.size() > 1 && (body[1] == 'x' || body[1] == 'X')) {
      if (body.size() == 2) return std::nullopt;
      r = std::from_chars(body.data() + 2, body.data() + body.size(), value, 16);
    } else {
      if (body.size() == 1) return std::nullopt;
      r = std::from_chars(body.data() + 1, body.data() + body.size(), value, 10);
    }
    if (r.ec != std::errc{} || r.ptr != body.data() + body.size()) return std::nullopt;
    if (value == 0 || value > 0x10FFFF) return std::nullopt;
    return std::make_pair(static_cast<char32_t>(value), semi + 1);
  }
  if (xml_only) {
    static constexpr std::array<std::pair<std::string_view, char32_t>, 5> xml = {
        {{"amp", '&'}, {"lt", '<'}, {"gt", '>'}, {"quot", '"'}, {"apos", '\''}}};
    for (auto [n, cp] : xml) {
      if (n == body) return std::make_pair(cp, semi + 1);
    }
    return std::nullopt;
  }
  const auto& table = html_entities();
  if (auto it = table.find(body); it != table.end()) return std::make_pair(it->second, semi + 1);
  return std::nullopt;
}

}  // namespace

std::string decode_entities(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '&') {
      if (auto ref = parse_reference(text.substr(i + 1), false)) {
        append_utf8(out, ref->first);
        i += ref->second;
        continue;
      }
    }
    out += text[i];
  }
  return out;
}

std::string escape_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string escape_attribute(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\n': out += "&#10;"; break;
      case '\r': out += "&#13;"; break;
      case '\t': out += "&#9;"; break;
      default: out += c;
    }
  }
  return out;
}

// --------------------------------------------------------------------
// Strict XML

namespace {

bool is_name_start(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalpha(u) || c == '_' || c == ':' || u >= 0x80;
}

bool is_name_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return is_name_start(c) || std::isdigit(u) || c == '-' || c == '.';
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

class XmlParser {
 public:
  XmlParser(std::string_view text, const XmlOptions& options) : s_(text), options_(options) {}

  Document parse() {
    Document doc;
    // Optional UTF-8 byte order mark.
    if (s_.substr(0, 3) == "\xEF\xBB\xBF") pos_ = 3;
    parse_misc(doc, true);
    if (at_end()) fail("missing root element");
    if (peek() != '<') fail("text outside the root element");
    parse_element(doc.root());
    parse_misc(doc, false);
    if (!at_end()) fail("content after the root element");
    return doc;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i < pos_ && i < s_.size(); ++i) {
      if (s_[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ParseError(message, line, column);
  }

  bool at_end() const { return pos_ >= s_.size(); }
  char peek() const { return at_end() ? '\0' : s_[pos_]; }
  bool starts_with(std::string_view p) const { return s_.substr(pos_, p.size()) == p; }

  void skip_space() {
    while (!at_end() && is_space(s_[pos_])) ++pos_;
  }

  void expect(std::string_view p) {
    if (!starts_with(p)) fail("expected '" + std::string(p) + "'");
    pos_ += p.size();
  }

  void skip_until(std::string_view terminator, const char* what) {
    auto end = s_.find(terminator, pos_);
    if (end == std::string_view::npos) fail(std::string("unterminated ") + what);
    pos_ = end + terminator.size();
  }

  // Prolog / epilog: whitespace, comments, PIs and (prolog only) one DOCTYPE.
  void parse_misc(Document&, bool prolog) {
    bool seen_doctype = false;
    while (true) {
      skip_space();
      if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (starts_with("<!--")) {
        pos_ += 4;
        skip_until("-->", "comment");
      } else if (prolog && !seen_doctype && starts_with("<!DOCTYPE")) {
        skip_doctype();
        seen_doctype = true;
      } else {
        return;
      }
    }
  }

  void skip_doctype() {
    pos_ += 9;
    char quote = 0;
    int bracket = 0;
    while (!at_end()) {
      char c = s_[pos_++];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '"' || c == '\'') {
        quote = c;
      } else if (c == '[') {
        ++bracket;
      } else if (c == ']') {
        --bracket;
      } else if (c == '>' && bracket <= 0) {
        return;
      }
    }
    fail("unterminated DOCTYPE");
  }

  std::string parse_name() {
    if (at_end() || !is_name_start(peek())) fail("invalid name");
    std::size_t start = pos_;
    while (!at_end() && is_name_char(s_[pos_])) ++pos_;
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string decode(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
      char c = raw[i];
      if (c == '&') {
        auto ref = parse_reference(raw.substr(i + 1), true);
        if (!ref) fail("undefined or malformed entity reference");
        append_utf8(out, ref->first);
        i += ref->second;
      } else if (c == '<') {
        fail("'<' not allowed here");
      } else {
        out += c;
      }
    }
    return out;
  }

  std::string parse_attribute_value() {
    char q = peek();
    if (q == '"' || q == '\'') {
      ++pos_;
      auto end = s_.find(q, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      std::string_view raw = s_.substr(pos_, end - pos_);
      std::string value = decode(raw);
      pos_ = end + 1;
      return value;
    }
    if (!options_.lenient_attributes) fail("attribute value must be quoted");
    std::size_t start = pos_;
    while (!at_end() && !is_space(peek()) && peek() != '>' && !starts_with("/>")) ++pos_;
    return decode(s_.substr(start, pos_ - start));
  }

  std::vector<Attribute> parse_attributes() {
    std::vector<Attribute> attrs;
    while (true) {
      bool had_space = !at_end() && is_space(peek());
      skip_space();
      if (options_.lenient_attributes) {
        while (peek() == ',') {
          ++pos_;
          skip_space();
          had_space = true;
        }
      }
      if (at_end()) fail("unterminated start tag");
      if (peek() == '>' || starts_with("/>")) return attrs;
      if (!had_space && !attrs.empty() && !options_.lenient_attributes) fail("missing whitespace between attributes");
      std::string name = parse_name();
      skip_space();
      std::string value;
      if (peek() == '=') {
        ++pos_;
        skip_space();
        value = parse_attribute_value();
      } else if (!options_.lenient_attributes) {
        fail("attribute '" + name + "' has no value");
      }
      for (const auto& a : attrs) {
        if (a.name == name) fail("duplicate attribute '" + name + "'");
      }
      attrs.push_back({std::move(name), std::move(value)});
    }
  }

  void parse_element(Node& parent) {
    expect("<");
    std::string name = parse_name();
    auto attrs = parse_attributes();
    Node& element = parent.append_element(name, std::move(attrs));
    if (starts_with("/>")) {
      pos_ += 2;
      return;
    }
    expect(">");
    parse_content(element);
    expect("</");
    std::string closing = parse_name();
    if (closing != name) fail("mismatched end tag: expected </" + name + "> but found </" + closing + ">");
    skip_space();
    expect(">");
  }

  void parse_content(Node& element) {
    while (true) {
      if (at_end()) fail("unexpected end of document inside <" + element.name() + ">");
      if (starts_with("</")) return;
      if (starts_with("<!--")) {
        pos_ += 4;
        skip_until("-->", "comment");
      } else if (starts_with("<![CDATA[")) {
        pos_ += 9;
        auto end = s_.find("]]>", pos_);
        if (end == std::string_view::npos) fail("unterminated CDATA section");
        element.append_text(s_.substr(pos_, end - pos_));
        pos_ = end + 3;
      } else if (starts_with("<?")) {
        skip_until("?>", "processing instruction");
      } else if (peek() == '<') {
        parse_element(element);
      } else {
        auto end = s_.find('<', pos_);
        if (end == std::string_view::npos) end = s_.size();
        element.append_text(decode(s_.substr(pos_, end - pos_)));
        pos_ = end;
      }
    }
  }

  std::string_view s_;
  const XmlOptions& options_;
  std::size_t pos_ = 0;
};

}  // namespace

Document parse_xml(std::string_view text, const XmlOptions& options) {
  return XmlParser(text, options).parse();
}

// --------------------------------------------------------------------
// HTML lexer

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.size() > hay.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool ok = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (std::tolower(static_cast<unsigned char>(hay[i + j])) != needle[j]) {
        ok = false;
        break;
      }
    }
    if (ok) return i;
  }
  return std::string_view::npos;
}

bool is_tag_name_char(char c) {
  auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '-' || c == '_' || c == ':' || c == '.';
}

}  // namespace

bool is_void_html_element(std::string_view name) {
  static constexpr std::array<std::string_view, 14> voids = {
      "area", "base", "br", "col", "embed", "hr", "img",
      "input", "link", "meta", "param", "source", "track", "wbr"};
  return std::find(voids.begin(), voids.end(), name) != voids.end();
}

void lex_html(std::string_view s, const std::function<void(HtmlEvent&&)>& sink) {
  std::size_t pos = 0;
  std::string pending;
  auto flush_text = [&] {
    if (pending.empty()) return;
    HtmlEvent ev{HtmlEvent::Type::Text, {}, {}, false, decode_entities(pending)};
    pending.clear();
    sink(std::move(ev));
  };

  while (pos < s.size()) {
    char c = s[pos];
    if (c != '<') {
      auto next = s.find('<', pos);
      if (next == std::string_view::npos) next = s.size();
      pending.append(s.substr(pos, next - pos));
      pos = next;
      continue;
    }
    if (s.substr(pos, 4) == "<!--") {
      auto end = s.find("-->", pos + 4);
      pos = end == std::string_view::npos ? s.size() : end + 3;
      continue;
    }
    if (pos + 1 < s.size() && (s[pos + 1] == '!' || s[pos + 1] == '?')) {
      auto end = s.find('>', pos);
      pos = end == std::string_view::npos ? s.size() : end + 1;
      continue;
    }
    bool end_tag = pos + 1 < s.size() && s[pos + 1] == '/';
    std::size_t name_start = pos + (end_tag ? 2 : 1);
    if (name_start >= s.size() || !std::isalpha(static_cast<unsigned char>(s[name_start]))) {
      // Not a tag; '<' is literal text.
      pending += '<';
      ++pos;
      continue;
    }
    std::size_t p = name_start;
    while (p < s.size() && is_tag_name_char(s[p])) ++p;
    HtmlEvent ev{end_tag ? HtmlEvent::Type::EndTag : HtmlEvent::Type::StartTag,
                 lower(s.substr(name_start, p - name_start)), {}, false, {}};

    // Attributes.
    while (p < s.size()) {
      while (p < s.size() && (is_space(s[p]) || s[p] == ',')) ++p;
      if (p >= s.size()) break;
      if (s[p] == '>') {
        ++p;
        break;
      }
      if (s[p] == '/') {
        ++p;
        if (p < s.size() && s[p] == '>') {
          ev.self_closing = true;
          ++p;
          break;
        }
        continue;
      }
      std::size_t an = p;
      while (p < s.size() && !is_space(s[p]) && s[p] != '=' && s[p] != '>' && s[p] != '/') ++p;
      if (p == an) {
        ++p;  // skip junk character
        continue;
      }
      std::string aname = lower(s.substr(an, p - an));
      while (p < s.size() && is_space(s[p])) ++p;
      std::string avalue;
      if (p < s.size() && s[p] == '=') {
        ++p;
        while (p < s.size() && is_space(s[p])) ++p;
        if (p < s.size() && (s[p] == '"' || s[p] == '\'')) {
          char q = s[p++];
          auto end = s.find(q, p);
          if (end == std::string_view::npos) end = s.size();
          avalue = decode_entities(s.substr(p, end - p));
          p = end < s.size() ? end + 1 : end;
        } else {
          std::size_t vs = p;
          while (p < s.size() && !is_space(s[p]) && s[p] != '>') ++p;
          avalue = decode_entities(s.substr(vs, p - vs));
        }
      }
      if (!end_tag) ev.attributes.push_back({std::move(aname), std::move(avalue)});
    }
    pos = p;
    flush_text();
    std::string tag = ev.name;
    bool raw = !end_tag && !ev.self_closing && (tag == "script" || tag == "style");
    sink(std::move(ev));
    if (raw) {
      std::string closing = "</" + tag;
      auto end = find_ci(s, closing, pos);
      if (end == std::string_view::npos) end = s.size();
      if (end > pos) {
        sink(HtmlEvent{HtmlEvent::Type::Text, {}, {}, false, std::string(s.substr(pos, end - pos))});
      }
      pos = end;
    }
  }
  flush_text();
}

// --------------------------------------------------------------------
// HTML tree builder

namespace {

bool in_list(std::string_view name, std::initializer_list<std::string_view> names) {
  return std::find(names.begin(), names.end(), name) != names.end();
}

bool closes_paragraph(std::string_view name) {
  return in_list(name, {"address", "article", "aside", "blockquote", "div", "dl", "fieldset",
                        "footer", "form", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr",
                        "li", "main", "nav", "ol", "p", "pre", "section", "table", "ul"});
}

class HtmlTreeBuilder {
 public:
  explicit HtmlTreeBuilder(Document& doc) { stack_.push_back(&doc.root()); }

  void operator()(HtmlEvent&& ev) {
    switch (ev.type) {
      case HtmlEvent::Type::Text:
        current().append_text(ev.text);
        break;
      case HtmlEvent::Type::StartTag:
        start_tag(std::move(ev));
        break;
      case HtmlEvent::Type::EndTag:
        end_tag(ev.name);
        break;
    }
  }

 private:
  Node& current() { return *stack_.back(); }

  // Index of the nearest open element named `name`, searching down from the
  // top of the stack but not past any of the `boundaries`. 0 means not found.
  std::size_t find_open(std::initializer_list<std::string_view> names,
                        std::initializer_list<std::string_view> boundaries) const {
    for (std::size_t i = stack_.size() - 1; i > 0; --i) {
      const auto& n = stack_[i]->name();
      if (in_list(n, names)) return i;
      if (in_list(n, boundaries)) return 0;
    }
    return 0;
  }

  void pop_to(std::size_t index) {
    if (index > 0) stack_.resize(index);
  }

  void start_tag(HtmlEvent&& ev) {
    const std::string& t = ev.name;
    if (t == "li") {
      pop_to(find_open({"li"}, {"ul", "ol", "table"}));
    } else if (t == "dt" || t == "dd") {
      pop_to(find_open({"dt", "dd"}, {"dl", "table"}));
    } else if (t == "td" || t == "th") {
      pop_to(find_open({"td", "th"}, {"tr", "table"}));
    } else if (t == "tr") {
      pop_to(find_open({"tr"}, {"table"}));
    } else if (t == "thead" || t == "tbody" || t == "tfoot") {
      pop_to(find_open({"thead", "tbody", "tfoot"}, {"table"}));
    } else if (t == "option") {
      pop_to(find_open({"option"}, {"select"}));
    }
    if (closes_paragraph(t)) {
      pop_to(find_open({"p"}, {"div", "td", "th", "li", "table", "body", "blockquote"}));
    }
    Node& el = current().append_element(t, std::move(ev.attributes));
    if (!ev.self_closing && !is_void_html_element(t)) stack_.push_back(&el);
  }

  void end_tag(const std::string& name) {
    for (std::size_t i = stack_.size() - 1; i > 0; --i) {
      if (stack_[i]->name() == name) {
        stack_.resize(i);
        return;
      }
    }
    // Stray end tag: ignored.
  }

  std::vector<Node*> stack_;
};

}  // namespace

Document parse_html(std::string_view text) {
  Document doc;
  HtmlTreeBuilder builder(doc);
  lex_html(text, [&](HtmlEvent&& ev) { builder(std::move(ev)); });
  return doc;
}

}  // namespace wexfab::dom
