#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace wexfab::dom {

struct Attribute {
  std::string name;
  std::string value;

  bool operator==(const Attribute&) const = default;
};

class Node {
 public:
  enum class Kind { Document, Element, Text };

  explicit Node(Kind kind, std::string name = {}) : kind_(kind), name_(std::move(name)) {}

  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  Kind kind() const { return kind_; }
  bool is_element() const { return kind_ == Kind::Element; }
  bool is_text() const { return kind_ == Kind::Text; }

  /// Qualified name as written (element nodes only).
  const std::string& name() const { return name_; }
  /// Name with any namespace prefix removed.
  std::string_view local_name() const;

  const std::string& text() const { return text_; }
  const std::vector<Attribute>& attributes() const { return attributes_; }
  const Attribute* find_attribute(std::string_view name) const;
  const std::vector<std::unique_ptr<Node>>& children() const { return children_; }
  const Node* parent() const { return parent_; }

  /// Element children, in order.
  std::vector<const Node*> elements() const;
  /// Concatenation of all descendant text, in document order.
  std::string text_content() const;

  Node& append_element(std::string name, std::vector<Attribute> attributes);
  void append_text(std::string_view text);

 private:
  Kind kind_;
  std::string name_;
  std::string text_;
  std::vector<Attribute> attributes_;
  std::vector<std::unique_ptr<Node>> children_;
  Node* parent_ = nullptr;
};

class Document {
 public:
  Document() : root_(std::make_unique<Node>(Node::Kind::Document)) {}

  const Node& root() const { return *root_; }
  Node& root() { return *root_; }
  /// First element child of the document node, if any.
  const Node* document_element() const;

 private:
  std::unique_ptr<Node> root_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column);

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

struct XmlOptions {
  // Accept bare attribute names, unquoted values and stray commas between
  // attributes. Needed for hand-written policy documents.
  bool lenient_attributes = false;
};

/// Strict XML parse. Throws ParseError on any well-formedness violation.
Document parse_xml(std::string_view text, const XmlOptions& options = {});

/// Permissive HTML parse: never fails. Unclosed elements are closed
/// implicitly, stray end tags are dropped, tag names are lowercased.
Document parse_html(std::string_view text);

// Low-level HTML lexer shared by the tree builder and the ierel tokenizer.
struct HtmlEvent {
  enum class Type { StartTag, EndTag, Text };
  Type type;
  std::string name;  // lowercased tag name
  std::vector<Attribute> attributes;
  bool self_closing = false;
  std::string text;  // entity-decoded text for Type::Text
};

/// Streams tag and text events. Comments, doctypes and processing
/// instructions are skipped; script/style bodies arrive as one raw Text event.
void lex_html(std::string_view text, const std::function<void(HtmlEvent&&)>& sink);

bool is_void_html_element(std::string_view name);

/// Decodes character references. Unknown named references are kept verbatim.
std::string decode_entities(std::string_view text);
void append_utf8(std::string& out, char32_t code_point);

std::string escape_text(std::string_view text);
std::string escape_attribute(std::string_view text);

}  // namespace wexfab::dom
