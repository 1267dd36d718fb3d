#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"
#include "wexfab/dom.hpp"
#include "wexfab/url.hpp"

namespace wexfab {

using Json = nlohmann::ordered_json;

enum class Method { Get, Post, Head };

std::string_view method_name(Method m);
std::optional<Method> parse_method(std::string_view name);

using Headers = std::vector<std::pair<std::string, std::string>>;

/// Case-insensitive header lookup; first match wins.
const std::string* find_header(const Headers& headers, std::string_view name);

struct TextValue {
  std::string text;
  bool operator==(const TextValue&) const = default;
};

struct UrlValue {
  std::string url;
  bool operator==(const UrlValue&) const = default;
};

struct HttpRequest {
  Method method = Method::Get;
  std::string url;
  Headers headers;
  std::string body;
  bool operator==(const HttpRequest&) const = default;
};

struct HttpResponse {
  int status = 200;  // [100, 599]
  std::string url;   // URL the response was obtained from
  Headers headers;
  std::string body;
  bool operator==(const HttpResponse&) const = default;
};

/// Handle on a node of a shared, immutable document tree.
struct DocumentRef {
  std::shared_ptr<const dom::Document> document;
  const dom::Node* node = nullptr;

  const dom::Node& context() const { return node ? *node : document->root(); }
  bool operator==(const DocumentRef& o) const { return document == o.document && node == o.node; }
};

/// Ordered field map with unique names.
class Record {
 public:
  Record() = default;
  Record(std::initializer_list<std::pair<std::string, std::string>> fields);

  /// Overwrites an existing field in place, or appends.
  void set(std::string name, std::string value);
  const std::string* get(std::string_view name) const;
  bool has(std::string_view name) const { return get(name) != nullptr; }

  const std::vector<std::pair<std::string, std::string>>& fields() const { return fields_; }
  std::size_t size() const { return fields_.size(); }
  bool empty() const { return fields_.empty(); }

  Json to_json() const;
  static Record from_json(const Json& j);

  bool operator==(const Record&) const = default;

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

using Payload = std::variant<TextValue, UrlValue, HttpRequest, HttpResponse, DocumentRef, Record>;

struct Item {
  Payload payload;
  std::string provenance;  // name of the originating operator

  bool operator==(const Item&) const = default;
};

Item make_text(std::string text, std::string provenance = {});
Item make_url(std::string url, std::string provenance = {});
Item make_record(Record record, std::string provenance = {});

/// "text", "url", "request", "response", "document" or "record".
std::string_view payload_kind(const Item& item);

/// Textual view of the payload: text, URL, body, or document text content.
/// Records and requests have none.
std::optional<std::string> textual_content(const Item& item);

Json to_json(const Item& item);

}  // namespace wexfab
