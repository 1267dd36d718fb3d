#include "wexfab/item.hpp"

#include <algorithm>
#include <cctype>

namespace wexfab {

std::string_view method_name(Method m) {
  switch (m) {
    case Method::Get: return "GET";
    case Method::Post: return "POST";
    case Method::Head: return "HEAD";
  }
  return "GET";
}

std::optional<Method> parse_method(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (up == "GET") return Method::Get;
  if (up == "POST") return Method::Post;
  if (up == "HEAD") return Method::Head;
  return std::nullopt;
}

static bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

const std::string* find_header(const Headers& headers, std::string_view name) {
  for (const auto& [k, v] : headers) {
    if (iequals(k, name)) return &v;
  }
  return nullptr;
}

Record::Record(std::initializer_list<std::pair<std::string, std::string>> fields) {
  for (const auto& [k, v] : fields) set(k, v);
}

void Record::set(std::string name, std::string value) {
  for (auto& [k, v] : fields_) {
    if (k == name) {
      v = std::move(value);
      return;
    }
  }
  fields_.emplace_back(std::move(name), std::move(value));
}

const std::string* Record::get(std::string_view name) const {
  for (const auto& [k, v] : fields_) {
    if (k == name) return &v;
  }
  return nullptr;
}

Json Record::to_json() const {
  Json j = Json::object();
  for (const auto& [k, v] : fields_) j[k] = v;
  return j;
}

Record Record::from_json(const Json& j) {
  Record r;
  for (const auto& [k, v] : j.items()) {
    r.set(k, v.is_string() ? v.get<std::string>() : v.dump());
  }
  return r;
}

Item make_text(std::string text, std::string provenance) {
  return Item{TextValue{std::move(text)}, std::move(provenance)};
}

Item make_url(std::string url, std::string provenance) {
  return Item{UrlValue{std::move(url)}, std::move(provenance)};
}

Item make_record(Record record, std::string provenance) {
  return Item{std::move(record), std::move(provenance)};
}

std::string_view payload_kind(const Item& item) {
  struct {
    std::string_view operator()(const TextValue&) const { return "text"; }
    std::string_view operator()(const UrlValue&) const { return "url"; }
    std::string_view operator()(const HttpRequest&) const { return "request"; }
    std::string_view operator()(const HttpResponse&) const { return "response"; }
    std::string_view operator()(const DocumentRef&) const { return "document"; }
    std::string_view operator()(const Record&) const { return "record"; }
  } visitor;
  return std::visit(visitor, item.payload);
}

std::optional<std::string> textual_content(const Item& item) {
  if (auto* t = std::get_if<TextValue>(&item.payload)) return t->text;
  if (auto* u = std::get_if<UrlValue>(&item.payload)) return u->url;
  if (auto* r = std::get_if<HttpResponse>(&item.payload)) return r->body;
  if (auto* d = std::get_if<DocumentRef>(&item.payload)) return d->context().text_content();
  return std::nullopt;
}

static Json headers_json(const Headers& headers) {
  Json arr = Json::array();
  for (const auto& [k, v] : headers) arr.push_back(Json::array({k, v}));
  return arr;
}

Json to_json(const Item& item) {
  Json j = Json::object();
  j["kind"] = payload_kind(item);
  j["from"] = item.provenance;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, TextValue>) {
          j["text"] = p.text;
        } else if constexpr (std::is_same_v<T, UrlValue>) {
          j["url"] = p.url;
        } else if constexpr (std::is_same_v<T, HttpRequest>) {
          j["method"] = method_name(p.method);
          j["url"] = p.url;
          j["headers"] = headers_json(p.headers);
          j["body"] = p.body;
        } else if constexpr (std::is_same_v<T, HttpResponse>) {
          j["status"] = p.status;
          j["url"] = p.url;
          j["headers"] = headers_json(p.headers);
          j["body"] = p.body;
        } else if constexpr (std::is_same_v<T, DocumentRef>) {
          const auto& ctx = p.context();
          const dom::Node* el = ctx.is_element() ? &ctx : p.document->document_element();
          j["root"] = el ? el->name() : "";
          j["text"] = ctx.text_content();
        } else if constexpr (std::is_same_v<T, Record>) {
          j["fields"] = p.to_json();
        }
      },
      item.payload);
  return j;
}

}  // namespace wexfab
