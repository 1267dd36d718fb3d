#include "wexfab/url.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

namespace wexfab {

namespace {

std::string lowered(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

int default_port(std::string_view scheme) {
  if (scheme == "http") return 80;
  if (scheme == "https") return 443;
  if (scheme == "ftp") return 21;
  return -1;
}

}  // namespace

std::optional<Url> Url::parse(std::string_view text) {
  auto colon = text.find("://");
  if (colon == std::string_view::npos || colon == 0) return std::nullopt;
  std::string_view scheme = text.substr(0, colon);
  if (!std::isalpha(static_cast<unsigned char>(scheme[0]))) return std::nullopt;
  for (char c : scheme) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.') {
      return std::nullopt;
    }
  }
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) return std::nullopt;
  }

  Url url;
  url.scheme = lowered(scheme);
  std::string_view rest = text.substr(colon + 3);

  if (auto hash = rest.find('#'); hash != std::string_view::npos) {
    url.fragment = std::string(rest.substr(hash + 1));
    rest = rest.substr(0, hash);
  }
  if (auto q = rest.find('?'); q != std::string_view::npos) {
    url.query = std::string(rest.substr(q + 1));
    rest = rest.substr(0, q);
  }
  auto slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  url.path = slash == std::string_view::npos ? "" : std::string(rest.substr(slash));

  if (auto at = authority.rfind('@'); at != std::string_view::npos) {
    url.userinfo = std::string(authority.substr(0, at));
    authority = authority.substr(at + 1);
  }
  std::string_view host = authority;
  if (auto pc = authority.rfind(':'); pc != std::string_view::npos && authority.find(']') == std::string_view::npos) {
    std::string_view port = authority.substr(pc + 1);
    host = authority.substr(0, pc);
    if (!port.empty()) {
      int value = 0;
      auto r = std::from_chars(port.data(), port.data() + port.size(), value);
      if (r.ec != std::errc{} || r.ptr != port.data() + port.size() || value <= 0 || value > 65535) {
        return std::nullopt;
      }
      url.port = value;
    }
  }
  if (host.empty()) return std::nullopt;
  url.host = std::string(host);
  return url;
}

std::string Url::str() const {
  std::string out = scheme + "://";
  if (!userinfo.empty()) out += userinfo + "@";
  out += host;
  if (port >= 0) out += ":" + std::to_string(port);
  out += path;
  if (query) out += "?" + *query;
  if (fragment) out += "#" + *fragment;
  return out;
}

bool is_absolute_url(std::string_view text) { return Url::parse(text).has_value(); }

std::optional<std::string> normalize_url(std::string_view text) {
  auto url = Url::parse(text);
  if (!url) return std::nullopt;
  url->host = lowered(url->host);
  if (url->port == default_port(url->scheme)) url->port = -1;
  if (url->path.empty()) url->path = "/";
  url->fragment.reset();
  return url->str();
}

std::string form_encode(std::string_view text) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  out.reserve(text.size() * 3);
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else if (c == ' ') {
      out += '+';
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 0x0F];
    }
  }
  return out;
}

std::string form_encode(const KeyValues& pairs) {
  std::string out;
  for (const auto& [k, v] : pairs) {
    if (!out.empty()) out += '&';
    out += form_encode(k);
    out += '=';
    out += form_encode(v);
  }
  return out;
}

}  // namespace wexfab
