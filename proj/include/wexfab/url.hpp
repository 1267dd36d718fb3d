#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wexfab {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

/// Absolute http-style URL split into its components.
struct Url {
  std::string scheme;  // lowercased
  std::string userinfo;
  std::string host;
  int port = -1;  // -1 when absent
  std::string path;
  std::optional<std::string> query;
  std::optional<std::string> fragment;

  /// Parses `scheme://authority[path][?query][#fragment]`; nullopt for
  /// relative or malformed input.
  static std::optional<Url> parse(std::string_view text);

  std::string str() const;
};

bool is_absolute_url(std::string_view text);

/// Fixture-key normalization: lowercase scheme and host, default ports
/// dropped, empty path becomes "/", fragment dropped, query kept verbatim.
std::optional<std::string> normalize_url(std::string_view text);

/// application/x-www-form-urlencoded encoding of one component.
std::string form_encode(std::string_view text);
std::string form_encode(const KeyValues& pairs);

}  // namespace wexfab
