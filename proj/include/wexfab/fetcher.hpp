#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "wexfab/item.hpp"

namespace wexfab {

/// Source of HTTP responses. Implementations return nullopt on transport
/// failure or a missing recording; status codes are passed through.
class Fetcher {
 public:
  virtual ~Fetcher() = default;
  virtual std::optional<HttpResponse> perform(const HttpRequest& request) const = 0;
};

class FixtureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Recorded HTTP exchanges for offline replay.
///
/// Layout: `<root>/index.json` maps "METHOD url" to
/// `{"status": int, "headers": [[name, value], ...], "body": "relative/path"}`.
/// `body` may be omitted for empty bodies. Keys are normalized on load, so
/// lookups are exact on (method, normalized URL).
class FixtureStore : public Fetcher {
 public:
  struct Entry {
    int status = 200;
    Headers headers;
    std::optional<std::filesystem::path> body_file;
  };

  static FixtureStore load(const std::filesystem::path& root);

  std::optional<HttpResponse> perform(const HttpRequest& request) const override;

  const std::filesystem::path& root() const { return root_; }
  std::size_t size() const { return index_.size(); }
  /// Normalized URLs recorded for `method`, in key order.
  std::vector<std::string> urls(Method method) const;

 private:
  std::filesystem::path root_;
  std::map<std::string, Entry> index_;
};

/// Plain-HTTP fetcher for live mode with a minimum interval between requests.
class LiveFetcher : public Fetcher {
 public:
  explicit LiveFetcher(std::chrono::milliseconds min_interval = std::chrono::milliseconds(500),
                       std::chrono::seconds timeout = std::chrono::seconds(10))
      : min_interval_(min_interval), timeout_(timeout) {}

  std::optional<HttpResponse> perform(const HttpRequest& request) const override;

 private:
  std::chrono::milliseconds min_interval_;
  std::chrono::seconds timeout_;
  mutable std::chrono::steady_clock::time_point last_{};
};

std::string fixture_key(Method method, std::string_view normalized_url);

}  // namespace wexfab
