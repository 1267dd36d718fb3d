#include "wexfab/fetcher.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include "httplib.h"

namespace wexfab {

namespace fs = std::filesystem;

std::string fixture_key(Method method, std::string_view normalized_url) {
  return std::string(method_name(method)) + " " + std::string(normalized_url);
}

static std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FixtureError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FixtureStore FixtureStore::load(const fs::path& root) {
  FixtureStore store;
  store.root_ = root;
  fs::path index_path = root / "index.json";
  Json index;
  try {
    index = Json::parse(read_file(index_path));
  } catch (const Json::exception& e) {
    throw FixtureError("invalid " + index_path.string() + ": " + e.what());
  }
  if (!index.is_object()) throw FixtureError(index_path.string() + " must hold a JSON object");

  for (const auto& [key, value] : index.items()) {
    auto space = key.find(' ');
    auto method = space == std::string::npos ? std::nullopt : parse_method(key.substr(0, space));
    auto url = method ? normalize_url(key.substr(space + 1)) : std::nullopt;
    if (!url) throw FixtureError("bad fixture key '" + key + "'");
    Entry entry;
    entry.status = value.value("status", 200);
    if (entry.status < 100 || entry.status > 599) throw FixtureError("bad status for '" + key + "'");
    for (const auto& h : value.value("headers", Json::array())) {
      entry.headers.emplace_back(h.at(0).get<std::string>(), h.at(1).get<std::string>());
    }
    if (value.contains("body") && value["body"].is_string()) {
      entry.body_file = root / value["body"].get<std::string>();
    }
    store.index_[fixture_key(*method, *url)] = std::move(entry);
  }
  return store;
}

std::optional<HttpResponse> FixtureStore::perform(const HttpRequest& request) const {
  auto url = normalize_url(request.url);
  if (!url) return std::nullopt;
  auto it = index_.find(fixture_key(request.method, *url));
  if (it == index_.end()) return std::nullopt;
  HttpResponse response;
  response.status = it->second.status;
  response.url = request.url;
  response.headers = it->second.headers;
  if (it->second.body_file) {
    try {
      response.body = read_file(*it->second.body_file);
    } catch (const FixtureError&) {
      return std::nullopt;
    }
  }
  return response;
}

std::vector<std::string> FixtureStore::urls(Method method) const {
  std::string prefix = std::string(method_name(method)) + " ";
  std::vector<std::string> out;
  for (const auto& [key, entry] : index_) {
    if (key.rfind(prefix, 0) == 0) out.push_back(key.substr(prefix.size()));
  }
  return out;
}

std::optional<HttpResponse> LiveFetcher::perform(const HttpRequest& request) const {
  auto url = Url::parse(request.url);
  if (!url || url->scheme != "http") return std::nullopt;

  auto now = std::chrono::steady_clock::now();
  if (last_.time_since_epoch().count() != 0 && now - last_ < min_interval_) {
    std::this_thread::sleep_for(min_interval_ - (now - last_));
  }
  last_ = std::chrono::steady_clock::now();

  httplib::Client client(url->host, url->port > 0 ? url->port : 80);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_follow_location(true);

  std::string target = url->path.empty() ? "/" : url->path;
  if (url->query) target += "?" + *url->query;
  httplib::Headers headers;
  for (const auto& [k, v] : request.headers) headers.emplace(k, v);

  httplib::Result result;
  switch (request.method) {
    case Method::Get: result = client.Get(target, headers); break;
    case Method::Head: result = client.Head(target, headers); break;
    case Method::Post: {
      const std::string* ct = find_header(request.headers, "content-type");
      result = client.Post(target, headers, request.body,
                           ct ? *ct : std::string("application/x-www-form-urlencoded"));
      break;
    }
  }
  if (!result) return std::nullopt;

  HttpResponse response;
  response.status = result->status;
  response.url = request.url;
  for (const auto& [k, v] : result->headers) response.headers.emplace_back(k, v);
  response.body = result->body;
  return response;
}

}  // namespace wexfab
