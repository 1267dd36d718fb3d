#pragma once

// Independent reference implementations used as test oracles.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wexfab/ierel.hpp"

namespace oracle {

inline std::string read(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::filesystem::path data_dir() { return WEXFAB_DATA_DIR; }
inline std::filesystem::path tests_dir() { return WEXFAB_TESTS_DIR; }

/// RFC 3986 unreserved characters pass through, space becomes '+', every
/// other byte is percent-encoded in upper-case hex.
inline std::string form_encode(const std::string& s) {
  static const std::string unreserved =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-._~";
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (c == ' ') {
      out += '+';
    } else if (unreserved.find(static_cast<char>(c)) != std::string::npos) {
      out += static_cast<char>(c);
    } else {
      out += '%';
      out += hex[c >> 4];
      out += hex[c & 15];
    }
  }
  return out;
}

/// Forward reachability over token positions: the set of end positions a
/// pattern can reach from `start`, under plain (hard separator) semantics.
inline std::set<std::size_t> reachable(const wexfab::ierel::Pattern& p,
                                       const std::vector<wexfab::ierel::Token>& t, std::size_t start) {
  using K = wexfab::ierel::PatternToken::Kind;
  std::vector<std::string> literal;
  for (const auto& pt : p.tokens) {
    if (pt.kind == K::Word) literal.push_back(pt.text);
  }
  auto is_literal = [&](const std::string& w) { return std::find(literal.begin(), literal.end(), w) != literal.end(); };
  std::set<std::size_t> cur{start};
  for (const auto& pt : p.tokens) {
    std::set<std::size_t> next;
    for (std::size_t pos : cur) {
      switch (pt.kind) {
        case K::TagOpen:
        case K::TagClose:
        case K::Word: {
          if (pos >= t.size()) break;
          bool kind_ok = (pt.kind == K::TagOpen && t[pos].kind == wexfab::ierel::Token::Kind::TagOpen) ||
                         (pt.kind == K::TagClose && t[pos].kind == wexfab::ierel::Token::Kind::TagClose) ||
                         (pt.kind == K::Word && t[pos].kind == wexfab::ierel::Token::Kind::Word);
          if (kind_ok && t[pos].text == pt.text) next.insert(pos + 1);
          break;
        }
        case K::Slot:
          for (std::size_t len = 1; len <= pt.max && pos + len <= t.size(); ++len) {
            const auto& w = t[pos + len - 1];
            if (w.is_tag() || is_literal(w.text)) break;
            next.insert(pos + len);
          }
          break;
        case K::Gap:
          for (std::size_t len = 0; len <= pt.max && pos + len <= t.size(); ++len) {
            if (len > 0 && t[pos + len - 1].is_tag()) break;
            if (len >= pt.min) next.insert(pos + len);
          }
          break;
      }
    }
    cur = std::move(next);
    if (cur.empty()) break;
  }
  return cur;
}

inline bool matches_whole(const wexfab::ierel::Pattern& p, const std::vector<wexfab::ierel::Token>& t) {
  return reachable(p, t, 0).count(t.size()) > 0;
}

struct Placement {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::size_t begin() const { return ranges.front().first; }
  std::size_t end() const { return ranges.back().second; }
};

/// Every in-order, non-overlapping placement of the non-empty fields.
inline std::vector<Placement> all_placements(const std::vector<wexfab::ierel::Token>& tokens,
                                             const std::vector<std::vector<std::string>>& fields, std::size_t window) {
  std::vector<Placement> out;
  Placement cur;
  auto fits = [&](std::size_t f, std::size_t pos) {
    if (pos + fields[f].size() > tokens.size()) return false;
    for (std::size_t k = 0; k < fields[f].size(); ++k) {
      if (tokens[pos + k].is_tag() || tokens[pos + k].text != fields[f][k]) return false;
    }
    return true;
  };
  auto rec = [&](auto&& self, std::size_t f, std::size_t from) -> void {
    if (f == fields.size()) {
      if (cur.end() - cur.begin() <= window) out.push_back(cur);
      return;
    }
    for (std::size_t pos = from; pos < tokens.size(); ++pos) {
      if (!fits(f, pos)) continue;
      cur.ranges.emplace_back(pos, pos + fields[f].size());
      self(self, f + 1, pos + fields[f].size());
      cur.ranges.pop_back();
    }
  };
  rec(rec, 0, 0);
  return out;
}

/// Minimal placements (no other placement's span strictly inside), then
/// leftmost non-overlapping selection. Intervals only.
inline std::vector<std::pair<std::size_t, std::size_t>> minimal_spans(const std::vector<Placement>& all) {
  std::set<std::pair<std::size_t, std::size_t>> spans;
  for (const auto& p : all) spans.emplace(p.begin(), p.end());
  std::vector<std::pair<std::size_t, std::size_t>> minimal;
  for (const auto& s : spans) {
    bool contains_other = false;
    for (const auto& o : spans) {
      if (o != s && o.first >= s.first && o.second <= s.second) contains_other = true;
    }
    if (!contains_other) minimal.push_back(s);
  }
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& s : minimal) {
    if (out.empty() || s.first >= out.back().second) out.push_back(s);
  }
  return out;
}

/// Conference line "ACR YEAR: City[, Province], Country" split by hand.
struct ConferenceLine {
  std::string acronyme, year, city, country;
  std::optional<std::string> province;
};

inline std::optional<ConferenceLine> split_conference(std::string line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == ' ' || line.back() == '\r')) line.pop_back();
  auto sp = line.find(' ');
  if (sp == std::string::npos) return std::nullopt;
  ConferenceLine c;
  c.acronyme = line.substr(0, sp);
  if (c.acronyme.empty() || c.acronyme[0] < 'A' || c.acronyme[0] > 'Z') return std::nullopt;
  if (line.size() < sp + 7 || line[sp + 5] != ':' || line[sp + 6] != ' ') return std::nullopt;
  c.year = line.substr(sp + 1, 4);
  if (!std::all_of(c.year.begin(), c.year.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) return std::nullopt;
  std::string rest = line.substr(sp + 7);
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto comma = rest.find(", ", start);
    if (comma == std::string::npos) {
      parts.push_back(rest.substr(start));
      break;
    }
    parts.push_back(rest.substr(start, comma - start));
    start = comma + 2;
  }
  if (parts.size() == 2) {
    c.city = parts[0];
    c.country = parts[1];
  } else if (parts.size() == 3) {
    c.city = parts[0];
    c.province = parts[1];
    c.country = parts[2];
  } else {
    return std::nullopt;
  }
  for (const auto& p : parts) {
    if (p.empty()) return std::nullopt;
  }
  return c;
}

// Result URLs scanned from the raw XML body, and the HEAD fixture headers for
// each, keyed by a hand-normalized URL.
struct GoogleTruth {
  std::vector<std::string> urls;
  std::vector<std::map<std::string, std::string>> fixtured;  // lowercased header -> value, url
};

inline GoogleTruth google_truth() {
  GoogleTruth t;
  std::string xml = oracle::read(oracle::data_dir() / "fixtures/google/bodies/search.xml");
  std::size_t pos = 0;
  while ((pos = xml.find("<URL>", pos)) != std::string::npos) {
    auto end = xml.find("</URL>", pos);
    t.urls.push_back(xml.substr(pos + 5, end - pos - 5));
    pos = end;
  }
  auto index = nlohmann::json::parse(oracle::read(oracle::data_dir() / "fixtures/google/index.json"));
  for (const auto& url : t.urls) {
    std::string key = url;
    auto port = key.find(":80/");
    if (port != std::string::npos) key.erase(port, 3);
    auto it = index.find("HEAD " + key);
    if (it == index.end()) continue;
    std::map<std::string, std::string> fields{{"url", url}};
    for (const auto& h : (*it)["headers"]) {
      std::string name = h[0];
      std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
      fields[name] = h[1];
    }
    t.fixtured.push_back(fields);
  }
  return t;
}

}  // namespace oracle
