#include "wexfab/ierel.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <queue>
#include <set>
#include <unordered_set>

#include "wexfab/dom.hpp"

namespace wexfab::ierel {

// --------------------------------------------------------------------
// Tokenization

std::string to_string(const Token& token) {
  switch (token.kind) {
    case Token::Kind::TagOpen: return "<" + token.text + ">";
    case Token::Kind::TagClose: return "</" + token.text + ">";
    case Token::Kind::Word: return token.text;
  }
  return token.text;
}

namespace {

void split_words(std::string_view text, std::vector<Token>& out) {
  bool space = true;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    out.push_back({Token::Kind::Word, std::move(word), 0, space});
    word.clear();
    space = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    auto c = static_cast<unsigned char>(text[i]);
    bool nbsp = c == 0xC2 && i + 1 < text.size() && static_cast<unsigned char>(text[i + 1]) == 0xA0;
    if (std::isspace(c) || nbsp) {
      flush();
      space = true;
      if (nbsp) ++i;
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.push_back({Token::Kind::Word, std::string(1, static_cast<char>(c)), 0, space});
      space = false;
    } else {
      word += static_cast<char>(c);
    }
  }
  flush();
}

void number(std::vector<Token>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i].position = i;
}

}  // namespace

std::vector<Token> preprocess(std::string_view document) {
  std::vector<Token> out;
  std::string skipping;
  dom::lex_html(document, [&](dom::HtmlEvent&& ev) {
    using Type = dom::HtmlEvent::Type;
    if (!skipping.empty()) {
      if (ev.type == Type::EndTag && ev.name == skipping) skipping.clear();
      return;
    }
    switch (ev.type) {
      case Type::StartTag:
        if (ev.name == "script" || ev.name == "style") {
          if (!ev.self_closing) skipping = ev.name;
          return;
        }
        out.push_back({Token::Kind::TagOpen, ev.name, 0, true});
        break;
      case Type::EndTag:
        if (ev.name == "script" || ev.name == "style") return;
        out.push_back({Token::Kind::TagClose, ev.name, 0, true});
        break;
      case Type::Text:
        split_words(ev.text, out);
        break;
    }
  });
  number(out);
  return out;
}

std::vector<Token> tokenize_words(std::string_view text) {
  std::vector<Token> out;
  split_words(text, out);
  number(out);
  return out;
}

ExampleInstance ExampleInstance::from_json(const Json& j) {
  ExampleInstance ex;
  for (const auto& [k, v] : j.items()) {
    ex.fields.emplace_back(k, v.is_string() ? v.get<std::string>() : v.dump());
  }
  return ex;
}

// --------------------------------------------------------------------
// Occurrences

std::vector<Occurrence> locate_instance(std::span<const Token> tokens, const ExampleInstance& instance,
                                        std::size_t window) {
  struct FieldWords {
    std::size_t field;
    std::vector<std::string> words;
  };
  std::vector<FieldWords> fields;
  for (std::size_t i = 0; i < instance.fields.size(); ++i) {
    auto words = tokenize_words(instance.fields[i].second);
    if (words.empty()) continue;
    FieldWords fw{i, {}};
    for (auto& w : words) fw.words.push_back(std::move(w.text));
    fields.push_back(std::move(fw));
  }
  if (fields.empty()) return {};

  const std::size_t n = tokens.size();
  auto matches_at = [&](const FieldWords& f, std::size_t pos) {
    if (pos + f.words.size() > n) return false;
    for (std::size_t k = 0; k < f.words.size(); ++k) {
      const Token& t = tokens[pos + k];
      if (t.kind != Token::Kind::Word || t.text != f.words[k]) return false;
    }
    return true;
  };

  // For each placement of the first field, the earliest completion is the
  // tightest occurrence starting there.
  std::vector<Occurrence> candidates;
  for (std::size_t s = 0; s < n; ++s) {
    if (!matches_at(fields[0], s)) continue;
    Occurrence occ;
    occ.matches.push_back({fields[0].field, s, s + fields[0].words.size()});
    bool complete = true;
    for (std::size_t f = 1; f < fields.size() && complete; ++f) {
      complete = false;
      for (std::size_t p = occ.end(); p + fields[f].words.size() <= n; ++p) {
        if (p + fields[f].words.size() - s > window) break;
        if (matches_at(fields[f], p)) {
          occ.matches.push_back({fields[f].field, p, p + fields[f].words.size()});
          complete = true;
          break;
        }
      }
    }
    if (complete && occ.span() <= window) candidates.push_back(std::move(occ));
  }

  // Drop candidates that contain a tighter one.
  std::vector<Occurrence> minimal;
  std::size_t best_end = SIZE_MAX;
  for (auto it = candidates.rbegin(); it != candidates.rend(); ++it) {
    if (it->end() < best_end) {
      minimal.push_back(*it);
      best_end = it->end();
    }
  }
  std::reverse(minimal.begin(), minimal.end());

  std::vector<Occurrence> out;
  std::size_t last_end = 0;
  for (auto& occ : minimal) {
    if (!out.empty() && occ.begin() < last_end) continue;
    last_end = occ.end();
    out.push_back(std::move(occ));
  }
  return out;
}

// --------------------------------------------------------------------
// Patterns

PatternToken PatternToken::from(const Token& t) {
  switch (t.kind) {
    case Token::Kind::TagOpen: return open(t.text);
    case Token::Kind::TagClose: return close(t.text);
    case Token::Kind::Word: return word(t.text);
  }
  return word(t.text);
}

std::vector<PatternToken> Pattern::tag_skeleton() const {
  std::vector<PatternToken> out;
  for (const auto& t : tokens) {
    if (t.is_tag()) out.push_back(t);
  }
  return out;
}

std::vector<PatternToken> Pattern::anchor_skeleton() const {
  std::vector<PatternToken> out;
  for (const auto& t : tokens) {
    if (t.is_anchor()) out.push_back(t);
  }
  return out;
}

std::vector<std::string> Pattern::separators() const {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    if (t.kind == PatternToken::Kind::Word && std::find(out.begin(), out.end(), t.text) == out.end()) {
      out.push_back(t.text);
    }
  }
  return out;
}

Json Pattern::to_json() const {
  Json arr = Json::array();
  for (const auto& t : tokens) {
    switch (t.kind) {
      case PatternToken::Kind::TagOpen: arr.push_back(Json::array({"open", t.text})); break;
      case PatternToken::Kind::TagClose: arr.push_back(Json::array({"close", t.text})); break;
      case PatternToken::Kind::Word: arr.push_back(Json::array({"word", t.text})); break;
      case PatternToken::Kind::Slot: arr.push_back(Json::array({"slot", t.field, t.max})); break;
      case PatternToken::Kind::Gap: {
        Json g = Json::array({"gap", t.min, t.max});
        if (!t.words.empty()) g.push_back(t.words);
        arr.push_back(std::move(g));
        break;
      }
    }
  }
  return arr;
}

Pattern Pattern::from_json(const Json& j) {
  Pattern p;
  for (const auto& t : j) {
    const auto tag = t.at(0).get<std::string>();
    if (tag == "open") {
      p.tokens.push_back(PatternToken::open(t.at(1).get<std::string>()));
    } else if (tag == "close") {
      p.tokens.push_back(PatternToken::close(t.at(1).get<std::string>()));
    } else if (tag == "word") {
      p.tokens.push_back(PatternToken::word(t.at(1).get<std::string>()));
    } else if (tag == "slot") {
      p.tokens.push_back(PatternToken::slot(t.at(1).get<std::size_t>(), t.at(2).get<std::size_t>()));
    } else if (tag == "gap") {
      auto lo = t.at(1).get<std::size_t>(), hi = t.at(2).get<std::size_t>();
      if (lo > hi) throw std::invalid_argument("gap with min > max");
      std::vector<std::string> words;
      if (t.size() > 3) words = t.at(3).get<std::vector<std::string>>();
      p.tokens.push_back(PatternToken::gap(lo, hi, std::move(words)));
    } else {
      throw std::invalid_argument("unknown pattern token '" + tag + "'");
    }
  }
  return p;
}

std::vector<std::string> Pattern::soft_separators() const {
  std::vector<std::string> out = separators();
  for (const auto& t : tokens) {
    for (const auto& w : t.words) {
      if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(w);
    }
  }
  return out;
}

std::string Pattern::canonical() const { return to_json().dump(); }

// --------------------------------------------------------------------
// Matching

namespace {

class Matcher {
 public:
  Matcher(const Pattern& pattern, std::span<const Token> tokens, std::optional<std::size_t> must_end)
      : p_(pattern), t_(tokens), must_end_(must_end), hard_(pattern.separators()), soft_(pattern.soft_separators()) {}

  std::optional<PatternMatch> run(std::size_t start) {
    for (const auto* separators : {&soft_, &hard_}) {
      separators_ = separators;
      failed_.clear();
      match_.slots.clear();
      if (step(0, start)) {
        match_.begin = start;
        return match_;
      }
      if (soft_.size() == hard_.size()) break;
    }
    return std::nullopt;
  }

 private:
  bool is_separator(const std::string& word) const {
    return std::find(separators_->begin(), separators_->end(), word) != separators_->end();
  }

  bool step(std::size_t pi, std::size_t ti) {
    const std::uint64_t key = (static_cast<std::uint64_t>(pi) << 32) | ti;
    if (failed_.count(key)) return false;
    if (try_step(pi, ti)) return true;
    failed_.insert(key);
    return false;
  }

  bool try_step(std::size_t pi, std::size_t ti) {
    if (pi == p_.tokens.size()) {
      if (must_end_ && ti != *must_end_) return false;
      match_.end = ti;
      return true;
    }
    const PatternToken& pt = p_.tokens[pi];
    const std::size_t n = t_.size();
    switch (pt.kind) {
      case PatternToken::Kind::TagOpen:
      case PatternToken::Kind::TagClose:
      case PatternToken::Kind::Word: {
        if (ti >= n) return false;
        const Token& tok = t_[ti];
        auto want = pt.kind == PatternToken::Kind::TagOpen    ? Token::Kind::TagOpen
                    : pt.kind == PatternToken::Kind::TagClose ? Token::Kind::TagClose
                                                              : Token::Kind::Word;
        if (tok.kind != want || tok.text != pt.text) return false;
        return step(pi + 1, ti + 1);
      }
      case PatternToken::Kind::Slot: {
        for (std::size_t len = 1; len <= pt.max && ti + len <= n; ++len) {
          const Token& tok = t_[ti + len - 1];
          if (tok.is_tag() || is_separator(tok.text)) break;
          match_.slots.push_back({pt.field, {ti, ti + len}});
          if (step(pi + 1, ti + len)) return true;
          match_.slots.pop_back();
        }
        return false;
      }
      case PatternToken::Kind::Gap: {
        for (std::size_t len = 0; len <= pt.max && ti + len <= n; ++len) {
          if (len > 0 && t_[ti + len - 1].is_tag()) break;
          if (len >= pt.min && step(pi + 1, ti + len)) return true;
        }
        return false;
      }
    }
    return false;
  }

  const Pattern& p_;
  std::span<const Token> t_;
  std::optional<std::size_t> must_end_;
  std::vector<std::string> hard_;
  std::vector<std::string> soft_;
  const std::vector<std::string>* separators_ = &hard_;
  std::unordered_set<std::uint64_t> failed_;
  PatternMatch match_;
};

}  // namespace

std::optional<PatternMatch> match_at(const Pattern& pattern, std::span<const Token> tokens, std::size_t start,
                                     std::optional<std::size_t> must_end) {
  if (start > tokens.size()) return std::nullopt;
  return Matcher(pattern, tokens, must_end).run(start);
}

bool matches_exactly(const Pattern& pattern, std::span<const Token> tokens) {
  return match_at(pattern, tokens, 0, tokens.size()).has_value();
}

// --------------------------------------------------------------------
// Context extraction and generalization

Pattern extract_context(std::span<const Token> tokens, const Occurrence& occurrence, std::size_t left,
                        std::size_t right, std::span<const std::size_t> field_map) {
  Pattern p;
  const std::size_t b = occurrence.begin(), e = occurrence.end();

  std::vector<PatternToken> before;
  for (std::size_t k = 0; k < left && k < b; ++k) {
    const Token& t = tokens[b - 1 - k];
    before.push_back(PatternToken::from(t));
    if (t.is_tag()) break;
  }
  p.tokens.assign(before.rbegin(), before.rend());

  std::size_t pos = b;
  for (const auto& m : occurrence.matches) {
    for (; pos < m.begin; ++pos) p.tokens.push_back(PatternToken::from(tokens[pos]));
    std::size_t field = field_map.empty() ? m.field : field_map[m.field];
    p.tokens.push_back(PatternToken::slot(field, m.end - m.begin));
    pos = m.end;
  }

  for (std::size_t k = 0; k < right && e + k < tokens.size(); ++k) {
    const Token& t = tokens[e + k];
    p.tokens.push_back(PatternToken::from(t));
    if (t.is_tag()) break;
  }
  return p;
}

std::string_view failure_name(GeneralizeFailure failure) {
  switch (failure) {
    case GeneralizeFailure::SkeletonMismatch: return "skeleton_mismatch";
    case GeneralizeFailure::SlotMismatch: return "slot_mismatch";
    case GeneralizeFailure::GapOverflow: return "gap_overflow";
  }
  return "skeleton_mismatch";
}

namespace {

bool same_anchor(const PatternToken& a, const PatternToken& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == PatternToken::Kind::Slot) return a.field == b.field;
  return a.text == b.text;
}

struct Split {
  std::vector<PatternToken> anchors;
  std::vector<std::vector<PatternToken>> runs;  // anchors.size() + 1 runs
};

Split split(const Pattern& p) {
  Split s;
  s.runs.emplace_back();
  for (const auto& t : p.tokens) {
    if (t.is_anchor()) {
      s.anchors.push_back(t);
      s.runs.emplace_back();
    } else {
      s.runs.back().push_back(t);
    }
  }
  return s;
}

void add_run_words(const std::vector<PatternToken>& run, std::set<std::string>& words) {
  for (const auto& t : run) {
    if (t.kind == PatternToken::Kind::Word) words.insert(t.text);
    words.insert(t.words.begin(), t.words.end());
  }
}

std::pair<std::size_t, std::size_t> run_length(const std::vector<PatternToken>& run) {
  std::size_t lo = 0, hi = 0;
  for (const auto& t : run) {
    if (t.kind == PatternToken::Kind::Gap) {
      lo += t.min;
      hi += t.max;
    } else {
      ++lo;
      ++hi;
    }
  }
  return {lo, hi};
}

}  // namespace

Generalization generalize_pair(const Pattern& p, const Pattern& q, std::size_t gap_bound) {
  Generalization result;
  if (p.tag_skeleton() != q.tag_skeleton()) {
    result.failure = GeneralizeFailure::SkeletonMismatch;
    return result;
  }
  Split sp = split(p), sq = split(q);
  if (sp.anchors.size() != sq.anchors.size() ||
      !std::equal(sp.anchors.begin(), sp.anchors.end(), sq.anchors.begin(), same_anchor)) {
    result.failure = GeneralizeFailure::SlotMismatch;
    return result;
  }

  Pattern merged;
  for (std::size_t i = 0; i < sp.runs.size(); ++i) {
    if (sp.runs[i] == sq.runs[i]) {
      merged.tokens.insert(merged.tokens.end(), sp.runs[i].begin(), sp.runs[i].end());
    } else {
      auto [plo, phi] = run_length(sp.runs[i]);
      auto [qlo, qhi] = run_length(sq.runs[i]);
      std::size_t hi = std::max(phi, qhi);
      if (hi > gap_bound) {
        result.failure = GeneralizeFailure::GapOverflow;
        return result;
      }
      std::set<std::string> words;
      add_run_words(sp.runs[i], words);
      add_run_words(sq.runs[i], words);
      merged.tokens.push_back(PatternToken::gap(std::min(plo, qlo), hi, {words.begin(), words.end()}));
    }
    if (i < sp.anchors.size()) {
      PatternToken a = sp.anchors[i];
      if (a.kind == PatternToken::Kind::Slot) a.max = std::max(a.max, sq.anchors[i].max);
      merged.tokens.push_back(std::move(a));
    }
  }
  result.pattern = std::move(merged);
  return result;
}

// --------------------------------------------------------------------
// Wrapper serialization

Json LearnerConfig::to_json() const {
  Json j = Json::object();
  j["left"] = left;
  j["right"] = right;
  j["window"] = window;
  j["slot_bound"] = slot_bound;
  j["gap_bound"] = gap_bound;
  return j;
}

LearnerConfig LearnerConfig::from_json(const Json& j) {
  LearnerConfig c;
  c.left = j.value("left", c.left);
  c.right = j.value("right", c.right);
  c.window = j.value("window", c.window);
  c.slot_bound = j.value("slot_bound", c.slot_bound);
  c.gap_bound = j.value("gap_bound", c.gap_bound);
  return c;
}

std::string Wrapper::to_json_text() const {
  std::string out = "{\n";
  out += "  \"version\": " + Json(version).dump() + ",\n";
  out += "  \"fields\": " + Json(fields).dump() + ",\n";
  out += "  \"config\": " + config.to_json().dump() + ",\n";
  out += "  \"patterns\": [";
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    out += i == 0 ? "\n" : ",\n";
    out += "    " + patterns[i].canonical();
  }
  out += patterns.empty() ? "]\n" : "\n  ]\n";
  out += "}\n";
  return out;
}

Wrapper Wrapper::from_json_text(std::string_view text) {
  Json j = Json::parse(text);
  Wrapper w;
  w.version = j.at("version").get<std::string>();
  w.fields = j.at("fields").get<std::vector<std::string>>();
  w.config = LearnerConfig::from_json(j.value("config", Json::object()));
  for (const auto& p : j.at("patterns")) {
    Pattern pattern = Pattern::from_json(p);
    for (const auto& t : pattern.tokens) {
      if (t.kind == PatternToken::Kind::Slot && t.field >= w.fields.size()) {
        throw std::invalid_argument("slot refers to unknown field " + std::to_string(t.field));
      }
    }
    w.patterns.push_back(std::move(pattern));
  }
  return w;
}

// --------------------------------------------------------------------
// Learning

WrapperLearner::WrapperLearner(const std::vector<std::string>& corpus, LearnerConfig config) : config_(config) {
  corpus_.reserve(corpus.size());
  for (const auto& doc : corpus) corpus_.push_back(preprocess(doc));
}

std::size_t WrapperLearner::intern(const std::string& field) {
  auto it = std::find(names_.begin(), names_.end(), field);
  if (it != names_.end()) return static_cast<std::size_t>(it - names_.begin());
  names_.push_back(field);
  return names_.size() - 1;
}

ExampleReport WrapperLearner::collect_contexts(const ExampleInstance& example) {
  ExampleReport entry;
  entry.example = report_.examples.size();
  auto record = [&](std::string status) {
    entry.status = std::move(status);
    report_.examples.push_back(entry);
    return entry;
  };

  if (std::find(seen_.begin(), seen_.end(), example) != seen_.end()) return record("duplicate");
  bool any = std::any_of(example.fields.begin(), example.fields.end(),
                         [](const auto& f) { return !tokenize_words(f.second).empty(); });
  if (!any) return record("empty");

  std::vector<std::size_t> field_map;
  for (const auto& [name, value] : example.fields) field_map.push_back(intern(name));

  std::string failure = "not_found";
  std::size_t added = 0;
  for (const auto& doc : corpus_) {
    for (const auto& occ : locate_instance(doc, example, config_.window)) {
      ++entry.occurrences;
      Pattern p = extract_context(doc, occ, config_.left, config_.right, field_map);
      auto separators = p.separators();
      if (p.tag_skeleton().empty() && separators.empty()) {
        failure = "unanchored";
        continue;
      }
      bool conflict = false;
      for (const auto& m : occ.matches) {
        for (std::size_t i = m.begin; i < m.end && !conflict; ++i) {
          conflict = std::find(separators.begin(), separators.end(), doc[i].text) != separators.end();
        }
      }
      if (conflict) {
        failure = "separator_conflict";
        continue;
      }
      for (auto& t : p.tokens) {
        if (t.kind == PatternToken::Kind::Slot) t.max = std::max(t.max, config_.slot_bound);
      }
      patterns_.push_back(std::move(p));
      ++added;
    }
  }
  if (added == 0) return record(entry.occurrences == 0 ? "not_found" : failure);

  seen_.push_back(example);
  std::vector<std::string> order;
  for (const auto& f : example.fields) order.push_back(f.first);
  orderings_.push_back(std::move(order));
  ++report_.usable;
  return record("ok");
}

void WrapperLearner::fixpoint() {
  auto by_canonical = [](const Pattern& a, const Pattern& b) { return a.canonical() < b.canonical(); };
  std::sort(patterns_.begin(), patterns_.end(), by_canonical);
  bool merged = true;
  while (merged) {
    merged = false;
    for (std::size_t i = 0; i < patterns_.size() && !merged; ++i) {
      for (std::size_t j = i + 1; j < patterns_.size() && !merged; ++j) {
        auto g = generalize_pair(patterns_[i], patterns_[j], config_.gap_bound);
        if (!g) continue;
        patterns_.erase(patterns_.begin() + static_cast<std::ptrdiff_t>(j));
        patterns_[i] = std::move(*g.pattern);
        std::sort(patterns_.begin(), patterns_.end(), by_canonical);
        merged = true;
      }
    }
  }
}

ExampleReport WrapperLearner::add_example(const ExampleInstance& example) {
  auto entry = collect_contexts(example);
  fixpoint();
  return entry;
}

Wrapper WrapperLearner::wrapper() const {
  // Field order: topological order of the examples' field sequences, ties
  // broken by name, so the result does not depend on example order.
  std::map<std::string, std::set<std::string>> succ;
  std::map<std::string, std::size_t> indegree;
  for (const auto& order : orderings_) {
    for (std::size_t i = 0; i < order.size(); ++i) {
      indegree.try_emplace(order[i], 0);
      if (i + 1 < order.size() && succ[order[i]].insert(order[i + 1]).second) ++indegree[order[i + 1]];
    }
  }
  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [name, deg] : indegree) {
    if (deg == 0) ready.push(name);
  }
  Wrapper w;
  w.config = config_;
  while (!ready.empty()) {
    std::string name = ready.top();
    ready.pop();
    w.fields.push_back(name);
    for (const auto& next : succ[name]) {
      if (--indegree[next] == 0) ready.push(next);
    }
  }
  if (w.fields.size() != indegree.size()) throw LearnError("examples list their fields in conflicting orders");

  std::vector<std::size_t> remap(names_.size(), 0);
  for (std::size_t i = 0; i < names_.size(); ++i) {
    auto it = std::find(w.fields.begin(), w.fields.end(), names_[i]);
    remap[i] = static_cast<std::size_t>(it - w.fields.begin());
  }
  for (Pattern p : patterns_) {
    for (auto& t : p.tokens) {
      if (t.kind == PatternToken::Kind::Slot) t.field = remap[t.field];
    }
    w.patterns.push_back(std::move(p));
  }
  std::sort(w.patterns.begin(), w.patterns.end(),
            [](const Pattern& a, const Pattern& b) { return a.canonical() < b.canonical(); });
  return w;
}

LearnResult learn_wrapper(const std::vector<std::string>& corpus, const std::vector<ExampleInstance>& examples,
                          const LearnerConfig& config) {
  if (examples.empty()) throw LearnError("no examples given");
  WrapperLearner learner(corpus, config);
  for (const auto& ex : examples) learner.collect_contexts(ex);
  if (learner.report().usable == 0) throw LearnError("none of the examples could be located in the corpus");
  learner.fixpoint();
  return {learner.wrapper(), learner.report()};
}

// --------------------------------------------------------------------
// Application

namespace {

std::string join_words(std::span<const Token> tokens, std::size_t b, std::size_t e) {
  std::string out;
  for (std::size_t i = b; i < e; ++i) {
    if (i > b && tokens[i].space_before) out += ' ';
    out += tokens[i].text;
  }
  return out;
}

struct Hit {
  std::size_t doc;
  std::size_t begin;
  std::size_t pattern;
  Record record;
};

void collect_hits(const Wrapper& wrapper, std::span<const Token> tokens, std::size_t doc, std::vector<Hit>& hits) {
  for (std::size_t pi = 0; pi < wrapper.patterns.size(); ++pi) {
    const Pattern& pattern = wrapper.patterns[pi];
    std::size_t pos = 0;
    while (pos < tokens.size()) {
      auto m = match_at(pattern, tokens, pos);
      if (!m) {
        ++pos;
        continue;
      }
      Record r;
      for (const auto& [field, range] : m->slots) {
        r.set(wrapper.fields.at(field), join_words(tokens, range.first, range.second));
      }
      hits.push_back({doc, m->begin, pi, std::move(r)});
      pos = std::max(m->end, pos + 1);
    }
  }
}

}  // namespace

std::vector<Record> apply_wrapper(const Wrapper& wrapper, std::span<const std::string> documents) {
  if (wrapper.version != kTokenizerVersion) {
    throw VersionMismatch("wrapper tokenizer version '" + wrapper.version + "' does not match '" +
                          std::string(kTokenizerVersion) + "'");
  }
  std::vector<Hit> hits;
  for (std::size_t d = 0; d < documents.size(); ++d) {
    auto tokens = preprocess(documents[d]);
    collect_hits(wrapper, tokens, d, hits);
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
    return std::tie(a.doc, a.begin, a.pattern) < std::tie(b.doc, b.begin, b.pattern);
  });
  std::vector<Record> out;
  std::set<std::string> seen;
  for (auto& h : hits) {
    if (seen.insert(h.record.to_json().dump()).second) out.push_back(std::move(h.record));
  }
  return out;
}

std::vector<Record> apply_wrapper(const Wrapper& wrapper, std::string_view document) {
  std::string doc(document);
  return apply_wrapper(wrapper, std::span<const std::string>(&doc, 1));
}

}  // namespace wexfab::ierel
