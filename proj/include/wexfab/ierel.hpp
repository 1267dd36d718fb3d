#pragma once

// Example-driven wrapper learning by context generalization.
//
// Documents are reduced to a stream of tag and word tokens. Each example
// instance is located in the corpus, the tokens around and between its field
// values become a first pattern (values replaced by slots), and patterns with
// identical tag/slot skeletons are merged until no pair can be merged. Word
// runs that differ between merged patterns become bounded gaps; tags never
// generalize.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "wexfab/item.hpp"

namespace wexfab::ierel {

inline constexpr std::string_view kTokenizerVersion = "ierel-tokens/1";

struct Token {
  enum class Kind { TagOpen, TagClose, Word };

  Kind kind = Kind::Word;
  std::string text;  // lowercased tag name, or the word
  std::size_t position = 0;
  bool space_before = false;  // whitespace or a tag preceded this token

  bool is_tag() const { return kind != Kind::Word; }
  /// Kind and text only; position and spacing are ignored.
  bool operator==(const Token& o) const { return kind == o.kind && text == o.text; }

  static Token open(std::string name) { return {Kind::TagOpen, std::move(name)}; }
  static Token close(std::string name) { return {Kind::TagClose, std::move(name)}; }
  static Token word(std::string text) { return {Kind::Word, std::move(text)}; }
};

std::string to_string(const Token& token);

/// Cleans and encodes a document: comments, script and style removed,
/// entities decoded, attributes dropped, text split on whitespace with each
/// ASCII punctuation character as its own word.
std::vector<Token> preprocess(std::string_view document);

/// Word tokens of plain text under the same splitting rule.
std::vector<Token> tokenize_words(std::string_view text);

struct ExampleInstance {
  std::vector<std::pair<std::string, std::string>> fields;

  static ExampleInstance from_json(const Json& j);
  bool operator==(const ExampleInstance&) const = default;
};

struct FieldMatch {
  std::size_t field = 0;  // index into the instance's fields
  std::size_t begin = 0;  // token range [begin, end)
  std::size_t end = 0;
  bool operator==(const FieldMatch&) const = default;
};

struct Occurrence {
  std::vector<FieldMatch> matches;  // one per non-empty field, in field order

  std::size_t begin() const { return matches.front().begin; }
  std::size_t end() const { return matches.back().end; }
  std::size_t span() const { return end() - begin(); }
  bool operator==(const Occurrence&) const = default;
};

/// Minimal-span occurrences of the instance, non-overlapping, leftmost
/// first, sorted by start. Empty fields are not matched.
std::vector<Occurrence> locate_instance(std::span<const Token> tokens, const ExampleInstance& instance,
                                        std::size_t window = 200);

struct PatternToken {
  enum class Kind { TagOpen, TagClose, Word, Slot, Gap };

  Kind kind = Kind::Word;
  std::string text;        // tag name or word
  std::size_t field = 0;   // Slot
  std::size_t min = 0;     // Gap
  std::size_t max = 0;     // Gap upper bound, Slot max_len
  std::vector<std::string> words;  // Gap: sorted words of the runs it replaced

  bool is_tag() const { return kind == Kind::TagOpen || kind == Kind::TagClose; }
  bool is_anchor() const { return is_tag() || kind == Kind::Slot; }
  bool operator==(const PatternToken&) const = default;

  static PatternToken open(std::string name) { return {Kind::TagOpen, std::move(name), 0, 0, 0, {}}; }
  static PatternToken close(std::string name) { return {Kind::TagClose, std::move(name), 0, 0, 0, {}}; }
  static PatternToken word(std::string text) { return {Kind::Word, std::move(text), 0, 0, 0, {}}; }
  static PatternToken slot(std::size_t field, std::size_t max_len) { return {Kind::Slot, {}, field, 0, max_len, {}}; }
  static PatternToken gap(std::size_t min, std::size_t max, std::vector<std::string> words = {}) {
    return {Kind::Gap, {}, 0, min, max, std::move(words)};
  }
  static PatternToken from(const Token& t);
};

struct Pattern {
  std::vector<PatternToken> tokens;

  /// Tag tokens in order.
  std::vector<PatternToken> tag_skeleton() const;
  /// Tag and slot tokens in order.
  std::vector<PatternToken> anchor_skeleton() const;
  /// Literal word texts; slots may not consume any of them.
  std::vector<std::string> separators() const;
  /// Separators plus the words remembered by gaps. Matching first looks for
  /// a parse whose slots avoid all of them.
  std::vector<std::string> soft_separators() const;

  Json to_json() const;
  static Pattern from_json(const Json& j);
  /// Compact JSON text; the ordering key for the learning fixpoint.
  std::string canonical() const;

  bool operator==(const Pattern&) const = default;
};

/// One successful match of a pattern against a token sequence.
struct PatternMatch {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> slots;  // field -> [b, e)
};

/// Matches `pattern` starting exactly at `start`, preferring the shortest
/// slot and gap extents, and parses whose slots avoid the soft separators.
/// When `must_end` is set the match has to end there.
std::optional<PatternMatch> match_at(const Pattern& pattern, std::span<const Token> tokens, std::size_t start,
                                     std::optional<std::size_t> must_end = std::nullopt);

/// True when the pattern matches the whole token sequence.
bool matches_exactly(const Pattern& pattern, std::span<const Token> tokens);

/// Context pattern of an occurrence: up to `left` tokens before the first
/// field match and `right` after the last, each side clipped at the nearest
/// tag (inclusive), with field matches replaced by slots whose max_len is the
/// observed length. `field_map[i]` renumbers instance field i; identity when
/// empty.
Pattern extract_context(std::span<const Token> tokens, const Occurrence& occurrence, std::size_t left,
                        std::size_t right, std::span<const std::size_t> field_map = {});

enum class GeneralizeFailure { SkeletonMismatch, SlotMismatch, GapOverflow };
std::string_view failure_name(GeneralizeFailure failure);

struct Generalization {
  std::optional<Pattern> pattern;
  GeneralizeFailure failure = GeneralizeFailure::SkeletonMismatch;
  explicit operator bool() const { return pattern.has_value(); }
};

/// Merges two patterns with identical anchor skeletons. Identical word runs
/// between anchors are kept; differing runs become one Gap spanning both
/// length ranges and remembering their words. Fails if any gap would exceed
/// `gap_bound`.
Generalization generalize_pair(const Pattern& p, const Pattern& q, std::size_t gap_bound = 20);

struct LearnerConfig {
  std::size_t left = 6;
  std::size_t right = 6;
  std::size_t window = 200;
  std::size_t slot_bound = 30;
  std::size_t gap_bound = 20;

  Json to_json() const;
  static LearnerConfig from_json(const Json& j);
  bool operator==(const LearnerConfig&) const = default;
};

struct Wrapper {
  std::string version{kTokenizerVersion};
  std::vector<std::string> fields;
  LearnerConfig config;
  std::vector<Pattern> patterns;

  /// Byte-stable JSON document, LF-terminated.
  std::string to_json_text() const;
  static Wrapper from_json_text(std::string_view text);

  bool operator==(const Wrapper&) const = default;
};

struct ExampleReport {
  std::size_t example = 0;
  std::size_t occurrences = 0;
  std::string status;  // "ok", "not_found", "duplicate", "empty", "unanchored", "separator_conflict"
};

struct LearnReport {
  std::vector<ExampleReport> examples;
  std::size_t usable = 0;
};

struct LearnResult {
  Wrapper wrapper;
  LearnReport report;
};

class LearnError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Learns a wrapper from a corpus and example instances. Throws LearnError
/// when no example is usable or the examples order their fields inconsistently.
LearnResult learn_wrapper(const std::vector<std::string>& corpus, const std::vector<ExampleInstance>& examples,
                          const LearnerConfig& config = {});

/// Incremental form: feeds one example at a time into the fixpoint state.
class WrapperLearner {
 public:
  WrapperLearner(const std::vector<std::string>& corpus, LearnerConfig config = {});

  /// Returns the report entry for the example.
  ExampleReport add_example(const ExampleInstance& example);
  Wrapper wrapper() const;
  const LearnReport& report() const { return report_; }

 private:
  friend LearnResult learn_wrapper(const std::vector<std::string>&, const std::vector<ExampleInstance>&,
                                   const LearnerConfig&);

  ExampleReport collect_contexts(const ExampleInstance& example);
  void fixpoint();
  std::size_t intern(const std::string& field);

  LearnerConfig config_;
  std::vector<std::vector<Token>> corpus_;
  std::vector<std::string> names_;                     // interned field names, first-seen order
  std::vector<std::vector<std::string>> orderings_;    // field order of each usable example
  std::vector<ExampleInstance> seen_;
  std::vector<Pattern> patterns_;                      // slots index into names_
  LearnReport report_;
};

class VersionMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Records extracted by the wrapper, deduplicated in first-occurrence order.
/// Throws VersionMismatch if the wrapper was built by another tokenizer.
std::vector<Record> apply_wrapper(const Wrapper& wrapper, std::string_view document);
std::vector<Record> apply_wrapper(const Wrapper& wrapper, std::span<const std::string> documents);

}  // namespace wexfab::ierel
