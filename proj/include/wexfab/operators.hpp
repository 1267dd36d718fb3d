#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wexfab/fetcher.hpp"
#include "wexfab/ierel.hpp"
#include "wexfab/item.hpp"
#include "wexfab/wetdl.hpp"

namespace wexfab::operators {

// --------------------------------------------------------------------
// Extraction expressions

struct PathStep {
  enum class Axis { Child, Descendant };
  Axis axis = Axis::Child;
  std::string test;  // element name or "*"
  bool operator==(const PathStep&) const = default;
};

/// Small XPath subset: `/`, `//`, name or `*` tests, and an optional final
/// `@attr` or `text()`.
struct PathExpression {
  enum class Terminal { None, Attribute, Text };

  std::vector<PathStep> steps;
  Terminal terminal = Terminal::None;
  std::string attribute;

  /// Throws std::invalid_argument on syntax errors.
  static PathExpression parse(std::string_view text);

  /// Elements selected by the steps, in document order without duplicates.
  std::vector<const dom::Node*> select(const dom::Node& context) const;

  /// Document items for element results, Text items for @attr / text().
  std::vector<Item> evaluate(const DocumentRef& doc, const std::string& provenance) const;
};

struct RegexExtractor {
  std::string pattern;
  std::regex compiled;
  std::vector<std::string> key_map;

  /// Throws std::invalid_argument for a bad pattern, duplicate keys, or
  /// fewer capture groups than keys.
  static RegexExtractor make(std::string pattern, std::vector<std::string> key_map);

  /// One record per non-overlapping match; unmatched groups leave the field out.
  std::vector<Record> apply(const std::string& text) const;
};

/// Builds one record from named parts of a response (url, status, or a
/// header) or of a record (its fields).
struct FieldProjection {
  std::vector<std::string> fields;
};

struct WrapperRef {
  std::string path;
  std::shared_ptr<const ierel::Wrapper> wrapper;
};

using Extractor = std::variant<PathExpression, RegexExtractor, FieldProjection, WrapperRef>;

struct Predicate {
  enum class Op { Equals, Contains, Matches, LessThan, GreaterThan };
  struct Conjunct {
    std::string selector;
    Op op = Op::Equals;
    std::string literal;
    std::optional<std::regex> regex;
  };
  std::vector<Conjunct> conjuncts;

  bool test(const Item& item) const;
};

std::optional<Predicate::Op> parse_predicate_op(std::string_view name);

/// Value of a selector against an item: header or url/status/body for
/// responses, field for records, text for text and documents.
std::optional<std::string> select_field(const Item& item, std::string_view selector);

// --------------------------------------------------------------------
// Templates

using Lookup = std::function<std::optional<std::string>(std::string_view name)>;

/// Substitutes `$name`, `${name}` and `$$`. Names missing from `lookup`
/// render empty and are appended to `missing`.
std::string render_template(std::string_view tmpl, const Lookup& lookup, std::vector<std::string>* missing = nullptr);

/// Placeholders in order of appearance, duplicates kept.
std::vector<std::string> template_placeholders(std::string_view tmpl);

/// Lookup over an item: record fields, `_text`, and `_json` for records.
Lookup item_lookup(const Item& item);

// --------------------------------------------------------------------
// Operations

std::vector<Item> build_http_query(Method method, std::string_view base_url, const KeyValues& pairs,
                                   const std::string& provenance = {});

std::vector<Item> fetch(const Item& input, const Fetcher& fetcher, std::optional<Method> method_override = {},
                        const std::string& provenance = {});

enum class DocumentFormat { Xml, Html };

std::vector<Item> parse_document(const Item& input, DocumentFormat format, const std::string& provenance = {});

std::vector<Item> filter_items(const Item& input, const Predicate& predicate);

std::vector<Item> extract(const Item& input, const Extractor& extractor, const std::string& provenance = {});

/// Empty list when a referenced field is absent.
std::vector<Item> transform(const Item& input, std::string_view tmpl, const std::string& provenance = {});

/// Collects sink lines per target; targets other than "" are also appended
/// to files.
class SinkSet {
 public:
  explicit SinkSet(std::filesystem::path base_dir = {}) : base_dir_(std::move(base_dir)) {}

  bool write(const std::string& target, const std::string& line);
  const std::map<std::string, std::vector<std::string>>& lines() const { return lines_; }

 private:
  std::filesystem::path base_dir_;
  std::map<std::string, std::vector<std::string>> lines_;
};

struct SinkConfig {
  enum class Mode { Jsonl, Statement };
  Mode mode = Mode::Jsonl;
  std::string statement;  // whitespace-collapsed template
  std::string target;     // "" = in-memory only
};

/// SQL-style rendering: single quotes in values doubled, missing fields
/// rendered empty and counted in `warnings`.
std::string render_statement(const SinkConfig& config, const Record& record, std::size_t* warnings = nullptr);

std::vector<Item> sink_records(const Item& input, const SinkConfig& config, SinkSet& sinks,
                               std::size_t* warnings = nullptr);

// --------------------------------------------------------------------
// Per-kind configuration compiled from WetDL params

struct DummyConfig {};

struct QueryConfig {
  Method method = Method::Get;
  std::string base_url;
  std::vector<std::pair<std::string, std::string>> args;  // key -> template
  bool fetch_response = true;
};

struct FetchConfig {
  std::optional<Method> method;
};

struct ParseConfig {
  DocumentFormat format = DocumentFormat::Html;
};

struct FilterConfig {
  Predicate predicate;
};

struct ExtractConfig {
  Extractor extractor;
};

struct TransformConfig {
  std::string tmpl;
};

using OperatorConfig = std::variant<DummyConfig, QueryConfig, FetchConfig, ParseConfig, FilterConfig, ExtractConfig,
                                    TransformConfig, SinkConfig>;

struct CompileOptions {
  std::filesystem::path base_dir;  // relative wrapper paths resolve here
};

struct CompiledOperator {
  std::optional<OperatorConfig> config;
  std::vector<wetdl::Diagnostic> diagnostics;
};

/// Reads the params of one operator. Errors: MISSING_PARAM, BAD_PARAM.
CompiledOperator compile_operator(const wetdl::OperatorSpec& spec, const CompileOptions& options = {});

struct OperatorContext {
  const Fetcher* fetcher = nullptr;
  SinkSet* sinks = nullptr;
  std::size_t warnings = 0;
};

/// Runs one operator on one item. Never throws for data errors.
std::vector<Item> run_operator(const OperatorConfig& config, const Item& input, OperatorContext& context,
                               const std::string& provenance);

}  // namespace wexfab::operators
