#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "wexfab/ierel.hpp"
#include "wexfab/item.hpp"

namespace wexfab::evalkit {

// --------------------------------------------------------------------
// Synthetic sources

struct FieldSpec {
  enum class Kind { Acronym, Year, City, Province, Country };
  std::string name;
  Kind kind = Kind::City;
};

struct FormatSpec {
  std::string label;
  std::vector<std::string> fields;  // fields this format shows; the rest are empty in its truth rows
  std::string row_template;         // `$field` placeholders
  std::string open;                 // document prologue
  std::string close;                // document epilogue
};

struct SyntheticSourceSpec {
  std::vector<FieldSpec> fields;
  std::vector<FormatSpec> formats;
  std::size_t rows_per_format = 20;
  std::size_t rows_per_document = 0;  // 0: one document per format
  std::uint64_t seed = 1;
};

struct TruthRow {
  Record record;  // every spec field, empty when the format omits it
  std::string format;
};

struct SyntheticSource {
  std::vector<std::string> documents;
  std::vector<std::string> document_format;
  std::vector<TruthRow> truth;

  std::vector<Record> records() const;
  std::vector<Record> records_of(const std::string& format) const;
};

class GenerateError : public std::runtime_error {
 public:
  GenerateError(std::string code, const std::string& message)
      : std::runtime_error(code + ": " + message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Deterministic in the spec. Acronyms are unique across the source.
/// Errors: NO_FORMATS, NO_ROWS, UNKNOWN_FIELD, MISSING_PLACEHOLDER.
SyntheticSource generate_source(const SyntheticSourceSpec& spec);

/// Conference listings (acronyme, year, city, province, country) in three
/// formats: "list" (no province), "table" and "block".
SyntheticSourceSpec conference_spec(std::size_t rows_per_format = 50, std::uint64_t seed = 1);

/// Random formats over the conference fields: field subsets in a fixed
/// order, acronym first, every field delimited by a tag or punctuation.
SyntheticSourceSpec random_source_spec(std::uint64_t seed);

/// The first `n` truth rows of `format` as example instances, omitting the
/// fields the format does not show.
std::vector<ierel::ExampleInstance> examples_for(const SyntheticSourceSpec& spec, const SyntheticSource& source,
                                                 const std::string& format, std::size_t n);

// --------------------------------------------------------------------
// Scoring

struct EvaluationRow {
  std::string source;
  std::size_t examples = 0;
  std::size_t instances = 0;  // considered
  std::size_t retrieved = 0;
  std::size_t correct = 0;

  double recall() const;
  /// nullopt when nothing was retrieved.
  std::optional<double> accuracy() const;
  Json to_json() const;
};

/// Equality on all fields, absent and empty treated alike; duplicates in
/// `extracted` count once.
EvaluationRow score(const std::vector<Record>& extracted, const std::vector<Record>& truth, std::size_t considered);

/// Two-decimal text of num/den rounded half-up, computed exactly.
std::string format_ratio(std::size_t num, std::size_t den);

/// Aligned table with the columns Source, Ex., Inst., Retr., Rec., Acc.
std::string format_report(const std::vector<EvaluationRow>& rows);

}  // namespace wexfab::evalkit
