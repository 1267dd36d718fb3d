#include "wexfab/evalkit.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "wexfab/operators.hpp"

namespace wexfab::evalkit {

namespace {

constexpr std::string_view kSyllables[] = {"ba", "ro", "mi", "ta", "len", "dor", "sa", "vi", "ka", "nor",
                                           "el", "ma", "ri", "go", "tun", "be", "la", "sen", "ca", "po"};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }
  bool chance(unsigned percent) { return below(100) < percent; }

 private:
  std::mt19937_64 gen_;
};

std::string capitalized_word(Rng& rng) {
  std::string w;
  std::size_t n = 2 + rng.below(2);
  for (std::size_t i = 0; i < n; ++i) w += kSyllables[rng.below(std::size(kSyllables))];
  w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::string words(Rng& rng, std::size_t max_words) {
  std::string out;
  std::size_t n = 1 + rng.below(max_words);
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + capitalized_word(rng);
  return out;
}

std::string value_for(FieldSpec::Kind kind, Rng& rng, std::set<std::string>& acronyms) {
  switch (kind) {
    case FieldSpec::Kind::Acronym:
      while (true) {
        std::string a;
        std::size_t n = 3 + rng.below(4);
        for (std::size_t i = 0; i < n; ++i) a += static_cast<char>('A' + rng.below(26));
        if (acronyms.insert(a).second) return a;
      }
    case FieldSpec::Kind::Year: return std::to_string(1975 + rng.below(50));
    case FieldSpec::Kind::City: return words(rng, 3);
    case FieldSpec::Kind::Province: return words(rng, 2);
    case FieldSpec::Kind::Country: return words(rng, 2);
  }
  return {};
}

bool placeholder_for(const std::vector<std::string>& placeholders, const std::string& field) {
  return std::find(placeholders.begin(), placeholders.end(), field) != placeholders.end();
}

std::string normalized(const Record& r) {
  std::map<std::string, std::string> m;
  for (const auto& [k, v] : r.fields()) {
    if (!v.empty()) m[k] = v;
  }
  std::string out;
  for (const auto& [k, v] : m) out += k + '\x1f' + v + '\x1e';
  return out;
}

const std::vector<FieldSpec>& conference_fields() {
  static const std::vector<FieldSpec> fields = {{"acronyme", FieldSpec::Kind::Acronym},
                                                {"year", FieldSpec::Kind::Year},
                                                {"city", FieldSpec::Kind::City},
                                                {"province", FieldSpec::Kind::Province},
                                                {"country", FieldSpec::Kind::Country}};
  return fields;
}

}  // namespace

// --------------------------------------------------------------------

std::vector<Record> SyntheticSource::records() const {
  std::vector<Record> out;
  for (const auto& t : truth) out.push_back(t.record);
  return out;
}

std::vector<Record> SyntheticSource::records_of(const std::string& format) const {
  std::vector<Record> out;
  for (const auto& t : truth) {
    if (t.format == format) out.push_back(t.record);
  }
  return out;
}

SyntheticSource generate_source(const SyntheticSourceSpec& spec) {
  if (spec.formats.empty()) throw GenerateError("NO_FORMATS", "source has no formats");
  if (spec.rows_per_format == 0) throw GenerateError("NO_ROWS", "rows_per_format is zero");
  for (const auto& f : spec.formats) {
    auto placeholders = operators::template_placeholders(f.row_template);
    for (const auto& name : f.fields) {
      bool known = std::any_of(spec.fields.begin(), spec.fields.end(), [&](const FieldSpec& s) { return s.name == name; });
      if (!known) throw GenerateError("UNKNOWN_FIELD", "format '" + f.label + "' shows undeclared field '" + name + "'");
      if (!placeholder_for(placeholders, name)) {
        throw GenerateError("MISSING_PLACEHOLDER", "format '" + f.label + "' has no placeholder for '" + name + "'");
      }
    }
    for (const auto& p : placeholders) {
      if (std::find(f.fields.begin(), f.fields.end(), p) == f.fields.end()) {
        throw GenerateError("UNKNOWN_FIELD", "format '" + f.label + "' uses unknown placeholder '$" + p + "'");
      }
    }
  }

  Rng rng(spec.seed);
  std::set<std::string> acronyms;
  SyntheticSource source;
  for (const auto& format : spec.formats) {
    std::string body;
    std::size_t in_doc = 0;
    auto flush = [&] {
      source.documents.push_back(format.open + body + format.close);
      source.document_format.push_back(format.label);
      body.clear();
      in_doc = 0;
    };
    for (std::size_t row = 0; row < spec.rows_per_format; ++row) {
      Record record;
      for (const auto& field : spec.fields) {
        bool shown = std::find(format.fields.begin(), format.fields.end(), field.name) != format.fields.end();
        record.set(field.name, shown ? value_for(field.kind, rng, acronyms) : std::string());
      }
      body += operators::render_template(format.row_template, [&](std::string_view name) -> std::optional<std::string> {
        if (auto* v = record.get(name)) return *v;
        return std::nullopt;
      });
      body += '\n';
      source.truth.push_back({std::move(record), format.label});
      if (spec.rows_per_document && ++in_doc == spec.rows_per_document) flush();
    }
    if (!body.empty()) flush();
  }
  return source;
}

SyntheticSourceSpec conference_spec(std::size_t rows_per_format, std::uint64_t seed) {
  SyntheticSourceSpec spec;
  spec.fields = conference_fields();
  spec.rows_per_format = rows_per_format;
  spec.seed = seed;
  spec.formats.push_back({"list",
                          {"acronyme", "year", "city", "country"},
                          "<li><b>$acronyme</b> $year : $city , $country</li>",
                          "<html><body><h1>Conferences</h1>\n<ul>\n",
                          "</ul>\n</body></html>\n"});
  spec.formats.push_back({"table",
                          {"acronyme", "year", "city", "province", "country"},
                          "<tr><td>$acronyme</td><td>$year</td><td>$city</td><td>$province</td><td>$country</td></tr>",
                          "<html><body>\n<table>\n<tr><th>Name</th><th>Year</th><th>Place</th></tr>\n",
                          "</table>\n</body></html>\n"});
  spec.formats.push_back({"block",
                          {"acronyme", "year", "city", "province", "country"},
                          "<div class=\"conf\">$acronyme $year - $city / $province / $country</div>",
                          "<html><body>\n",
                          "</body></html>\n"});
  return spec;
}

SyntheticSourceSpec random_source_spec(std::uint64_t seed) {
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  SyntheticSourceSpec spec;
  spec.fields = conference_fields();
  spec.seed = seed;
  spec.rows_per_format = 5 + rng.below(20);
  static constexpr std::string_view kSeparators[] = {":", ",", "-", "/", "|", ";"};
  static constexpr unsigned kKeep[] = {100, 80, 90, 50, 90};

  std::size_t formats = 1 + rng.below(3);
  for (std::size_t f = 0; f < formats; ++f) {
    FormatSpec format;
    format.label = "f" + std::to_string(f);
    for (std::size_t i = 0; i < spec.fields.size(); ++i) {
      if (rng.chance(kKeep[i])) format.fields.push_back(spec.fields[i].name);
    }
    std::size_t style = rng.below(3);
    std::string row;
    if (style == 1) {
      row = "<tr>";
      for (const auto& name : format.fields) row += "<td>$" + name + "</td>";
      row += "</tr>";
      format.open = "<html><body><table>\n";
      format.close = "</table></body></html>\n";
    } else {
      std::string tag = style == 0 ? "li" : "p";
      row = "<" + tag + ">";
      for (std::size_t i = 0; i < format.fields.size(); ++i) {
        std::string value = "$" + format.fields[i];
        if (rng.chance(30)) value = "<b>" + value + "</b>";
        if (i > 0) row += " " + std::string(kSeparators[rng.below(std::size(kSeparators))]) + " ";
        row += value;
      }
      row += "</" + tag + ">";
      format.open = style == 0 ? "<html><body><ul>\n" : "<html><body>\n";
      format.close = style == 0 ? "</ul></body></html>\n" : "</body></html>\n";
    }
    format.row_template = std::move(row);
    spec.formats.push_back(std::move(format));
  }
  return spec;
}

std::vector<ierel::ExampleInstance> examples_for(const SyntheticSourceSpec& spec, const SyntheticSource& source,
                                                 const std::string& format, std::size_t n) {
  auto it = std::find_if(spec.formats.begin(), spec.formats.end(), [&](const FormatSpec& f) { return f.label == format; });
  if (it == spec.formats.end()) throw GenerateError("UNKNOWN_FORMAT", "no format '" + format + "'");
  std::vector<ierel::ExampleInstance> out;
  for (const auto& t : source.truth) {
    if (out.size() == n) break;
    if (t.format != format) continue;
    ierel::ExampleInstance ex;
    for (const auto& [k, v] : t.record.fields()) {
      if (std::find(it->fields.begin(), it->fields.end(), k) != it->fields.end()) ex.fields.emplace_back(k, v);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// --------------------------------------------------------------------
// Scoring

double EvaluationRow::recall() const {
  return instances == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(instances);
}

std::optional<double> EvaluationRow::accuracy() const {
  if (retrieved == 0) return std::nullopt;
  return static_cast<double>(correct) / static_cast<double>(retrieved);
}

Json EvaluationRow::to_json() const {
  Json j{{"source", source},
         {"examples", examples},
         {"instances", instances},
         {"retrieved", retrieved},
         {"correct", correct},
         {"recall", format_ratio(correct, instances)}};
  j["accuracy"] = retrieved ? Json(format_ratio(correct, retrieved)) : Json("n/a");
  return j;
}

EvaluationRow score(const std::vector<Record>& extracted, const std::vector<Record>& truth, std::size_t considered) {
  std::set<std::string> truth_keys;
  for (const auto& r : truth) truth_keys.insert(normalized(r));
  std::set<std::string> seen;
  EvaluationRow row;
  row.instances = considered;
  for (const auto& r : extracted) {
    auto key = normalized(r);
    if (!seen.insert(key).second) continue;
    ++row.retrieved;
    if (truth_keys.count(key)) ++row.correct;
  }
  return row;
}

std::string format_ratio(std::size_t num, std::size_t den) {
  if (den == 0) return "n/a";
  std::size_t hundredths = (200 * num + den) / (2 * den);
  std::string frac = std::to_string(hundredths % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return std::to_string(hundredths / 100) + "." + frac;
}

std::string format_report(const std::vector<EvaluationRow>& rows) {
  std::vector<std::vector<std::string>> cells = {{"Source", "Ex.", "Inst.", "Retr.", "Rec.", "Acc."}};
  for (const auto& r : rows) {
    cells.push_back({r.source, std::to_string(r.examples), std::to_string(r.instances), std::to_string(r.retrieved),
                     format_ratio(r.correct, r.instances), r.retrieved ? format_ratio(r.correct, r.retrieved) : "n/a"});
  }
  std::vector<std::size_t> width(6, 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < 6; ++c) width[c] = std::max(width[c], line[c].size());
  }
  std::string out;
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t c = 0; c < 6; ++c) {
      std::string pad(width[c] - line[c].size(), ' ');
      if (c == 0) {
        text += line[c] + pad;
      } else {
        text += "  " + pad + line[c];
      }
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + "\n";
  }
  return out;
}

}  // namespace wexfab::evalkit
