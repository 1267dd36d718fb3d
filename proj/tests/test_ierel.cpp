#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "properties.hpp"
#include "wexfab/evalkit.hpp"
#include "wexfab/ierel.hpp"

using namespace wexfab;
using namespace wexfab::ierel;

namespace {

ExampleInstance instance(std::vector<std::pair<std::string, std::string>> fields) { return ExampleInstance{std::move(fields)}; }

std::vector<std::vector<std::string>> field_words(const ExampleInstance& ex) {
  std::vector<std::vector<std::string>> out;
  for (const auto& [k, v] : ex.fields) {
    std::vector<std::string> words;
    for (const auto& t : tokenize_words(v)) words.push_back(t.text);
    if (!words.empty()) out.push_back(words);
  }
  return out;
}

std::vector<std::pair<std::size_t, std::size_t>> spans(const std::vector<Occurrence>& occ) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (const auto& o : occ) out.emplace_back(o.begin(), o.end());
  return out;
}

evalkit::SyntheticSourceSpec single_format(std::size_t rows, std::uint64_t seed) {
  auto spec = evalkit::conference_spec(rows, seed);
  spec.formats.resize(1);
  return spec;
}

}  // namespace

TEST_CASE("preprocess") {
  CHECK(preprocess("<b>VLDB</b> 2001") ==
        std::vector<Token>{Token::open("b"), Token::word("VLDB"), Token::close("b"), Token::word("2001")});
  CHECK(preprocess("<!-- x --><p>a&amp;b</p>") ==
        std::vector<Token>{Token::open("p"), Token::word("a"), Token::word("&"), Token::word("b"), Token::close("p")});
  CHECK(preprocess("").empty());
  CHECK(preprocess("<SCRIPT>var x = 1;</script><style>p{}</style><P CLASS=x>hi</P>") ==
        std::vector<Token>{Token::open("p"), Token::word("hi"), Token::close("p")});
  CHECK(preprocess("a\xc2\xa0"
                   "b") == std::vector<Token>{Token::word("a"), Token::word("b")});
}

TEST_CASE("locate the li instance") {
  auto tokens = preprocess("<li>VLDB 2001 : Roma , Italy</li>");
  auto ex = instance({{"acronyme", "VLDB"}, {"year", "2001"}, {"city", "Roma"}, {"country", "Italy"}});
  auto occ = locate_instance(tokens, ex);
  REQUIRE(occ.size() == 1);
  CHECK(occ[0].begin() == 1);
  CHECK(occ[0].end() == 7);
  CHECK(spans(occ) == oracle::minimal_spans(oracle::all_placements(tokens, field_words(ex), 200)));

  CHECK(locate_instance(tokens, instance({{"acronyme", "VLDB"}, {"city", "Paris"}})).empty());
}

TEST_CASE("minimal span wins over a distant repeat") {
  auto tokens = preprocess("<p>Roma is far away from here</p><li>VLDB 2001 : Roma , Italy</li>");
  auto ex = instance({{"acronyme", "VLDB"}, {"city", "Roma"}});
  auto all = oracle::all_placements(tokens, {{"VLDB"}, {"Roma"}}, 200);
  auto occ = locate_instance(tokens, ex);
  CHECK(spans(occ) == oracle::minimal_spans(all));
  REQUIRE(occ.size() == 1);
  CHECK(occ[0].matches[1].begin == 12);

  auto before = preprocess("<li>Roma VLDB 2001 : Roma , Italy</li>");
  auto reversed = locate_instance(before, instance({{"city", "Roma"}, {"acronyme", "VLDB"}}));
  CHECK(spans(reversed) == oracle::minimal_spans(oracle::all_placements(before, {{"Roma"}, {"VLDB"}}, 200)));
}

TEST_CASE("locate agrees with brute force on random sequences") {
  std::mt19937_64 rng(11);
  std::vector<std::string> vocab = {"a", "b", "c", ":", "d"};
  for (int round = 0; round < 400; ++round) {
    std::vector<Token> tokens;
    std::size_t n = 3 + rng() % 12;
    for (std::size_t i = 0; i < n; ++i) {
      if (rng() % 6 == 0) {
        tokens.push_back(rng() % 2 ? Token::open("li") : Token::close("li"));
      } else {
        tokens.push_back(Token::word(vocab[rng() % vocab.size()]));
      }
    }
    ExampleInstance ex;
    std::size_t fields = 1 + rng() % 3;
    for (std::size_t f = 0; f < fields; ++f) {
      std::string value = vocab[rng() % vocab.size()];
      if (rng() % 3 == 0) value += " " + vocab[rng() % vocab.size()];
      ex.fields.emplace_back("f" + std::to_string(f), value);
    }
    std::size_t window = 4 + rng() % 8;
    CAPTURE(round);
    CHECK(spans(locate_instance(tokens, ex, window)) ==
          oracle::minimal_spans(oracle::all_placements(tokens, field_words(ex), window)));
  }
}

TEST_CASE("context extraction") {
  auto tokens = preprocess("<li>VLDB 2001 : Roma , Italy</li>");
  auto ex = instance({{"acronyme", "VLDB"}, {"year", "2001"}, {"city", "Roma"}, {"country", "Italy"}});
  auto occ = locate_instance(tokens, ex);
  REQUIRE(occ.size() == 1);

  auto p = extract_context(tokens, occ[0], 1, 1);
  using PT = PatternToken;
  CHECK(p.tokens == std::vector<PT>{PT::open("li"), PT::slot(0, 1), PT::slot(1, 1), PT::word(":"), PT::slot(2, 1),
                                    PT::word(","), PT::slot(3, 1), PT::close("li")});
  CHECK(matches_exactly(p, tokens));
  CHECK(oracle::matches_whole(p, tokens));

  auto tight = extract_context(tokens, occ[0], 0, 0);
  CHECK(tight.tokens.size() == 6);
  CHECK_FALSE(tight.tokens.front().is_tag());
  CHECK_FALSE(tight.tokens.back().is_tag());

  auto start = preprocess("VLDB 2001 : Roma , Italy</li>");
  auto occ2 = locate_instance(start, ex);
  REQUIRE(occ2.size() == 1);
  auto clamped = extract_context(start, occ2[0], 5, 0);
  CHECK(clamped.tokens.front() == PT::slot(0, 1));
}

TEST_CASE("generalize pair") {
  using PT = PatternToken;
  Pattern colon{{PT::open("li"), PT::slot(0, 1), PT::word(":"), PT::slot(1, 2), PT::close("li")}};
  Pattern dash{{PT::open("li"), PT::slot(0, 1), PT::word("-"), PT::slot(1, 1), PT::close("li")}};
  Pattern td{{PT::open("td"), PT::slot(0, 1), PT::word(":"), PT::slot(1, 2), PT::close("td")}};

  auto same = generalize_pair(colon, colon);
  REQUIRE(same);
  CHECK(*same.pattern == colon);

  auto merged = generalize_pair(colon, dash);
  REQUIRE(merged);
  CHECK(merged.pattern->tokens ==
        std::vector<PT>{PT::open("li"), PT::slot(0, 1), PT::gap(1, 1, {"-", ":"}), PT::slot(1, 2), PT::close("li")});
  CHECK(merged.pattern->tag_skeleton() == colon.tag_skeleton());

  auto fail = generalize_pair(colon, td);
  CHECK_FALSE(fail);
  CHECK(fail.failure == GeneralizeFailure::SkeletonMismatch);

  Pattern swapped{{PT::open("li"), PT::slot(1, 1), PT::word(":"), PT::slot(0, 2), PT::close("li")}};
  auto slot_fail = generalize_pair(colon, swapped);
  CHECK_FALSE(slot_fail);
  CHECK(slot_fail.failure == GeneralizeFailure::SlotMismatch);

  Pattern long_run{{PT::open("li"), PT::slot(0, 1), PT::word("a"), PT::word("b"), PT::word("c"), PT::slot(1, 2),
                    PT::close("li")}};
  auto overflow = generalize_pair(colon, long_run, 2);
  CHECK_FALSE(overflow);
  CHECK(overflow.failure == GeneralizeFailure::GapOverflow);
}

TEST_CASE("generalization soundness on a small sample") {
  auto r = props::soundness(150, 5, 10);
  CHECK(r.enumerator_errors == 0);
  CHECK(r.skeleton_changes == 0);
  CHECK_MESSAGE(r.violations == 0, r.first_failure);
  CHECK(r.strings > 1000);
}

TEST_CASE("matcher agrees with the reachability oracle") {
  std::mt19937_64 rng(3);
  const auto& alpha = props::alphabet();
  for (int round = 0; round < 300; ++round) {
    auto pair = props::random_pair(rng);
    auto g = generalize_pair(pair.p, pair.q);
    const Pattern& p = g ? *g.pattern : pair.p;
    for (int k = 0; k < 40; ++k) {
      std::vector<Token> s;
      std::size_t n = rng() % 9;
      for (std::size_t i = 0; i < n; ++i) s.push_back(alpha[rng() % alpha.size()]);
      CHECK(matches_exactly(p, s) == oracle::matches_whole(p, s));
    }
    for (const auto& s : props::language(p, 6)) CHECK(matches_exactly(p, s) == oracle::matches_whole(p, s));
  }
}

TEST_CASE("single-format corpus: one pattern, every row") {
  auto spec = single_format(20, 4);
  auto source = evalkit::generate_source(spec);
  auto examples = evalkit::examples_for(spec, source, "list", 1);
  auto learned = learn_wrapper(source.documents, examples);
  CHECK(learned.wrapper.patterns.size() == 1);
  auto records = apply_wrapper(learned.wrapper, source.documents);
  std::vector<std::map<std::string, std::string>> got, want;
  for (const auto& r : records) got.push_back(props::nonempty(r.fields()));
  for (const auto& r : source.records()) want.push_back(props::nonempty(r.fields()));
  CHECK(got == want);

  CHECK(apply_wrapper(learned.wrapper, std::string("<html><body><p>nothing here</p></body></html>")).empty());
}

TEST_CASE("two formats covered by examples") {
  auto spec = evalkit::conference_spec(15, 9);
  spec.formats.resize(2);
  auto source = evalkit::generate_source(spec);
  auto examples = evalkit::examples_for(spec, source, "list", 2);
  auto more = evalkit::examples_for(spec, source, "table", 2);
  examples.insert(examples.end(), more.begin(), more.end());
  auto learned = learn_wrapper(source.documents, examples);
  CHECK(learned.wrapper.patterns.size() <= 2);
  auto row = evalkit::score(apply_wrapper(learned.wrapper, source.documents), source.records(), source.truth.size());
  CHECK(row.correct == source.truth.size());
  CHECK(row.retrieved == row.correct);
}

TEST_CASE("determinism of the fixpoint") {
  auto spec = evalkit::conference_spec(12, 21);
  auto source = evalkit::generate_source(spec);
  std::vector<ExampleInstance> examples;
  for (const auto& f : spec.formats) {
    auto some = evalkit::examples_for(spec, source, f.label, 3);
    examples.insert(examples.end(), some.begin(), some.end());
  }
  auto base = learn_wrapper(source.documents, examples).wrapper.to_json_text();

  std::mt19937_64 rng(2);
  for (int k = 0; k < 5; ++k) {
    auto shuffled = examples;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(learn_wrapper(source.documents, shuffled).wrapper.to_json_text() == base);
  }

  auto doubled = examples;
  doubled.push_back(examples.front());
  auto dup = learn_wrapper(source.documents, doubled);
  CHECK(dup.wrapper.to_json_text() == base);
  CHECK(dup.report.examples.back().status == "duplicate");

  WrapperLearner incremental(source.documents);
  for (const auto& ex : examples) incremental.add_example(ex);
  CHECK(incremental.wrapper().to_json_text() == base);
}

TEST_CASE("learn report") {
  auto spec = single_format(5, 2);
  auto source = evalkit::generate_source(spec);
  auto examples = evalkit::examples_for(spec, source, "list", 1);
  examples.push_back(instance({{"acronyme", "ZZZZZZZ"}, {"year", "1900"}}));
  examples.push_back(instance({{"acronyme", ""}}));
  auto learned = learn_wrapper(source.documents, examples);
  REQUIRE(learned.report.examples.size() == 3);
  CHECK(learned.report.examples[0].status == "ok");
  CHECK(learned.report.examples[1].status == "not_found");
  CHECK(learned.report.examples[2].status == "empty");
  CHECK(learned.report.usable == 1);

  CHECK_THROWS_AS(learn_wrapper(source.documents, {instance({{"acronyme", "ZZZZZZZ"}})}), LearnError);
}

TEST_CASE("wrapper json round trip") {
  auto spec = evalkit::conference_spec(10, 3);
  auto source = evalkit::generate_source(spec);
  std::vector<ExampleInstance> examples;
  for (const auto& f : spec.formats) {
    auto some = evalkit::examples_for(spec, source, f.label, 2);
    examples.insert(examples.end(), some.begin(), some.end());
  }
  auto w = learn_wrapper(source.documents, examples).wrapper;
  auto text = w.to_json_text();
  CHECK(text.back() == '\n');
  auto back = Wrapper::from_json_text(text);
  CHECK(back == w);
  CHECK(back.to_json_text() == text);

  using PT = PatternToken;
  Wrapper gapped;
  gapped.fields = {"a", "b"};
  gapped.patterns.push_back(Pattern{{PT::open("li"), PT::slot(0, 3), PT::gap(1, 2, {"-", ":"}), PT::slot(1, 1)}});
  CHECK(Wrapper::from_json_text(gapped.to_json_text()) == gapped);

  auto bad = text;
  bad.replace(bad.find(kTokenizerVersion), kTokenizerVersion.size(), "ierel-tokens/0");
  auto old = Wrapper::from_json_text(bad);
  CHECK_THROWS_AS(apply_wrapper(old, std::string("<li>x</li>")), VersionMismatch);
}

TEST_CASE("training recall on a few random corpora") {
  auto r = props::training_recall(10, 100);
  CHECK(r.corpora == 10);
  CHECK(r.located > 0);
  CHECK_MESSAGE(r.retrieved == r.located, r.first_failure);
}
