#include "doctest.h"
#include "oracles.hpp"
#include "wexfab/dom.hpp"
#include "wexfab/url.hpp"
#include "wexfab/wetdl.hpp"

using namespace wexfab;

namespace {

std::vector<std::string> codes(const std::vector<wetdl::Diagnostic>& ds) {
  std::vector<std::string> out;
  for (const auto& d : ds) out.push_back(d.code);
  return out;
}

bool has_code(const std::vector<wetdl::Diagnostic>& ds, const std::string& code) {
  auto c = codes(ds);
  return std::find(c.begin(), c.end(), code) != c.end();
}

}  // namespace

TEST_CASE("xml parse builds the tree") {
  auto doc = dom::parse_xml("<r><a/></r>");
  REQUIRE(doc.document_element());
  CHECK(doc.document_element()->name() == "r");
  CHECK(doc.document_element()->elements().size() == 1);
}

TEST_CASE("xml parse reports position on malformed input") {
  try {
    dom::parse_xml("<r>\n  <a></b>\n</r>");
    FAIL("expected ParseError");
  } catch (const dom::ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(dom::parse_xml("<a x=1/>"), dom::ParseError);
  CHECK_NOTHROW(dom::parse_xml("<a x=1 y, z='2'/>", {true}));
}

TEST_CASE("html parse repairs unclosed items") {
  auto doc = dom::parse_html("<UL><li>one<li>two</ul><p>x</b>");
  const auto* html = doc.document_element();
  REQUIRE(html);
  std::vector<std::string> items;
  auto walk = [&](auto&& self, const dom::Node& n) -> void {
    if (n.is_element() && n.name() == "li") items.push_back(n.text_content());
    for (const auto& c : n.children()) self(self, *c);
  };
  walk(walk, doc.root());
  CHECK(items == std::vector<std::string>{"one", "two"});
}

TEST_CASE("entity decoding") {
  CHECK(dom::decode_entities("&#39;s &amp; &lt;&#x41;&gt; &bogus;") == "'s & <A> &bogus;");
}

TEST_CASE("url normalization") {
  CHECK(normalize_url("HTTP://WWW.Example.COM:80/a?x=1#f") == std::optional<std::string>("http://www.example.com/a?x=1"));
  CHECK(normalize_url("http://dblp.uni-trier.de") == std::optional<std::string>("http://dblp.uni-trier.de/"));
  CHECK(normalize_url("https://h:443") == std::optional<std::string>("https://h/"));
  CHECK(normalize_url("http://h:8080/p") == std::optional<std::string>("http://h:8080/p"));
  CHECK_FALSE(normalize_url("/relative").has_value());
}

TEST_CASE("form encoding agrees with the oracle") {
  for (std::string s : {"tina arch", "a&b=c", "~user/x.y_z-1", "100%", "caf\xc3\xa9", "+plus", ""}) {
    CHECK(form_encode(s) == oracle::form_encode(s));
  }
}

TEST_CASE("dblp header snippet") {
  auto parsed = wetdl::parse_task(R"(<?xml version="1.0" ?>
<!DOCTYPE ws:source SYSTEM
"/usr/local/share/perl/5.8.0/WebSource/websource.dtd" >
  <ws:source name="dblp.uni-trier.de">
    <ws:dummy name="init" forward-to="fl">
      <data>http://dblp.uni-trier.de</data>
    </ws:dummy>
  </ws:source>)");
  CHECK(parsed.diagnostics.empty());
  CHECK(parsed.network.source_name == "dblp.uni-trier.de");
  REQUIRE(parsed.network.operators.size() == 1);
  CHECK(parsed.network.operators[0].inline_data == std::vector<std::string>{"http://dblp.uni-trier.de"});
  CHECK(parsed.network.operators[0].forward_to == std::vector<std::string>{"fl"});
  CHECK(codes(wetdl::validate_network(parsed.network)) == std::vector<std::string>{"UNRESOLVED_EDGE"});
}

TEST_CASE("empty source") {
  auto parsed = wetdl::parse_task(R"(<source name="empty"/>)");
  CHECK(parsed.network.operators.empty());
  CHECK(parsed.network.entry_points().empty());
  CHECK(wetdl::validate_network(parsed.network).empty());
}

TEST_CASE("structural diagnostics") {
  auto dup = wetdl::parse_task(R"(<source name="s"><dummy name="a"/><fetch name="a"/></source>)");
  CHECK(dup.diagnostics.empty());
  CHECK(has_code(wetdl::validate_network(dup.network), "DUP_NAME"));

  auto unknown = wetdl::parse_task(R"(<source name="s"><crawl name="a"/></source>)");
  CHECK(has_code(unknown.diagnostics, "UNKNOWN_OPERATOR"));

  auto unnamed = wetdl::parse_task(R"(<source name="s"><fetch/></source>)");
  CHECK(has_code(unnamed.diagnostics, "MISSING_NAME"));

  auto ghost = wetdl::parse_task(R"(<source name="s"><fetch name="a" forward-to="ghost"/></source>)");
  CHECK(codes(wetdl::validate_network(ghost.network)) == std::vector<std::string>{"UNRESOLVED_EDGE"});

  CHECK_THROWS_AS(wetdl::parse_task("<source name='s'><fetch name='a'></source>"), dom::ParseError);
}

TEST_CASE("cycle is reported once") {
  auto parsed = wetdl::parse_task(oracle::read(oracle::data_dir() / "tasks/cyclic.wdl"));
  CHECK(parsed.diagnostics.empty());
  auto diags = wetdl::validate_network(parsed.network);
  CHECK(codes(diags) == std::vector<std::string>{"CYCLE"});
  CHECK_THROWS_AS(wetdl::serialize_task(parsed.network), wetdl::InvalidNetwork);
}

TEST_CASE("google task validates as a five-operator chain") {
  auto parsed = wetdl::parse_task(oracle::read(oracle::data_dir() / "tasks/google-task.wdl"));
  CHECK(parsed.diagnostics.empty());
  CHECK(wetdl::validate_network(parsed.network).empty());
  CHECK(parsed.network.operators.size() == 5);
  CHECK(parsed.network.entry_points() == std::vector<std::string>{"google-query"});
}

TEST_CASE("param forms and map keys") {
  auto parsed = wetdl::parse_task(oracle::read(oracle::data_dir() / "fixtures/dblp/bodies/wsper.wdl"));
  CHECK(parsed.diagnostics.empty());
  const auto* rec = parsed.network.find("conference-record");
  REQUIRE(rec);
  REQUIRE(rec->param("map"));
  CHECK(*rec->param("map") == "acronyme\nyear\ncity\nprovince\ncountry");
  const auto* db = parsed.network.find("db");
  REQUIRE(db);
  REQUIRE(db->query_template);
  CHECK(db->query_template->find("INSERT INTO conference") != std::string::npos);

  auto text_form = wetdl::parse_task(oracle::read(oracle::data_dir() / "tasks/passthrough.wdl"));
  REQUIRE(text_form.network.find("echo"));
  CHECK(*text_form.network.find("echo")->param("template") == "$_text");
}

TEST_CASE("serialized params use the param element") {
  wetdl::TaskNetwork net;
  net.source_name = "s";
  wetdl::OperatorSpec q;
  q.kind = wetdl::OperatorKind::Query;
  q.name = "q";
  q.params.push_back({"q", "tina"});
  net.operators.push_back(q);
  auto xml = wetdl::serialize_task(net);
  CHECK(xml.find(R"(<param name="q" value="tina"/>)") != std::string::npos);
}

TEST_CASE("round trip of every shipped task file") {
  std::vector<std::filesystem::path> files = {oracle::data_dir() / "tasks/google-task.wdl",
                                              oracle::data_dir() / "tasks/passthrough.wdl",
                                              oracle::data_dir() / "fixtures/dblp/bodies/wsper.wdl"};
  for (const auto& f : files) {
    CAPTURE(f.string());
    auto first = wetdl::parse_task(oracle::read(f));
    REQUIRE(first.diagnostics.empty());
    auto text = wetdl::serialize_task(first.network);
    auto second = wetdl::parse_task(text);
    CHECK(second.network == first.network);
    CHECK(wetdl::serialize_task(second.network) == text);
    CHECK(text.find("<parameters") == std::string::npos);
  }
}
