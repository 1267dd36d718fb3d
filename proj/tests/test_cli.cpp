#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"
#include "wexfab/evalkit.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Result cli(const std::vector<std::string>& args) {
  std::string cmd = "env -u WEXFAB_FIXTURES " + quote(WEXFAB_CLI);
  for (const auto& a : args) cmd += " " + quote(a);
  cmd += " 2>/dev/null";
  Result r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("wexfab-cli-" + std::to_string(getpid()) + "-" + std::to_string(rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string data(const std::string& rel) { return (oracle::data_dir() / rel).string(); }

}  // namespace

TEST_CASE("exit code table") {
  TempDir tmp;
  write(tmp.path / "props30", "/system/network.bandwidth = 30000\n");
  write(tmp.path / "broken.wdl", "<source name='x'><fetch name='a'></source>");

  struct Row {
    std::vector<std::string> args;
    int code;
    std::string needle;
  };
  std::vector<Row> rows = {
      {{"validate", data("tasks/google-task.wdl")}, 0, "ok google: 5 operators"},
      {{"validate", data("tasks/cyclic.wdl")}, 1, "CYCLE"},
      {{"validate", (tmp.path / "broken.wdl").string()}, 1, "error"},
      {{"validate", data("tasks/missing.wdl")}, 1, "error"},
      {{"run", data("tasks/google-task.wdl"), "--offline", data("fixtures/google")}, 0, "\"header-record\""},
      {{"run", data("tasks/passthrough.wdl")}, 0, "hello world"},
      {{"run", data("tasks/google-task.wdl"), "--offline", data("no-such-fixtures")}, 1, "does not exist"},
      {{"policy", "eval", "--policy", data("policies/bandwidth-policy.xml"), "--props",
        (tmp.path / "props30").string()},
       0,
       "Detach(VideoService)\nUpdate(AudioService, SoundEncoder=classLpc)\n"},
      {{"policy", "eval", "--policy", data("policies/bandwidth-policy.xml"), "--props",
        data("policies/bandwidth-40000.props")},
       0,
       "rule 1 not-triggered"},
      {{"policy", "eval", "--policy", data("policies/bandwidth-policy.xml"), "--props", data("tasks/passthrough.wdl")},
       1,
       ""},
      {{"frobnicate"}, 2, ""},
      {{"run"}, 2, ""},
      {{"validate", data("tasks/google-task.wdl"), "--bogus"}, 2, ""},
      {{}, 2, ""},
      {{"--help"}, 0, "validate"},
  };
  for (const auto& row : rows) {
    std::string joined;
    for (const auto& a : row.args) joined += a + " ";
    CAPTURE(joined);
    auto r = cli(row.args);
    CHECK(r.code == row.code);
    if (!row.needle.empty()) CHECK(r.out.find(row.needle) != std::string::npos);
  }
}

TEST_CASE("run report counters and determinism") {
  TempDir tmp;
  auto a = tmp.path / "a.json", b = tmp.path / "b.json";
  REQUIRE(cli({"run", data("tasks/google-task.wdl"), "--offline", data("fixtures/google"), "--report", a.string()}).code == 0);
  REQUIRE(cli({"run", data("tasks/google-task.wdl"), "--offline", data("fixtures/google"), "--report", b.string()}).code == 0);
  auto text = oracle::read(a);
  CHECK(text == oracle::read(b));
  auto j = nlohmann::json::parse(text);
  CHECK(j["operators"].size() == 5);
  CHECK(j["outputs"].size() == 5);
}

TEST_CASE("learn, extract and eval through the binary") {
  TempDir tmp;
  auto spec = wexfab::evalkit::conference_spec(10, 12);
  auto source = wexfab::evalkit::generate_source(spec);
  fs::create_directories(tmp.path / "docs");
  for (std::size_t i = 0; i < source.documents.size(); ++i) {
    write(tmp.path / "docs" / ("page" + std::to_string(i) + ".html"), source.documents[i]);
  }
  std::string examples, truth;
  for (const auto& f : spec.formats) {
    for (const auto& ex : wexfab::evalkit::examples_for(spec, source, f.label, 2)) {
      nlohmann::ordered_json j = nlohmann::ordered_json::object();
      for (const auto& [k, v] : ex.fields) j[k] = v;
      examples += j.dump() + "\n";
    }
  }
  for (const auto& r : source.records()) truth += r.to_json().dump() + "\n";
  write(tmp.path / "examples.jsonl", examples);
  write(tmp.path / "truth.jsonl", truth);

  auto wrapper = (tmp.path / "wrapper.json").string();
  auto learned = cli({"learn", "--corpus", (tmp.path / "docs").string(), "--examples",
                      (tmp.path / "examples.jsonl").string(), "--out", wrapper});
  CHECK(learned.code == 0);
  CHECK(learned.out.find("usable examples") != std::string::npos);

  auto out = (tmp.path / "records.jsonl").string();
  CHECK(cli({"extract", "--wrapper", wrapper, "--docs", (tmp.path / "docs").string(), "--out", out}).code == 0);
  std::size_t lines = 0;
  for (char c : oracle::read(out)) lines += c == '\n';
  CHECK(lines == source.truth.size());

  auto eval = cli({"eval", "--wrapper", wrapper, "--docs", (tmp.path / "docs").string(), "--truth",
                   (tmp.path / "truth.jsonl").string(), "--json", "--source", "synthetic"});
  CHECK(eval.code == 0);
  auto row = nlohmann::json::parse(eval.out);
  CHECK(row["recall"] == "1.00");
  CHECK(row["accuracy"] == "1.00");

  CHECK(cli({"extract", "--wrapper", (tmp.path / "truth.jsonl").string(), "--docs", (tmp.path / "docs").string()}).code ==
        1);
}

TEST_CASE("directive scenario through the binary") {
  TempDir tmp;
  auto registry = tmp.path / "registry.json";
  fs::copy_file(data("registries/dblp-session.json"), registry);
  auto task = tmp.path / "dblp.wdl";

  auto dry = cli({"policy", "apply", "--policy", data("policies/personalized-extraction.xml"), "--registry",
                  registry.string(), "--offline", data("fixtures/dblp"), "--dry-run"});
  CHECK(dry.code == 0);
  CHECK(dry.out.find("tchat") != std::string::npos);
  CHECK(oracle::read(registry) == oracle::read(data("registries/dblp-session.json")));

  auto applied = cli({"policy", "apply", "--policy", data("policies/personalized-extraction.xml"), "--registry",
                      registry.string(), "--offline", data("fixtures/dblp"), "--emit-task", task.string()});
  CHECK(applied.code == 0);
  auto reg = nlohmann::json::parse(oracle::read(registry));
  std::vector<std::string> names;
  for (const auto& s : reg["services"]) names.push_back(s["name"]);
  CHECK(names == std::vector<std::string>{"parse", "fetch", "extract", "db"});

  auto sink = tmp.path / "inserts.sql";
  auto run = cli({"run", task.string(), "--offline", data("fixtures/dblp"), "--registry", registry.string(), "--sink-out",
                  sink.string(), "--report", (tmp.path / "report.json").string()});
  CHECK(run.code == 0);
  CHECK(oracle::read(sink) == oracle::read(oracle::tests_dir() / "golden/dblp_inserts.sql"));

  auto stale = tmp.path / "stale.json";
  fs::copy_file(data("registries/dblp-session.json"), stale);
  CHECK(cli({"run", task.string(), "--offline", data("fixtures/dblp"), "--registry", stale.string()}).code == 1);
}
