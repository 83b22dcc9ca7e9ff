#include "cli.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "fixtures.hpp"
#include "humancorpus/manifest.hpp"
#include "humancorpus/record.hpp"

namespace hc = humancorpus;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args, const std::string& stdin_text = {}) {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  const int code = hc::cli::run(args, {in, out, err});
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    raw_ = dir_.file("raw.jsonl");
    hc::write_manifest(fixtures::raw_corpus(60, 8), raw_);
  }
  std::string path(const std::string& name) const { return dir_.file(name); }

  fixtures::TempDir dir_;
  std::string raw_;
};

}  // namespace

TEST_F(CliTest, UnknownSubcommandIsUsageError) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("frobnicate"), std::string::npos);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"filter", "--no-such-flag"}).code, 2);
}

TEST_F(CliTest, FilterWritesReportBesideOutput) {
  const auto r = run({"filter", "-i", raw_, "-o", path("sel.jsonl"), "--rejects", path("rej.jsonl"),
                      "-q"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto report = hc::Json::parse(fixtures::read_file(path("sel.jsonl.report.json")));
  EXPECT_EQ(report["command"], "filter");
  const auto passed = hc::read_manifest(path("sel.jsonl")).size();
  const auto rejected = hc::read_manifest(path("rej.jsonl")).size();
  EXPECT_EQ(passed + rejected, 60u);
  EXPECT_EQ(report["result"]["input"], 60);
  EXPECT_EQ(report["result"]["passed"], passed);
  EXPECT_EQ(report["inputs"][0]["sha256"].get<std::string>().size(), 64u);
}

TEST_F(CliTest, SynthTwiceIsByteIdentical) {
  ASSERT_EQ(run({"filter", "-i", raw_, "-o", path("sel.jsonl"), "-q"}).code, 0);
  for (const char* out : {"a.jsonl", "b.jsonl"}) {
    const auto r = run({"synth", "-i", path("sel.jsonl"), "-o", path(out), "--seed", "42", "-q"});
    ASSERT_EQ(r.code, 0) << r.err;
  }
  const auto a = fixtures::read_file(path("a.jsonl"));
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, fixtures::read_file(path("b.jsonl")));
  const auto c_run = run({"synth", "-i", path("sel.jsonl"), "-o", path("c.jsonl"), "--seed", "43",
                          "-q"});
  ASSERT_EQ(c_run.code, 0);
  EXPECT_NE(a, fixtures::read_file(path("c.jsonl")));
}

TEST_F(CliTest, StdinToStdoutStreams) {
  const auto raw = fixtures::read_file(raw_);
  const auto r = run({"filter", "-i", "-", "-q"}, raw);
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream back(r.out);
  EXPECT_FALSE(hc::read_manifest(back).empty());
  EXPECT_NE(r.err.find("\"command\""), std::string::npos);
}

TEST_F(CliTest, SchemaErrorsExitOneWithJson) {
  fixtures::write_file(path("bad.jsonl"),
                       "{\"id\":\"a\",\"image\":\"x\",\"attrs\":[{\"name\":\"Smiling\",\"p\":1.5}]}\n");
  const auto r = run({"filter", "-i", path("bad.jsonl"), "-o", path("o.jsonl")});
  EXPECT_EQ(r.code, 1);
  const auto j = hc::Json::parse(r.err.substr(r.err.find('{')));
  EXPECT_EQ(j["error"]["code"], "schema");
  EXPECT_NE(j["error"]["message"].get<std::string>().find("'p'"), std::string::npos);
}

TEST_F(CliTest, ConfigErrorsAreUsageErrors) {
  EXPECT_EQ(run({"filter", "-i", raw_, "--set", "filter.min_face_conf=3"}).code, 2);
  fixtures::write_file(path("c.toml"), "[filter]\nmin_face_side = 10\n");
  EXPECT_EQ(run({"filter", "-i", raw_, "-o", path("o.jsonl"), "-c", path("c.toml"), "-q"}).code, 0);
}

TEST_F(CliTest, StatsWithCsv) {
  ASSERT_EQ(run({"filter", "-i", raw_, "-o", path("sel.jsonl"), "-q"}).code, 0);
  const auto r = run({"stats", "-i", path("sel.jsonl"), "--field", "global_caption", "-o",
                      path("stats.json"), "--curve", "50,100", "--csv-prefix", path("st"), "-q"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = hc::Json::parse(fixtures::read_file(path("stats.json")));
  EXPECT_EQ(j["field"], "global_caption");
  EXPECT_EQ(j["ngram_curve"].size(), 2u);
  const auto cum = fixtures::read_file(path("st.cumulative.csv"));
  EXPECT_EQ(cum.rfind("words,cumulative_share\n", 0), 0u);
  EXPECT_NE(cum.find(",1\n"), std::string::npos);
  EXPECT_EQ(fixtures::read_file(path("st.ngrams.csv")).rfind("pct,unique_ngrams\n50,", 0), 0u);
}

TEST_F(CliTest, InspectSamples) {
  const auto r = run({"inspect", "-i", raw_, "-n", "5", "--seed", "3", "-q"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto again = run({"inspect", "-i", raw_, "-n", "5", "--seed", "3", "-q"});
  EXPECT_EQ(r.out, again.out);
}

TEST(Digest, KnownVector) {
  EXPECT_EQ(hc::cli::sha256_hex("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
