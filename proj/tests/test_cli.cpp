#include <doctest.h>

#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "botdna/ingest.hpp"
#include "botdna/png.hpp"
#include "botdna/synth.hpp"
#include "helpers.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct RunResult {
  int code = 0;
  std::string out;
  std::string err;
};

// Runs the CLI from `dir`, capturing stdout and stderr.
RunResult run(const fs::path& dir, const std::string& args, const std::string& env = "") {
  const std::string cmd = "cd '" + dir.string() + "' && " + env + " '" BOTDNA_CLI "' " + args +
                          " > stdout.txt 2> stderr.txt";
  RunResult r;
  const int status = std::system(cmd.c_str());
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = botdna::read_binary_file(dir / "stdout.txt");
  r.err = botdna::read_binary_file(dir / "stderr.txt");
  return r;
}

json read_json(const fs::path& p) { return json::parse(botdna::read_binary_file(p)); }

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

}  // namespace

TEST_CASE("bundled fixture matches its generator") {
  const auto parsed = botdna::parse_jsonl(BOTDNA_FIXTURE);
  CHECK(parsed.warnings.empty());
  CHECK(parsed.records == botdna::synth::fixture_corpus());
}

TEST_CASE("cli: ingest, encode, render, lcs on the fixture") {
  const auto dir = testing::scratch_dir("cli_pipeline");
  auto r = run(dir, "ingest --input '" BOTDNA_FIXTURE "' --out ing --seed 7");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("users: 12") != std::string::npos);
  const auto summary = read_json(dir / "ing/ingest_summary.json");
  CHECK(summary["users"] == 12);
  CHECK(summary["splits"]["train"]["total"].get<int>() + summary["splits"]["val"]["total"].get<int>() +
            summary["splits"]["test"]["total"].get<int>() ==
        12);
  const auto first = botdna::read_binary_file(dir / "ing/corpus.jsonl");
  REQUIRE(run(dir, "ingest --input '" BOTDNA_FIXTURE "' --out ing --seed 7").code == 0);
  CHECK(botdna::read_binary_file(dir / "ing/corpus.jsonl") == first);

  REQUIRE(run(dir, "encode-dna --corpus ing/corpus.jsonl --alphabet type3 --out dna").code == 0);
  REQUIRE(run(dir, "encode-dna --corpus ing/corpus.jsonl --alphabet content5 --out dna").code == 0);
  CHECK(count_lines(dir / "dna/dna.type3.jsonl") == 12);
  CHECK(read_json(dir / "dna/dna.type3.meta.json")["max_len"] == 200);
  {
    std::ifstream a(dir / "dna/dna.type3.jsonl"), b(dir / "dna/dna.content5.jsonl");
    std::string la, lb;
    while (std::getline(a, la) && std::getline(b, lb)) {
      const auto ja = json::parse(la), jb = json::parse(lb);
      CHECK(ja["seq"].get<std::string>().size() == jb["seq"].get<std::string>().size());
      CHECK(jb["alphabet"] == "Content5");
    }
  }
  r = run(dir, "encode-dna --corpus ing/corpus.jsonl --alphabet type4 --out dna");
  CHECK(r.code != 0);

  REQUIRE(run(dir, "render-images --dna dna/dna.type3.jsonl --out img").code == 0);
  REQUIRE(run(dir, "render-images --dna dna/dna.type3.jsonl --out img2").code == 0);
  CHECK(count_lines(dir / "img/manifest.tsv") == 13);
  std::size_t pngs = 0;
  for (const auto& e : fs::directory_iterator(dir / "img")) {
    if (e.path().extension() != ".png") continue;
    ++pngs;
    CHECK(botdna::read_binary_file(e.path()) == botdna::read_binary_file(dir / "img2" / e.path().filename()));
  }
  CHECK(pngs == 12);
  r = run(dir, "render-images --dna dna/dna.type3.jsonl --palette A=10,C=10,T=30 --out img3");
  CHECK(r.code == 1);
  CHECK(r.err.find("error:") == 0);
  REQUIRE(run(dir, "render-images --dna dna/dna.type3.jsonl --raw --out img4").code == 0);
  CHECK(fs::exists(dir / "img4/u01.Type3.bdna"));

  REQUIRE(run(dir, "lcs-curve --dna dna/dna.type3.jsonl --out lcs").code == 0);
  CHECK(count_lines(dir / "lcs/lcs_curve.tsv") == 12);
  const auto verdict = read_json(dir / "lcs/verdict.json");
  CHECK(verdict["bot_group"].size() == verdict["split_k"].get<std::size_t>());
}

TEST_CASE("cli: empty input, lcs edge cases and config validation") {
  const auto dir = testing::scratch_dir("cli_errors");
  botdna::write_binary_file(dir / "empty.jsonl", "");
  auto r = run(dir, "ingest --input empty.jsonl --out x");
  CHECK(r.code == 1);
  CHECK(r.err.find("empty") != std::string::npos);

  botdna::write_binary_file(dir / "bad.jsonl",
                            R"({"user_id":"a","description":"d","tweets":[{"id":"1","created_at":1,"kind":"quote"}]})"
                            "\n");
  r = run(dir, "ingest --input bad.jsonl --out x");
  CHECK(r.err.find("unknown kind 'quote' at line 1") != std::string::npos);

  botdna::write_binary_file(dir / "one.jsonl", R"({"user_id":"a","alphabet":"Type3","seq":"ACT"})" "\n");
  r = run(dir, "lcs-curve --dna one.jsonl --out l1");
  CHECK(r.code == 1);
  botdna::write_binary_file(dir / "same.jsonl", R"({"user_id":"a","alphabet":"Type3","seq":"ACTTA"})"
                                                "\n"
                                                R"({"user_id":"b","alphabet":"Type3","seq":"ACTTA"})"
                                                "\n"
                                                R"({"user_id":"c","alphabet":"Type3","seq":"ACTTA"})"
                                                "\n");
  REQUIRE(run(dir, "lcs-curve --dna same.jsonl --out l3").code == 0);
  CHECK(botdna::read_binary_file(dir / "l3/lcs_curve.tsv") == "k\tlcs_len\tmembers\n2\t5\ta,b\n3\t5\ta,b,c\n");
  CHECK(read_json(dir / "l3/verdict.json")["bot_group"].empty());

  botdna::write_binary_file(dir / "cfg.json", R"({"input":"x.jsonl","colour":"red"})");
  r = run(dir, "ingest --config cfg.json --out x");
  CHECK(r.err.find("unknown config key 'colour'") != std::string::npos);

  r = run(dir, "synth fixture --out s", "BOTDNA_THREADS=zero");
  CHECK(r.code == 1);
  CHECK(r.err.find("BOTDNA_THREADS") != std::string::npos);
  CHECK(run(dir, "synth fixture --out s", "BOTDNA_THREADS=1").code == 0);
}

TEST_CASE("cli: train, evaluate and predict round trip") {
  const auto dir = testing::scratch_dir("cli_train");
  REQUIRE(run(dir, "synth xor --out data").code == 0);
  const std::string common =
      "--corpus data/xor.jsonl --features data/xor_features.bwts --encoder precomputed --fusion crossmodal";
  auto r = run(dir, "train " + common + " --seed 1 --max-epochs 2 --lr 1e-3 --out a");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  REQUIRE(run(dir, "train " + common + " --seed 1 --max-epochs 2 --lr 1e-3 --out b").code == 0);
  const auto report = botdna::read_binary_file(dir / "a/report.json");
  CHECK(report.size() > 100);
  REQUIRE(run(dir, "train " + common + " --seed 1 --max-epochs 2 --lr 1e-3 --out a").code == 0);
  CHECK(botdna::read_binary_file(dir / "a/report.json") == report);
  CHECK(read_json(dir / "a/report.json")["report"] == read_json(dir / "b/report.json")["report"]);
  CHECK(botdna::read_binary_file(dir / "a/model.seed1.bwts") == botdna::read_binary_file(dir / "b/model.seed1.bwts"));
  CHECK(botdna::read_binary_file(dir / "a/report.md").find("| Cross-Modal Attention |") != std::string::npos);

  r = run(dir, "evaluate --checkpoint a/model.seed1.bwts --corpus data/xor.jsonl --features data/xor_features.bwts --out ev");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(read_json(dir / "ev/evaluation.json")["matches_stored"] == true);

  r = run(dir, "predict --checkpoint a/model.seed1.bwts --corpus data/xor.jsonl --features data/xor_features.bwts --user x0001");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(r.out.find("user_id\tlabel\tp_human\tp_bot\nx0001\t") == 0);
  r = run(dir, "predict --checkpoint a/model.seed1.bwts --corpus data/xor.jsonl --features data/xor_features.bwts --user u99");
  CHECK(r.code == 1);
  CHECK(r.err.find("user u99 absent") != std::string::npos);
}

TEST_CASE("cli: toy training on the fixture writes a report") {
  const auto dir = testing::scratch_dir("cli_toy");
  REQUIRE(run(dir, "ingest --input '" BOTDNA_FIXTURE "' --out ing --seed 3").code == 0);
  auto r = run(dir, "train --corpus ing/corpus.jsonl --fusion concat --seed 0 --max-epochs 1 --out t");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto report = read_json(dir / "t/report.json");
  CHECK(report["report"]["runs"].size() == 1);
  CHECK(report["config"]["train"]["lr"] == 1e-5);
  CHECK(report["inputs"]["corpus"]["fnv1a64"].get<std::string>().size() == 16);
}
