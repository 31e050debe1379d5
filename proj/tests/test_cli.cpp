#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "refsel/corpus.hpp"

using namespace refsel;
namespace fs = std::filesystem;

namespace {

const std::string kTool = REFSEL_TOOL_PATH;

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  refsel::test::TempDir tmp("cli_run_out");
  const std::string out_file = tmp.file("stdout.txt");
  const std::string command = kTool + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(command.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = refsel::test::read_file(out_file);
  return r;
}

void write_fixture_corpus(const fs::path& dir) {
  CorpusSplit split;
  split.documents.push_back(refsel::test::table1_document());
  write_corpus(split, (dir / "fixture.jsonl").string());
}

}  // namespace

TEST_CASE("corpus validate exits 0 on a well-formed file and 2 on violations") {
  refsel::test::TempDir tmp("cli_validate");
  write_fixture_corpus(tmp.path());
  CHECK(run("corpus validate --path " + tmp.file("fixture.jsonl")).exit_code == 0);

  refsel::test::write_file(
      tmp.file("bad.jsonl"),
      R"({"doc_id":"d0","tokens":[{"kind":"word","surface":"x","sentence_index":0}],)"
      R"("mentions":[{"token_index":0,"entity_id":"x","form":"pronoun","syn":"subject"}]})"
      "\n");
  const RunResult r = run("corpus validate --path " + tmp.file("bad.jsonl"));
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("mention on non-entity token") != std::string::npos);

  CHECK(run("corpus validate --path /nonexistent/corpus.jsonl").exit_code == 1);
}

TEST_CASE("corpus stats prints the fixture record") {
  refsel::test::TempDir tmp("cli_stats");
  write_fixture_corpus(tmp.path());
  const RunResult r = run("corpus stats --path " + tmp.file("fixture.jsonl"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("mentions                 9") != std::string::npos);
  CHECK(r.output.find("0.6667") != std::string::npos);
}

TEST_CASE("corpus synth is byte-identical under one seed") {
  refsel::test::TempDir tmp("cli_synth");
  const std::string common = "corpus synth --docs 30 --seed 7 --out ";
  CHECK(run(common + tmp.file("a")).exit_code == 0);
  CHECK(run(common + tmp.file("b")).exit_code == 0);
  for (const char* name : {"train.jsonl", "dev.jsonl", "test.jsonl", "entities.json",
                           "manifest.json", "resolved.cfg"}) {
    const std::string a = refsel::test::read_file(tmp.file("a") + "/" + name);
    const std::string b = refsel::test::read_file(tmp.file("b") + "/" + name);
    CHECK(a == b);
    CHECK_FALSE(a.empty());
  }
  CHECK(run("corpus synth --docs 30 --seed 8 --out " + tmp.file("c")).exit_code == 0);
  CHECK(refsel::test::read_file(tmp.file("a") + "/train.jsonl") !=
        refsel::test::read_file(tmp.file("c") + "/train.jsonl"));
}

TEST_CASE("REFSEL_SEED environment variable sets the master seed") {
  refsel::test::TempDir tmp("cli_envseed");
  const int status = std::system(("REFSEL_SEED=7 " + kTool + " corpus synth --docs 10 --out " +
                                  tmp.file("env") + " > /dev/null 2>&1")
                                     .c_str());
  REQUIRE(WIFEXITED(status));
  REQUIRE(WEXITSTATUS(status) == 0);
  CHECK(run("corpus synth --docs 10 --seed 7 --out " + tmp.file("flag")).exit_code == 0);
  CHECK(refsel::test::read_file(tmp.file("env") + "/train.jsonl") ==
        refsel::test::read_file(tmp.file("flag") + "/train.jsonl"));
}

TEST_CASE("gradcheck passes at the default tolerance") {
  const RunResult r = run("gradcheck");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("conatt") != std::string::npos);
  CHECK(r.output.find("crnn") != std::string::npos);
  CHECK(r.output.find("FAIL") == std::string::npos);
  // an unattainable tolerance exits with the numerical-failure code
  CHECK(run("gradcheck --tolerance 1e-18").exit_code == 3);
}

TEST_CASE("train, evaluate, probe and report round-trip on a tiny corpus") {
  refsel::test::TempDir tmp("cli_pipeline");
  REQUIRE(run("corpus synth --docs 40 --seed 5 --out " + tmp.file("corpus")).exit_code == 0);
  const std::string corpus_flags = " --train " + tmp.file("corpus") + "/train.jsonl --dev " +
                                   tmp.file("corpus") + "/dev.jsonl --test " +
                                   tmp.file("corpus") + "/test.jsonl --meta " +
                                   tmp.file("corpus") + "/entities.json";

  const std::string train_args =
      "train" + corpus_flags +
      " --arch crnn --scheme 2-way --epochs 2 --runs 2 --hidden 6 --embedding-dim 6 "
      "--rep-dim 6 --attention-dim 6 --seed 11 --out ";
  REQUIRE(run(train_args + tmp.file("run_a")).exit_code == 0);

  SUBCASE("artifacts and manifest exist") {
    for (const char* name : {"eval_report.json", "eval_report.txt", "train_log.json",
                             "checkpoint_best.json", "manifest.json", "resolved.cfg"})
      CHECK(fs::exists(fs::path(tmp.file("run_a")) / name));
  }

  SUBCASE("rerunning with the same flags is byte-identical") {
    REQUIRE(run(train_args + tmp.file("run_b")).exit_code == 0);
    for (const char* name : {"eval_report.json", "train_log.json", "checkpoint_best.json"})
      CHECK(refsel::test::read_file(tmp.file("run_a") + "/" + name) ==
            refsel::test::read_file(tmp.file("run_b") + "/" + name));
  }

  SUBCASE("rerunning from the manifest's resolved config is byte-identical") {
    // out dir comes from the config file; override it on the command line
    REQUIRE(run("train --config " + tmp.file("run_a") + "/resolved.cfg --out " +
                tmp.file("run_c"))
                .exit_code == 0);
    CHECK(refsel::test::read_file(tmp.file("run_a") + "/eval_report.json") ==
          refsel::test::read_file(tmp.file("run_c") + "/eval_report.json"));
  }

  SUBCASE("evaluate consumes the checkpoint and enforces the scheme") {
    const std::string ckpt = tmp.file("run_a") + "/checkpoint_best.json";
    REQUIRE(run("evaluate --checkpoint " + ckpt + " --data " + tmp.file("corpus") +
                "/test.jsonl --out " + tmp.file("eval"))
                .exit_code == 0);
    CHECK(fs::exists(fs::path(tmp.file("eval")) / "evaluation.json"));
    CHECK(fs::exists(fs::path(tmp.file("eval")) / "confusion.tsv"));
    CHECK(fs::exists(fs::path(tmp.file("eval")) / "confusion.svg"));
    CHECK(run("evaluate --checkpoint " + ckpt + " --data " + tmp.file("corpus") +
              "/test.jsonl --scheme 4-way --out " + tmp.file("eval_bad"))
              .exit_code == 1);
    REQUIRE(run("evaluate --checkpoint " + ckpt + " --data " + tmp.file("corpus") +
                "/test.jsonl --out " + tmp.file("eval2"))
                .exit_code == 0);
    CHECK(refsel::test::read_file(tmp.file("eval") + "/evaluation.json") ==
          refsel::test::read_file(tmp.file("eval2") + "/evaluation.json"));
  }

  SUBCASE("probe emits the grid with eight task columns") {
    const std::string ckpt = tmp.file("run_a") + "/checkpoint_best.json";
    const RunResult r = run("probe --checkpoint " + ckpt + corpus_flags +
                            " --trainings 2 --max-iters 40 --seed 3 --out " + tmp.file("probe"));
    REQUIRE(r.exit_code == 0);
    for (const char* task :
         {"DisStat", "SenStat", "Syn", "DistAnt", "IntRef", "LocPro", "GloPro", "MetaPro"})
      CHECK(r.output.find(task) != std::string::npos);
    CHECK(fs::exists(fs::path(tmp.file("probe")) / "probe_report.json"));

    // report re-renders the stored grid identically
    const RunResult rr = run("report --dir " + tmp.file("probe"));
    CHECK(rr.exit_code == 0);
    const std::string grid = refsel::test::read_file(tmp.file("probe") + "/probe_grid.txt");
    CHECK(rr.output.find(grid) != std::string::npos);
  }

  SUBCASE("missing checkpoint fails with a usage error") {
    CHECK(run("evaluate --checkpoint /nonexistent.json --data " + tmp.file("corpus") +
              "/test.jsonl --out " + tmp.file("x"))
              .exit_code == 1);
  }
}

TEST_CASE("importance subcommands write their artifact sets") {
  refsel::test::TempDir tmp("cli_importance");
  REQUIRE(run("corpus synth --docs 60 --seed 9 --out " + tmp.file("corpus")).exit_code == 0);
  const std::string corpus_flags = " --train " + tmp.file("corpus") + "/train.jsonl --dev " +
                                   tmp.file("corpus") + "/dev.jsonl --test " +
                                   tmp.file("corpus") + "/test.jsonl --meta " +
                                   tmp.file("corpus") + "/entities.json";

  const RunResult perm = run("importance permute" + corpus_flags +
                             " --scheme 2-way --rounds 10 --reps 3 --seed 4 --out " +
                             tmp.file("perm"));
  REQUIRE(perm.exit_code == 0);
  for (const char* name :
       {"importance.json", "importance.tsv", "importance.txt", "importance.svg", "manifest.json"})
    CHECK(fs::exists(fs::path(tmp.file("perm")) / name));
  CHECK(perm.output.find("dis_stat") != std::string::npos);

  const std::string shap_args = "importance shapley" + corpus_flags +
                                " --scheme 2-way --rounds 10 --orderings 20 --background 20 "
                                "--seed 4 --out ";
  const RunResult shap = run(shap_args + tmp.file("shap"));
  REQUIRE(shap.exit_code == 0);
  for (const char* name : {"shapley.json", "shapley.tsv", "shapley.txt", "shapley_box.svg"})
    CHECK(fs::exists(fs::path(tmp.file("shap")) / name));
  REQUIRE(run(shap_args + tmp.file("shap2")).exit_code == 0);
  CHECK(refsel::test::read_file(tmp.file("shap") + "/shapley.json") ==
        refsel::test::read_file(tmp.file("shap2") + "/shapley.json"));

  // byte-identical reruns
  REQUIRE(run("importance permute" + corpus_flags +
              " --scheme 2-way --rounds 10 --reps 3 --seed 4 --out " + tmp.file("perm2"))
              .exit_code == 0);
  CHECK(refsel::test::read_file(tmp.file("perm") + "/importance.json") ==
        refsel::test::read_file(tmp.file("perm2") + "/importance.json"));
}

TEST_CASE("feature tables export alongside the importance run") {
  refsel::test::TempDir tmp("cli_export");
  REQUIRE(run("corpus synth --docs 30 --seed 2 --out " + tmp.file("corpus")).exit_code == 0);
  const RunResult r = run("importance permute --train " + tmp.file("corpus") +
                          "/train.jsonl --dev " + tmp.file("corpus") + "/dev.jsonl --test " +
                          tmp.file("corpus") + "/test.jsonl --meta " + tmp.file("corpus") +
                          "/entities.json --scheme 2-way --rounds 4 --reps 2 --seed 1 "
                          "--export-features " +
                          tmp.file("out") + "/features --out " + tmp.file("out"));
  REQUIRE(r.exit_code == 0);
  const std::string table = refsel::test::read_file(tmp.file("out") + "/features_train.tsv");
  CHECK(table.find("doc_id\tmention_index\tdis_stat") == 0);
  CHECK(fs::exists(tmp.file("out") + "/features_test.tsv"));
}

TEST_CASE("training consumes a pretrained embedding file") {
  refsel::test::TempDir tmp("cli_pretrained");
  REQUIRE(run("corpus synth --docs 30 --seed 3 --out " + tmp.file("corpus")).exit_code == 0);
  // vectors for two corpus tokens plus one unknown token
  std::ostringstream vectors;
  for (const char* token : {"Entity_0", "and", "zzz_unused"}) {
    vectors << token;
    for (int j = 0; j < 6; ++j) vectors << " " << 0.125 * (j + 1);
    vectors << "\n";
  }
  refsel::test::write_file(tmp.file("vectors.txt"), vectors.str());
  const RunResult r = run("train --train " + tmp.file("corpus") + "/train.jsonl --dev " +
                          tmp.file("corpus") + "/dev.jsonl --test " + tmp.file("corpus") +
                          "/test.jsonl --arch conatt --scheme 2-way --epochs 1 --runs 1 "
                          "--hidden 6 --embedding-dim 6 --rep-dim 6 --attention-dim 6 "
                          "--embeddings " +
                          tmp.file("vectors.txt") + " --seed 2 --out " + tmp.file("run"));
  REQUIRE(r.exit_code == 0);
  const std::string log = refsel::test::read_file(tmp.file("run") + "/train_log.json");
  CHECK(log.find("embedding_coverage") != std::string::npos);

  // a dimension mismatch is a validation failure
  refsel::test::write_file(tmp.file("short.txt"), "Entity_0 1 2 3\n");
  CHECK(run("train --train " + tmp.file("corpus") + "/train.jsonl --dev " + tmp.file("corpus") +
            "/dev.jsonl --test " + tmp.file("corpus") +
            "/test.jsonl --arch crnn --scheme 2-way --epochs 1 --runs 1 --hidden 6 "
            "--embedding-dim 6 --rep-dim 6 --attention-dim 6 --embeddings " +
            tmp.file("short.txt") + " --out " + tmp.file("bad"))
            .exit_code == 2);
}

TEST_CASE("usage errors exit with code 1") {
  CHECK(run("").exit_code == 1);            // missing subcommand
  CHECK(run("corpus").exit_code == 1);      // missing sub-subcommand
  CHECK(run("train --train x").exit_code == 1);  // missing required flags
  CHECK(run("no_such_command").exit_code == 1);
}
