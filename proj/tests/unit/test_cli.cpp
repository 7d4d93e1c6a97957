#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <regex>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "dman/cli/app.hpp"
#include "dman/cli/commands.hpp"
#include "dman/cli/manifest.hpp"
#include "dman/io/checkpoint.hpp"

using namespace dman;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

const fs::path kData = DMAN_ACCEPTANCE_DATA;

class Cli : public ::testing::Test {
 protected:
  static fs::path root, suite, dmp;

  static void SetUpTestSuite() {
    root = fs::temp_directory_path() / ("dman-test-cli-" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    suite = root / "suite";
    dmp = root / "dmp";
    ASSERT_EQ(run({"--run-dir", suite.string(), "make-synthetic", "--dmp-train", "80", "--dmp-val", "20",
                   "--nli-train", "18", "--nli-dev", "9"})
                  .code,
              0);
    ASSERT_EQ(run({"--run-dir", dmp.string(), "train-dmp", "--train", (suite / "dmp_train.tsv").string(),
                   "--embeddings", (suite / "embeddings.txt").string(), "--hidden", "3", "--epochs", "1"})
                  .code,
              0);
  }
  static void TearDownTestSuite() { fs::remove_all(root); }

  fs::path dir(const std::string& name) const { return root / name; }

  std::vector<std::string> nli(const std::string& out, std::vector<std::string> extra = {}) const {
    std::vector<std::string> a = {"--run-dir", dir(out).string(), "train-nli", "--train",
                                  (suite / "nli_train.jsonl").string(), "--dev", (suite / "nli_dev.jsonl").string(),
                                  "--epochs", "1", "--batch-size", "6"};
    if (std::find(extra.begin(), extra.end(), "--hidden") == extra.end()) extra.insert(extra.end(), {"--hidden", "3"});
    a.insert(a.end(), extra.begin(), extra.end());
    return a;
  }

  // Marker checkpoint whose encoder weights are NaN.
  fs::path poisoned_dmp() const {
    const fs::path p = root / "poisoned.ckpt";
    auto ckpt = read_checkpoint((dmp / "dmp.ckpt").string());
    for (auto& [name, t] : ckpt.tensors) {
      if (name.rfind("encoder.", 0) == 0) {
        for (auto& v : t.mutable_values()) v = std::numeric_limits<Real>::quiet_NaN();
      }
    }
    write_checkpoint(p.string(), ckpt);
    return p;
  }
};

fs::path Cli::root, Cli::suite, Cli::dmp;

}  // namespace

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"stats"}).code, 1);
  EXPECT_EQ(run({"train-nli", "--train", "a", "--dev", "b", "--rl-mode", "greedy"}).code, 1);
  EXPECT_EQ(run({"--seed", "x", "stats", "--input", "a"}).code, 1);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  for (const char* verb : {"extract-markers", "train-dmp", "train-nli", "eval", "ensemble-eval", "ablate", "stats",
                           "dump-attention"}) {
    EXPECT_NE(help.out.find(verb), std::string::npos) << verb;
  }
}

TEST_F(Cli, MissingInputIsIoErrorWithManifest) {
  const auto r = run({"--run-dir", dir("missing").string(), "train-dmp", "--train", "/nonexistent/pairs.tsv"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/pairs.tsv"), std::string::npos);
  const auto m = read_json(dir("missing") / "manifest.json");
  EXPECT_EQ(m["exit_code"], 2);
  EXPECT_EQ(m["command"], "train-dmp");
}

TEST_F(Cli, ManifestRecordsInputs) {
  write_file(dir("abc.jsonl"), "");
  fs::create_directories(dir("abc"));
  write_file(dir("abc") / "input.txt", "abc");
  ASSERT_EQ(run({"--seed", "9", "--run-dir", dir("hash").string(), "extract-markers", "--input",
                 (dir("abc") / "input.txt").string()})
                .code,
            3);
  const auto m = read_json(dir("hash") / "manifest.json");
  ASSERT_EQ(m["inputs"].size(), 1u);
  EXPECT_EQ(m["inputs"][0]["sha256"], "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(m["inputs"][0]["bytes"], 3);
  EXPECT_EQ(m["seed"], 9);
  EXPECT_EQ(m["version"], cli::artifact_version());
  EXPECT_EQ(m["args"][0], "--seed");
  EXPECT_TRUE(std::regex_match(m["started_at"].get<std::string>(),
                               std::regex(R"(\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ)")));
}

TEST_F(Cli, TimestampedRunDirectories) {
  const auto runs = dir("runs");
  for (int i = 0; i < 2; ++i) {
    ASSERT_EQ(run({"--seed", "4", "--runs-root", runs.string(), "stats", "--input", (kData / "stats20.jsonl").string()})
                  .code,
              0);
  }
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(runs)) names.push_back(e.path().filename().string());
  ASSERT_EQ(names.size(), 2u);
  for (const auto& n : names) EXPECT_TRUE(std::regex_match(n, std::regex(R"(\d{8}-\d{6}-seed4(-\d+)?)"))) << n;
}

TEST_F(Cli, DataDirEnvironmentVariable) {
  ::setenv("DMAN_DATA_DIR", kData.c_str(), 1);
  const auto r = run({"--run-dir", dir("envdata").string(), "stats", "--input", "stats20.jsonl"});
  ::unsetenv("DMAN_DATA_DIR");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(dir("envdata") / "stats.json")["accepted"], 20);
}

TEST_F(Cli, ConfigFileBelowFlags) {
  write_file(dir("synth.toml"), "seed = 5\n[make-synthetic]\nnli-dev = 9\nnli-train = 6\n");
  ASSERT_EQ(run({"--config", dir("synth.toml").string(), "--run-dir", dir("cfg1").string(), "make-synthetic"}).code,
            0);
  auto m = read_json(dir("cfg1") / "manifest.json");
  EXPECT_EQ(m["seed"], 5);
  EXPECT_EQ(m["config"]["nli_dev"], 9);
  EXPECT_EQ(m["config"]["nli_train"], 6);
  ASSERT_EQ(run({"--config", dir("synth.toml").string(), "--seed", "6", "--run-dir", dir("cfg2").string(),
                 "make-synthetic", "--nli-dev", "3"})
                .code,
            0);
  m = read_json(dir("cfg2") / "manifest.json");
  EXPECT_EQ(m["seed"], 6);
  EXPECT_EQ(m["config"]["nli_dev"], 3);
  EXPECT_EQ(m["config"]["nli_train"], 6);
  EXPECT_EQ(run({"--config", dir("absent.toml").string(), "stats", "--input", "x"}).code, 1);
}

TEST_F(Cli, ExtractMarkersHandCount) {
  EXPECT_EQ(default_markers(),
            (std::vector<std::string>{"but", "because", "if", "when", "so", "although", "before", "still"}));
  const auto r = run({"--run-dir", dir("mk").string(), "extract-markers", "--input", (kData / "markers20.txt").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_json(dir("mk") / "marker_stats.json"), read_json(kData / "markers20_expected.json"));
  std::ifstream tsv(dir("mk") / "pairs.tsv");
  std::size_t lines = 0;
  for (std::string l; std::getline(tsv, l);) ++lines;
  EXPECT_EQ(lines, 10u);
  EXPECT_NE(r.out.find("total"), std::string::npos);
}

TEST_F(Cli, ExtractMarkersEmptyIsExitThree) {
  write_file(dir("empty.txt"), "");
  EXPECT_EQ(run({"--run-dir", dir("mk-empty").string(), "extract-markers", "--input", dir("empty.txt").string()}).code,
            3);
  EXPECT_EQ(read_json(dir("mk-empty") / "marker_stats.json")["total"], 0);
  EXPECT_EQ(read_json(dir("mk-empty") / "manifest.json")["exit_code"], 3);
}

TEST_F(Cli, StatsEmptyAndMalformed) {
  write_file(dir("empty.jsonl"), "");
  const auto e = run({"--run-dir", dir("st-empty").string(), "stats", "--input", dir("empty.jsonl").string()});
  EXPECT_EQ(e.code, 0);
  const auto j = read_json(dir("st-empty") / "stats.json");
  EXPECT_EQ(j["accepted"], 0);
  for (const auto& row : j["rows"]) {
    EXPECT_EQ(row["total"], 0);
    EXPECT_EQ(row["correct"], 0);
  }

  write_file(dir("bad.jsonl"),
             "{\"gold_label\":\"neutral\",\"annotator_labels\":[\"neutral\"],\"sentence1\":\"a b\",\"sentence2\":\"c\"}\n"
             "{not json\n");
  const auto b = run({"--run-dir", dir("st-bad").string(), "stats", "--input", dir("bad.jsonl").string()});
  EXPECT_EQ(b.code, 2);
  EXPECT_NE(b.err.find("bad.jsonl:2:"), std::string::npos) << b.err;
}

TEST_F(Cli, TrainDmpBadConfig) {
  const auto r = run({"--run-dir", dir("dmp-bad").string(), "train-dmp", "--train", (suite / "dmp_train.tsv").string(),
                      "--lr", "-1"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(run({"--run-dir", dir("dmp-frac").string(), "train-dmp", "--train", (suite / "dmp_train.tsv").string(),
                 "--val-fraction", "1.5"})
                .code,
            1);
}

TEST_F(Cli, TrainDmpHoldsOutValidation) {
  const auto r = run({"--run-dir", dir("dmp-split").string(), "train-dmp", "--train",
                      (suite / "dmp_train.tsv").string(), "--hidden", "2", "--epochs", "1", "--word-dim", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto s = read_json(dir("dmp-split") / "summary.json");
  EXPECT_EQ(s["train_pairs"], 72);
  EXPECT_EQ(s["val_pairs"], 8);
  for (const char* f : {"dmp.ckpt", "log.jsonl", "manifest.json"}) EXPECT_TRUE(fs::exists(dir("dmp-split") / f)) << f;
}

TEST_F(Cli, TrainNliOutputs) {
  const auto r = run(nli("nli", {"--dmp-checkpoint", (dmp / "dmp.ckpt").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"model.ckpt", "log.jsonl", "dev_eval.json", "manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir("nli") / f)) << f;
  }
  std::ifstream log(dir("nli") / "log.jsonl");
  std::string line;
  ASSERT_TRUE(std::getline(log, line));
  const auto rec = nlohmann::json::parse(line);
  for (const char* key : {"step", "train_loss", "ce", "rl", "dev_acc", "keep_prob", "lr"}) {
    EXPECT_TRUE(rec.contains(key)) << key;
  }
  EXPECT_TRUE(read_json(dir("nli") / "manifest.json")["config"]["model"]["use_encoder"].get<bool>());
}

TEST_F(Cli, TrainNliWithoutCheckpointDropsEncoder) {
  const auto r = run(nli("nli-noenc", {"--embeddings", (suite / "embeddings.txt").string()}));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
  EXPECT_FALSE(read_json(dir("nli-noenc") / "manifest.json")["config"]["model"]["use_encoder"].get<bool>());
  EXPECT_EQ(run(nli("nli-only", {"--only-encoder"})).code, 1);
}

TEST_F(Cli, TrainNliConfigErrors) {
  EXPECT_EQ(run(nli("nli-lambda", {"--lambda", "1.5"})).code, 1);
  EXPECT_EQ(run(nli("nli-both", {"--dmp-checkpoint", (dmp / "dmp.ckpt").string(), "--embeddings",
                                 (suite / "embeddings.txt").string()}))
                .code,
            1);
  const auto mismatch = run(nli("nli-h", {"--dmp-checkpoint", (dmp / "dmp.ckpt").string(), "--hidden", "4"}));
  EXPECT_EQ(mismatch.code, 1);
  EXPECT_NE(mismatch.err.find("hidden size 3"), std::string::npos) << mismatch.err;
}

TEST_F(Cli, DivergenceIsExitFour) {
  const auto r = run(nli("nli-nan", {"--dmp-checkpoint", poisoned_dmp().string()}));
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(read_json(dir("nli-nan") / "manifest.json")["exit_code"], 4);
}

TEST_F(Cli, AblatePartialFailureIsExitFive) {
  const auto r = run({"--run-dir", dir("ablate-nan").string(), "ablate", "--train",
                      (suite / "nli_train.jsonl").string(), "--dev", (suite / "nli_dev.jsonl").string(),
                      "--dmp-checkpoint", poisoned_dmp().string(), "--hidden", "3", "--epochs", "1"});
  EXPECT_EQ(r.code, 5);
  const auto rows = read_json(dir("ablate-nan") / "ablation.json")["rows"];
  ASSERT_EQ(rows.size(), 8u);
  for (const auto& row : rows) {
    const bool ok = row["name"] == "No Sentence Encoder Model";
    EXPECT_EQ(row["status"], ok ? "ok" : "failed") << row["name"];
    EXPECT_EQ(row.contains("rank"), ok);
  }
}

TEST_F(Cli, AblationVariantsMirrorTableFive) {
  DMANConfig base;
  const auto v = cli::ablation_variants(base);
  ASSERT_EQ(v.size(), 8u);
  EXPECT_TRUE(v[0].config.only_encoder);
  EXPECT_FALSE(v[1].config.use_encoder);
  EXPECT_FALSE(v[2].config.use_char);
  EXPECT_FALSE(v[3].config.use_pos);
  EXPECT_FALSE(v[4].config.use_ner);
  EXPECT_FALSE(v[5].config.use_em);
  EXPECT_EQ(v[6].config.lambda, 1);
  EXPECT_EQ(v[7].name, "DMAN");
  for (const auto& x : v) EXPECT_EQ(x.config.seed, base.seed);
}

TEST_F(Cli, EvalAndEnsemble) {
  ASSERT_EQ(run(nli("ens-a", {"--dmp-checkpoint", (dmp / "dmp.ckpt").string()})).code, 0);
  const auto a = (dir("ens-a") / "model.ckpt").string();
  const auto dev = (suite / "nli_dev.jsonl").string();
  ASSERT_EQ(run({"--run-dir", dir("eval-a").string(), "eval", "--checkpoint", a, "--data", dev}).code, 0);
  ASSERT_EQ(run({"--run-dir", dir("ens-1").string(), "ensemble-eval", "--checkpoint", a, "--data", dev}).code, 0);
  const auto single = read_json(dir("eval-a") / "eval.json");
  const auto ens = read_json(dir("ens-1") / "eval.json");
  EXPECT_EQ(single["accuracy"], ens["accuracy"]);
  EXPECT_EQ(single["confusion"], ens["confusion"]);

  ASSERT_EQ(run(nli("ens-b", {"--hidden", "2"})).code, 0);
  EXPECT_EQ(run({"--run-dir", dir("ens-mismatch").string(), "ensemble-eval", "--checkpoint", a, "--checkpoint",
                 (dir("ens-b") / "model.ckpt").string(), "--data", dev})
                .code,
            1);
  EXPECT_EQ(run({"--run-dir", dir("eval-two").string(), "eval", "--checkpoint", a, "--checkpoint", a, "--data", dev})
                .code,
            1);
}

TEST_F(Cli, DumpAttention) {
  ASSERT_EQ(run(nli("att", {"--dmp-checkpoint", (dmp / "dmp.ckpt").string()})).code, 0);
  const auto r = run({"--run-dir", dir("att-dump").string(), "dump-attention", "--checkpoint",
                      (dir("att") / "model.ckpt").string(), "--data", (suite / "nli_dev.jsonl").string(), "--limit",
                      "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir("att-dump") / "attention")) ++files;
  EXPECT_EQ(files, 4u);
  const auto j = read_json(dir("att-dump") / "attention" / "000000.json");
  EXPECT_EQ(j["raw"].size(), j["premise_tokens"].size());
  EXPECT_EQ(j["raw"][0].size(), j["hypothesis_tokens"].size());

  ASSERT_EQ(run(nli("att-only", {"--dmp-checkpoint", (dmp / "dmp.ckpt").string(), "--only-encoder"})).code, 0);
  EXPECT_EQ(run({"--run-dir", dir("att-only-dump").string(), "dump-attention", "--checkpoint",
                 (dir("att-only") / "model.ckpt").string(), "--data", (suite / "nli_dev.jsonl").string()})
                .code,
            1);
}

TEST_F(Cli, RepeatedRunsAreByteIdentical) {
  for (const char* name : {"rep-a", "rep-b"}) {
    ASSERT_EQ(run(nli(name, {"--dmp-checkpoint", (dmp / "dmp.ckpt").string(), "--rl-mode", "sampled"})).code, 0);
  }
  for (const char* f : {"model.ckpt", "log.jsonl", "dev_eval.json"}) {
    EXPECT_EQ(slurp(dir("rep-a") / f), slurp(dir("rep-b") / f)) << f;
  }
  ASSERT_EQ(run({"--seed", "2", "--run-dir", dir("rep-c").string(), "train-nli", "--train",
                 (suite / "nli_train.jsonl").string(), "--dev", (suite / "nli_dev.jsonl").string(), "--hidden", "3",
                 "--epochs", "1", "--batch-size", "6", "--dmp-checkpoint", (dmp / "dmp.ckpt").string(), "--rl-mode",
                 "sampled"})
                .code,
            0);
  EXPECT_NE(slurp(dir("rep-a") / "model.ckpt"), slurp(dir("rep-c") / "model.ckpt"));
}

TEST(FormatLabelStats, Layout) {
  const nlohmann::json stats = {{"accepted", 3},
                                {"gold_absent", 0},
                                {"rows", {{{"k", 1}, {"total", 2}, {"correct", 1}}, {{"k", 2}, {"total", 1}, {"correct", 2}}}}};
  EXPECT_EQ(cli::format_label_stats(stats),
            "k        total   correct\n"
            "1            2         1\n"
            "2            1         2\n"
            "accepted 3, gold label absent 0\n");
}
