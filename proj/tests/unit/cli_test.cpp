#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "cli.hpp"
#include "matscire/corpus_io.hpp"
#include "matscire/model.hpp"
#include "matscire/splits.hpp"
#include "synthetic.hpp"

namespace matscire {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json load_json(const fs::path& p) {
  std::ifstream in(p);
  return json::parse(in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("matscire_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  std::string at(const std::string& name) const { return (dir / name).string(); }

  // Synthetic corpus written as structured records.
  std::string corpus(int n, const std::string& name = "corpus.jsonl") {
    testing::SyntheticOptions o;
    o.num_sentences = n;
    write_structured(testing::synthetic_corpus(o), at(name));
    return at(name);
  }
  std::vector<std::string> tiny_model() const {
    return {"--hidden", "16", "--word-dim", "16", "--char-dim", "4", "--char-features", "8",
            "--relation-dim", "8", "--dropout", "0", "--lr", "0.01", "--batch", "4"};
  }
  std::string trained(const std::string& decoder = "pointer") {
    const auto train = corpus(12, "train.jsonl");
    std::vector<std::string> args = {"train", "--train", train, "--out", at("m.ckpt"),
                                     "--epochs", "2", "--decoder", decoder};
    for (const auto& a : tiny_model()) args.push_back(a);
    const auto r = run(args);
    EXPECT_EQ(r.code, 0) << r.err;
    return at("m.ckpt");
  }

  fs::path dir;
};

const std::string kFixtures = MATSCIRE_FIXTURE_DIR;

TEST_F(Cli, BuildCorpusOnFixtures) {
  const auto r = run({"build-corpus", "--records", kFixtures + "/records.jsonl", "--articles",
                      kFixtures + "/articles", "--out", at("built")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.err.find("malformed"), std::string::npos);
  const auto lines = read_lines(dir / "built" / "corpus.pointer");
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1], "8 8 17 18 Coulombic_Efficiency | 24 24 27 28 Coulombic_Efficiency");
  EXPECT_EQ(lines[0], "19 19 7 8 Voltage");
  const auto m = load_json(dir / "built" / "manifest.json");
  EXPECT_EQ(m["command"], "build-corpus");
  EXPECT_TRUE(m["inputs"].contains(kFixtures + "/records.jsonl"));
  EXPECT_TRUE(fs::exists(dir / "built" / "stats.json"));
}

TEST_F(Cli, EmptyArticleDirectoryWarns) {
  fs::create_directories(dir / "none");
  const auto r = run({"build-corpus", "--records", kFixtures + "/records.jsonl", "--articles",
                      at("none"), "--out", at("built")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("no article files"), std::string::npos);
  EXPECT_TRUE(read_structured(dir / "built" / "corpus.jsonl").empty());
}

TEST_F(Cli, MissingInputsAreUsageErrors) {
  EXPECT_EQ(run({"build-corpus", "--records", at("nope"), "--articles", at("x"), "--out", at("o")}).code, 2);
  EXPECT_EQ(run({"split"}).code, 2);
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"--help"}).code, 0);
  const auto r = run({"evaluate", "--checkpoint", at("missing.ckpt"), "--test", corpus(3), "--out", at("ev")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing.ckpt"), std::string::npos);
}

TEST_F(Cli, SplitFoldsAreDisjointAndExhaustive) {
  const auto in = corpus(100);
  const auto r = run({"split", "--in", in, "--out", at("folds"), "--folds", "5", "--seed", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = load_json(dir / "folds" / "manifest.json");
  ASSERT_EQ(m["folds"].size(), 5u);
  std::set<int> seen;
  for (const auto& f : m["folds"]) {
    EXPECT_EQ(f["test"], 20);
    for (int id : f["test_ids"]) EXPECT_TRUE(seen.insert(id).second) << id;
  }
  EXPECT_EQ(seen.size(), 100u);
  EXPECT_EQ(read_structured(dir / "folds" / "fold2" / "test.jsonl").size(), 20u);

  ASSERT_EQ(run({"split", "--in", in, "--out", at("plain")}).code, 0);
  EXPECT_EQ(read_structured(dir / "plain" / "train.jsonl").size(), 70u);
  EXPECT_EQ(read_structured(dir / "plain" / "dev.jsonl").size(), 10u);
  EXPECT_EQ(read_structured(dir / "plain" / "test.jsonl").size(), 20u);
  EXPECT_EQ(run({"split", "--in", in, "--out", at("bad"), "--train-frac", "0.9"}).code, 1);
}

TEST_F(Cli, KShotSelectsFiveKTriplets) {
  const auto in = corpus(100);
  auto r = run({"kshot", "--in", in, "--out", at("k5.jsonl"), "--k", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(triplet_count(read_structured(at("k5.jsonl"))), 25u);
  EXPECT_EQ(load_json(at("k5.jsonl.manifest.json"))["triplets"], 25);
  r = run({"kshot", "--in", in, "--out", at("k0.jsonl"), "--k", "0"});
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, TrainDryRunEchoesConfig) {
  const auto train = corpus(20, "train.jsonl");
  const auto r = run({"train", "--train", train, "--out", at("m.ckpt"), "--dry-run", "--lr", "0.05",
                      "--fraction", "0.3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("config: learning_rate=0.05 optimizer=adam dropout=0.5 hidden_dim=300 "
                       "num_epochs=50 batch_size=32 seed=13 decoder=pointer"),
            std::string::npos)
      << r.out;
  EXPECT_NE(r.out.find("train sentences: 6 of 20"), std::string::npos) << r.out;
  EXPECT_FALSE(fs::exists(at("m.ckpt")));
  const auto m = load_json(at("m.ckpt.manifest.json"));
  EXPECT_EQ(m["train_size"], 6);
  EXPECT_EQ(m["config"]["train"]["learning_rate"], 0.05);
}

TEST_F(Cli, InvalidConfigListsEveryProblem) {
  const auto train = corpus(10, "train.jsonl");
  const auto r = run({"train", "--train", train, "--out", at("m.ckpt"), "--lr", "-1", "--dropout", "2",
                      "--batch", "0", "--decoder", "beam", "--fraction", "0"});
  EXPECT_EQ(r.code, 2);
  for (const char* what : {"learning_rate", "dropout", "batch_size", "decoder", "--fraction"}) {
    EXPECT_NE(r.err.find(what), std::string::npos) << what << "\n" << r.err;
  }
}

TEST_F(Cli, ConfigFileSetsOptions) {
  const auto train = corpus(10, "train.jsonl");
  {
    std::ofstream cfg(at("run.ini"));
    cfg << "[train]\nlr=0.02\nbatch=5\ndecoder=word\n";
  }
  const auto r = run({"--config", at("run.ini"), "train", "--train", train, "--out", at("m.ckpt"), "--dry-run"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("learning_rate=0.02"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("batch_size=5"), std::string::npos);
  EXPECT_NE(r.out.find("decoder=word"), std::string::npos);
}

TEST_F(Cli, TrainWritesCheckpointAndLogs) {
  const auto ckpt = trained("word");
  EXPECT_EQ(read_checkpoint_info(ckpt).kind, DecoderKind::kWord);
  EXPECT_TRUE(fs::exists(ckpt + ".vocab"));
  EXPECT_EQ(read_lines(ckpt + ".log.jsonl").size(), 2u);
  const auto m = load_json(ckpt + ".manifest.json");
  EXPECT_EQ(m["epochs"].size(), 2u);
  EXPECT_FALSE(m["epochs"][0].contains("seconds"));
  EXPECT_EQ(m["vocab_hash"], read_checkpoint_info(ckpt).vocab_hash);
}

TEST_F(Cli, EvaluateModelAndPredictions) {
  const auto ckpt = trained();
  const auto test = corpus(6, "test.jsonl");
  auto r = run({"evaluate", "--checkpoint", ckpt, "--test", test, "--out", at("ev")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("Macro average"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "ev" / "report.jsonl"));

  r = run({"evaluate", "--predictions", test, "--test", test, "--out", at("echo")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_json(dir / "echo" / "manifest.json")["macro_f1"], 1.0);
  EXPECT_NE(slurp(dir / "echo" / "table.txt").find("1.000"), std::string::npos);

  r = run({"evaluate", "--checkpoint", ckpt, "--vocab", kFixtures + "/records.jsonl", "--test", test,
           "--out", at("bad")});
  EXPECT_NE(r.code, 0);
}

TEST_F(Cli, EvaluateFolds) {
  const auto data = corpus(30);
  std::vector<std::string> args = {"evaluate", "--folds", "3", "--data", data, "--out", at("folds"),
                                   "--epochs", "1"};
  for (const auto& a : tiny_model()) args.push_back(a);
  const auto r = run(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = load_json(dir / "folds" / "manifest.json");
  EXPECT_EQ(m["runs"], 3);
  EXPECT_EQ(m["folds"].size(), 3u);
  EXPECT_NE(r.out.find("(N = 3)"), std::string::npos);
}

TEST_F(Cli, ExtractFromArticle) {
  const auto ckpt = trained();
  auto r = run({"extract", "--checkpoint", ckpt, "--article", kFixtures + "/articles/a2.json", "--out",
                at("ex")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "ex" / "extracted.txt"), r.out);
  const auto m = load_json(dir / "ex" / "manifest.json");
  EXPECT_EQ(m["sentences"], 3);
  {
    std::ofstream t(at("plain.txt"));
    t << "LiCoO2 has a voltage of 3.9 V. It is stable.";
  }
  r = run({"extract", "--checkpoint", ckpt, "--article", at("plain.txt"), "--out", at("ex2")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_json(dir / "ex2" / "manifest.json")["sentences"], 2);
}

TEST_F(Cli, RepeatedRunsDifferOnlyInTimestamps) {
  const auto train = corpus(10, "train.jsonl");
  auto once = [&](const std::string& tag) {
    std::vector<std::string> args = {"train", "--train", train, "--out", at("m.ckpt"), "--epochs", "2"};
    for (const auto& a : tiny_model()) args.push_back(a);
    EXPECT_EQ(run(args).code, 0);
    fs::copy_file(at("m.ckpt"), at(tag + ".ckpt"));
    auto m = load_json(at("m.ckpt.manifest.json"));
    EXPECT_TRUE(m.contains("timestamps"));
    m.erase("timestamps");
    return m;
  };
  const auto a = once("a"), b = once("b");
  EXPECT_EQ(a, b);
  EXPECT_EQ(slurp(at("a.ckpt")), slurp(at("b.ckpt")));
}

TEST_F(Cli, OutputRootEnvironment) {
  const auto in = corpus(20);
  setenv("MATSCIRE_OUTPUT_ROOT", dir.c_str(), 1);
  const auto r = run({"split", "--in", in, "--out", "rooted"});
  unsetenv("MATSCIRE_OUTPUT_ROOT");
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "rooted" / "train.jsonl"));
}

}  // namespace
}  // namespace matscire
