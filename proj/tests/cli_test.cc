#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int code;
  std::string out;
};

// Runs the CLI with stdout and stderr captured.
CliResult RunCli(const std::string& args) {
  static int counter = 0;
  const fs::path log = fs::temp_directory_path() / ("gain_cli_" + std::to_string(::getpid()) + "_" +
                                                    std::to_string(counter++) + ".log");
  const std::string cmd = std::string("\"") + GAIN_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream text;
  text << in.rdbuf();
  fs::remove(log);
  return {WEXITSTATUS(status), text.str()};
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / ("gain_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(root_);
    fs::create_directories(root_);
    const CliResult r = RunCli("synth --out " + (root_ / "data").string() + " --docs 6 --test-docs 3 --entities 4 --seed 5");
    ASSERT_EQ(r.code, 0) << r.out;
    std::ofstream(root_ / "tiny.json") << R"({"model": {"word_dim": 6, "type_dim": 3, "coref_dim": 3,
      "encoder_hidden": 4, "gcn_hidden": 6, "classifier_hidden": 5, "dropout": 0.1},
      "train": {"epochs": 2, "batch_size": 2, "learning_rate": 0.01}})";
  }
  static void TearDownTestSuite() { fs::remove_all(root_); }

  static fs::path Data(const char* name) { return root_ / "data" / name; }
  static std::string Arg(const fs::path& p) { return "\"" + p.string() + "\""; }

  static inline fs::path root_;
};

TEST_F(Cli, SynthWritesCorpusAndManifestDeterministically) {
  EXPECT_TRUE(fs::exists(Data("train.json")));
  EXPECT_TRUE(fs::exists(Data("test.json")));
  EXPECT_TRUE(fs::exists(Data("rel2id.txt")));
  const auto manifest = nlohmann::json::parse(Slurp(Data("manifest.json")));
  EXPECT_EQ(manifest.at("subcommand"), "synth");
  EXPECT_EQ(manifest.at("seed"), 5);
  EXPECT_TRUE(manifest.contains("version"));
  EXPECT_TRUE(manifest.contains("config"));
  const fs::path again = root_ / "again";
  ASSERT_EQ(RunCli("synth --out " + Arg(again) + " --docs 6 --test-docs 3 --entities 4 --seed 5").code, 0);
  EXPECT_EQ(Slurp(again / "train.json"), Slurp(Data("train.json")));
  EXPECT_EQ(Slurp(again / "test.json"), Slurp(Data("test.json")));
}

TEST_F(Cli, BuildGraphAndInspectPaths) {
  const fs::path out = root_ / "graphs";
  const CliResult r = RunCli("build-graph --train " + Arg(Data("train.json")) + " --rel2id " + Arg(Data("rel2id.txt")) +
                       " --out " + Arg(out));
  ASSERT_EQ(r.code, 0) << r.out;
  const std::string graphs = Slurp(out / "graphs.txt");
  EXPECT_NE(graphs.find("document twohop-0\n"), std::string::npos);
  EXPECT_NE(graphs.find("document twohop-5\n"), std::string::npos);
  EXPECT_TRUE(fs::exists(out / "manifest.json"));

  const fs::path paths = root_ / "paths";
  const CliResult p = RunCli("inspect-paths --train " + Arg(Data("train.json")) + " --title twohop-1 --out " + Arg(paths));
  ASSERT_EQ(p.code, 0) << p.out;
  EXPECT_NE(p.out.find("document twohop-1"), std::string::npos);
  EXPECT_EQ(p.out.find("twohop-2"), std::string::npos);
  EXPECT_NE(p.out.find(" via "), std::string::npos);
}

TEST_F(Cli, GradcheckPassesOnToyDocuments) {
  const CliResult r = RunCli("gradcheck --docs 2 --seed 1");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("max relative error"), std::string::npos);
}

TEST_F(Cli, TrainThenEval) {
  const fs::path out = root_ / "run";
  const CliResult r = RunCli("train --config " + Arg(root_ / "tiny.json") + " --train " + Arg(Data("train.json")) +
                       " --dev " + Arg(Data("test.json")) + " --test " + Arg(Data("test.json")) + " --rel2id " +
                       Arg(Data("rel2id.txt")) + " --seed 3 --ablate docnode --out " + Arg(out));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* f : {"manifest.json", "runlog.jsonl", "timings.jsonl", "checkpoint.bin", "rel2id.txt",
                        "test_report.txt", "test_predictions.jsonl"})
    EXPECT_TRUE(fs::exists(out / f)) << f;
  const auto manifest = nlohmann::json::parse(Slurp(out / "manifest.json"));
  EXPECT_EQ(manifest.at("config").at("model").at("no_document_node"), true);
  EXPECT_EQ(manifest.at("config").at("train").at("seed"), 3);

  const fs::path ev = root_ / "eval";
  const CliResult e = RunCli("eval --checkpoint " + Arg(out / "checkpoint.bin") + " --test " + Arg(Data("test.json")) +
                       " --threshold 0.5 --out " + Arg(ev));
  ASSERT_EQ(e.code, 0) << e.out;
  const std::string report = Slurp(ev / "report.txt");
  EXPECT_NE(report.find("threshold 0.500000 given"), std::string::npos) << report;
  EXPECT_NE(report.find("infer_f1"), std::string::npos);
  EXPECT_TRUE(fs::exists(ev / "predictions.jsonl"));
}

TEST_F(Cli, ErrorsMapToExitCodes) {
  EXPECT_EQ(RunCli("").code, 1);
  EXPECT_EQ(RunCli("synth --bogus-flag").code, 1);
  EXPECT_EQ(RunCli("synth --out " + Arg(root_ / "x") + " --task four-hop").code, 1);
  EXPECT_EQ(RunCli("train --train " + Arg(Data("train.json")) + " --ablate wings --out " + Arg(root_ / "y")).code, 1);
  EXPECT_EQ(RunCli("eval --checkpoint " + Arg(root_ / "missing.bin") + " --test " + Arg(Data("test.json")) +
                " --out " + Arg(root_ / "z"))
                .code,
            2);
  EXPECT_EQ(RunCli("eval --checkpoint c --threshold 2 --out o").code, 1);
  std::ofstream(root_ / "broken.json") << "[{\"title\": \"t\", \"sents\": [[\"a\"]], \"vertexSet\": 3}]";
  EXPECT_EQ(RunCli("build-graph --train " + Arg(root_ / "broken.json") + " --out " + Arg(root_ / "w")).code, 1);
}

}  // namespace
