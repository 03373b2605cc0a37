#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <nlohmann/json.hpp>

#include "lemming/model_io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("lemming_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string path(const std::string& name) { return (work_dir() / name).string(); }

// Runs the CLI with stdout redirected to out.txt; returns the exit code.
int run(const std::string& args, const std::string& out = "out.txt") {
  const std::string cmd = std::string(LEMMING_CLI) + " " + args + " > " + path(out) + " 2> " + path("err.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& name) {
  std::ifstream in(path(name));
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ASSERT_EQ(run("generate --seed 5 --train-tokens 1500 --test-tokens 300 --format tsv --out-dir " + path("data")), 0);
  }
  static void TearDownTestSuite() { fs::remove_all(work_dir()); }
  static std::string data(const std::string& f) { return path("data/" + f); }
  std::string tsv() const { return " --format tsv "; }
};

}  // namespace

TEST_F(Cli, PipelineMemorizesItsTrainingSplit) {
  ASSERT_EQ(run("train --model pipeline" + tsv() + "--tagger-epochs 3 --train " + data("train.tsv") +
                " --lexicon toy=" + data("lexicon.txt") + " -o " + path("pipe.json")),
            0)
      << slurp("err.txt");
  ASSERT_EQ(run("annotate -m " + path("pipe.json") + tsv() + "--input " + data("train.tsv") + " --output " +
                path("pred.tsv")),
            0);
  ASSERT_EQ(run("evaluate --json" + tsv() + "--gold " + data("train.tsv") + " --pred " + path("pred.tsv") +
                " --train-vocab " + data("train.tsv")),
            0);
  const auto report = nlohmann::json::parse(slurp("out.txt"));
  EXPECT_EQ(report["lemma"]["all"]["accuracy"], 1.0);
  EXPECT_TRUE(report["lemma"]["unk"]["accuracy"].is_null());
  EXPECT_EQ(report["unknown_tokens"], 0);

  ASSERT_EQ(run("inspect --trees --top-features 3 -m " + path("pipe.json")), 0);
  EXPECT_NE(slurp("out.txt").find("edit trees"), std::string::npos);
}

TEST_F(Cli, SimpleReproducesGoldOnSeenForms) {
  ASSERT_EQ(run("train --model simple" + tsv() + "--train " + data("train.tsv") + " -o " + path("simple.json")), 0);
  ASSERT_EQ(run("annotate -m " + path("simple.json") + tsv() + "--input " + data("train.tsv") + " --output " +
                path("simple_pred.tsv")),
            0);
  EXPECT_EQ(slurp("simple_pred.tsv"), slurp("data/train.tsv"));
}

TEST_F(Cli, ThreadsDoNotChangeOutputAndTrainingIsReproducible) {
  const std::string train = "train --model tagger" + tsv() + "--tagger-epochs 2 --seed 9 --train " + data("train.tsv");
  ASSERT_EQ(run(train + " -o " + path("t1.json")), 0);
  ASSERT_EQ(run(train + " -o " + path("t2.json")), 0);
  EXPECT_EQ(slurp("t1.json"), slurp("t2.json"));
  const std::string ann = "annotate -m " + path("t1.json") + tsv() + "--input " + data("test.tsv") + " --output ";
  ASSERT_EQ(run(ann + path("a1.tsv") + " --threads 1"), 0);
  ASSERT_EQ(run(ann + path("a4.tsv") + " --threads 4"), 0);
  EXPECT_EQ(slurp("a1.tsv"), slurp("a4.tsv"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("train --model nonsense --train " + data("train.tsv") + " -o x.json"), 1);
  EXPECT_EQ(run("train --model simple --train " + data("train.tsv")), 1);  // no -o
  EXPECT_EQ(run("train --model tagger --order 3 --train " + data("train.tsv") + " -o x.json"), 1);
  EXPECT_EQ(run("train --model simple --lexicon broken" + tsv() + "--train " + data("train.tsv") + " -o x.json"), 1);
  EXPECT_EQ(run("--help"), 0);
  // data errors
  EXPECT_EQ(run("evaluate" + tsv() + "--gold " + data("test.tsv") + " --pred " + data("train.tsv") + " --train-vocab " +
                data("train.tsv")),
            2);
  EXPECT_NE(slurp("err.txt").find("sentences"), std::string::npos);
  EXPECT_EQ(run("annotate -m " + data("train.tsv") + tsv() + "--input " + data("test.tsv") + " --output " + path("x.tsv")),
            2);
  EXPECT_EQ(run("train --model simple --train " + data("train.tsv") + " -o " + path("x.json")), 2);  // tsv read as conll09
}

TEST_F(Cli, NewerModelVersionIsRejected) {
  ASSERT_EQ(run("train --model simple" + tsv() + "--train " + data("train.tsv") + " -o " + path("v.json")), 0);
  auto j = nlohmann::json::parse(slurp("v.json"));
  j["version"]["major"] = lemming::kFormatMajor + 1;
  {
    std::ofstream out(path("v2.json"));
    out << j.dump();
  }
  EXPECT_EQ(run("annotate -m " + path("v2.json") + tsv() + "--input " + data("test.tsv") + " --output " + path("x.tsv")),
            2);
  EXPECT_NE(slurp("err.txt").find("newer"), std::string::npos);
}
