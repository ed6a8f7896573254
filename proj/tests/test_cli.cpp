#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"

namespace lscae::cli {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("lscae_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int cli(std::vector<std::string> args, const fs::path& out = {}) {
    args.insert(args.begin(), {"--out-dir", (out.empty() ? dir_ : out).string()});
    return run(args);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
  static std::vector<std::string> lines(const fs::path& p) {
    std::vector<std::string> out;
    std::ifstream in(p);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
  }
  static std::size_t columns(const std::string& line) {
    return static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  }

  fs::path dir_;
};

TEST_F(Cli, SynthTwoMoonsShape) {
  ASSERT_EQ(cli({"synth", "two-moons", "--n", "1000", "--noise", "0.1", "--nuisance", "20"}), 0);
  const auto rows = lines(dir_ / "two-moons.csv");
  ASSERT_EQ(rows.size(), 1001u);
  EXPECT_EQ(columns(rows[0]), 23u);
  EXPECT_EQ(rows[0].substr(rows[0].rfind(',') + 1), "label");
  const auto meta = nlohmann::json::parse(slurp(dir_ / "two-moons.json"));
  EXPECT_EQ(meta["d"], 22);
  EXPECT_EQ(meta["seed"], 42);
  EXPECT_EQ(meta["params"]["nuisance"], 20);
}

TEST_F(Cli, SynthIsByteIdenticalPerSeed) {
  ASSERT_EQ(cli({"synth", "two-moons", "--n", "50", "--out", "a"}), 0);
  ASSERT_EQ(cli({"synth", "two-moons", "--n", "50", "--out", "b"}), 0);
  ASSERT_EQ(cli({"--seed", "7", "synth", "two-moons", "--n", "50", "--out", "c"}), 0);
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
  EXPECT_NE(slurp(dir_ / "a.csv"), slurp(dir_ / "c.csv"));
}

TEST_F(Cli, OtherGenerators) {
  ASSERT_EQ(cli({"synth", "case-study", "--n-per-cluster", "10", "--nuisance", "5"}), 0);
  EXPECT_EQ(columns(lines(dir_ / "case-study.csv")[0]), 7u);
  ASSERT_EQ(cli({"synth", "ablation-moons", "--d", "3", "--n", "100"}), 0);
  EXPECT_EQ(columns(lines(dir_ / "ablation-moons.csv")[0]), 11u);
  ASSERT_EQ(cli({"synth", "noisy-images", "--n", "30"}), 0);
  EXPECT_EQ(lines(dir_ / "noisy-images.csv").size(), 31u);
  EXPECT_EQ(columns(lines(dir_ / "noisy-images.csv")[0]), 65u);
}

TEST_F(Cli, UsageErrors) {
  EXPECT_EQ(cli({"synth", "spirals"}), kExitUsage);
  EXPECT_EQ(cli({}), kExitUsage);
  EXPECT_EQ(cli({"--format", "xml", "synth", "two-moons"}), kExitUsage);
  EXPECT_EQ(cli({"select"}), kExitUsage);
  EXPECT_EQ(cli({"--help"}), kExitOk);
}

TEST_F(Cli, SelectValidation) {
  ASSERT_EQ(cli({"synth", "two-moons", "--n", "40", "--nuisance", "2"}), 0);
  const std::string in = path("two-moons.csv");
  EXPECT_EQ(cli({"select", "--input", in, "--k", "0"}), kExitUsage);
  EXPECT_EQ(cli({"select", "--input", in, "--k", "5"}), kExitUsage);
  EXPECT_EQ(cli({"select", "--input", in, "--objective", "vae"}), kExitUsage);
  EXPECT_EQ(cli({"select", "--input", in, "--tau-end", "50"}), kExitUsage);
  EXPECT_EQ(cli({"select", "--input", path("missing.csv")}), kExitIo);
  std::ofstream(dir_ / "bad.csv") << "a,b\n1,2\n3\n";
  EXPECT_EQ(cli({"select", "--input", path("bad.csv")}), kExitIo);
}

TEST_F(Cli, SelectDefaultsAndOutputs) {
  ASSERT_EQ(cli({"synth", "two-moons", "--n", "40", "--nuisance", "2"}), 0);
  ASSERT_EQ(cli({"select", "--input", path("two-moons.csv"), "--hidden", "8,8"}, dir_ / "a"), 0);
  const auto j = nlohmann::json::parse(slurp(dir_ / "a" / "selected.json"));
  EXPECT_EQ(j["config"]["epochs"], 300);
  EXPECT_EQ(j["config"]["lr_concrete"], 1.0);
  EXPECT_EQ(j["config"]["lr_decoder"], 0.01);
  EXPECT_EQ(j["config"]["tau_start"], 10.0);
  EXPECT_EQ(j["config"]["tau_end"], 0.1);
  EXPECT_EQ(j["config"]["objective"], "lscae");
  EXPECT_EQ(j["selected"].size(), 2u);
  EXPECT_FALSE(j.contains("wall_seconds"));
  EXPECT_EQ(lines(dir_ / "a" / "train_log.csv").size(), 301u);
  EXPECT_EQ(lines(dir_ / "a" / "logits.csv").size(), 2u);

  ASSERT_EQ(cli({"select", "--input", path("two-moons.csv"), "--hidden", "8,8"}, dir_ / "b"), 0);
  for (const char* f : {"selected.json", "train_log.csv", "logits.csv"})
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
}

TEST_F(Cli, SelectObjectivesAndDecoder) {
  ASSERT_EQ(cli({"synth", "two-moons", "--n", "40", "--nuisance", "2"}), 0);
  ASSERT_EQ(cli({"select", "--input", path("two-moons.csv"), "--objective", "ls", "--epochs", "5"}), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "selected.json"))["config"]["objective"], "ls");
  EXPECT_FALSE(fs::exists(dir_ / "decoder.bin"));
  ASSERT_EQ(cli({"select", "--input", path("two-moons.csv"), "--objective", "cae", "--epochs", "5",
                 "--hidden", "4", "--save-decoder", "--record-time"}),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "decoder.bin"));
  EXPECT_TRUE(nlohmann::json::parse(slurp(dir_ / "selected.json")).contains("wall_seconds"));
}

TEST_F(Cli, LsObjectiveExcludesUniformNoise) {
  std::size_t clean = 0;
  for (int s = 0; s < 10; ++s) {
    const std::string seed = std::to_string(100 + s);
    ASSERT_EQ(cli({"--seed", seed, "synth", "two-moons", "--n", "600", "--nuisance", "10"}), 0);
    ASSERT_EQ(cli({"--seed", seed, "select", "--input", path("two-moons.csv"), "--objective", "ls"}), 0);
    const auto j = nlohmann::json::parse(slurp(dir_ / "selected.json"));
    bool any_noise = false;
    for (const auto& v : j["selected"]) any_noise = any_noise || v.get<int>() >= 2;
    clean += !any_noise;
  }
  EXPECT_GE(clean, 8u);
}

TEST_F(Cli, EvalOnPerfectData) {
  std::ofstream out(dir_ / "perfect.csv");
  out << "a,b,noise,label\n";
  for (int i = 0; i < 40; ++i)
    out << (i < 20 ? 0 : 10) + i % 3 << ',' << (i < 20 ? -5 : 5) << ',' << (i * 7) % 11 << ','
        << (i < 20 ? 0 : 1) << '\n';
  out.close();
  std::ofstream(dir_ / "sel.json") << R"({"selected": [1, 0]})";
  ASSERT_EQ(cli({"eval", "--input", path("perfect.csv"), "--features", path("sel.json")}), 0);
  const auto rows = lines(dir_ / "eval.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[1], "2,2,1,0,20");
}

TEST_F(Cli, EvalIsDeterministicAndChecked) {
  ASSERT_EQ(cli({"synth", "two-moons", "--n", "100", "--nuisance", "3"}), 0);
  const std::string in = path("two-moons.csv");
  ASSERT_EQ(cli({"--format", "json", "eval", "--input", in, "--restarts", "1"}), 0);
  const std::string first = slurp(dir_ / "eval.json");
  ASSERT_EQ(cli({"--format", "json", "eval", "--input", in, "--restarts", "1"}), 0);
  EXPECT_EQ(first, slurp(dir_ / "eval.json"));
  EXPECT_EQ(nlohmann::json::parse(first)["rows"][0]["features"], "5");

  std::ofstream(dir_ / "nolabel.csv") << "a,b\n1,2\n3,4\n5,7\n";
  EXPECT_EQ(cli({"eval", "--input", path("nolabel.csv")}), kExitUsage);
  std::ofstream(dir_ / "far.json") << R"({"selected": [9]})";
  EXPECT_EQ(cli({"eval", "--input", in, "--features", path("far.json")}), kExitUsage);
  std::ofstream(dir_ / "broken.json") << "{selected";
  EXPECT_EQ(cli({"eval", "--input", in, "--features", path("broken.json")}), kExitIo);
}

TEST_F(Cli, DiagnoseSpectraShape) {
  ASSERT_EQ(cli({"diagnose", "spectra", "--nuisance", "0:60:10", "--n", "80", "--reps", "1"}), 0);
  const auto rows = lines(dir_ / "spectra.csv");
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0], "nuisance,lambda2_mean,lambda2_sd,fiedler_mean,fiedler_sd,abs_corr_mean,abs_corr_sd,reps");
  EXPECT_EQ(rows[7].substr(0, 3), "60,");
  EXPECT_EQ(cli({"diagnose", "spectra", "--nuisance", "10:0:5"}), kExitUsage);
}

TEST_F(Cli, DiagnoseContribRanksInformativeFirst) {
  ASSERT_EQ(cli({"diagnose", "contrib"}), 0);
  const auto rows = lines(dir_ / "contrib.csv");
  ASSERT_EQ(rows.size(), 11u);
  std::vector<double> v;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::stringstream ss(rows[i]);
    std::string cell;
    for (int c = 0; c < 3; ++c) std::getline(ss, cell, ',');
    v.push_back(std::stod(cell));
  }
  const double weakest_signal = std::min(v[0], v[1]);
  for (std::size_t j = 2; j < v.size(); ++j) EXPECT_GT(weakest_signal, v[j]) << j;
}

TEST_F(Cli, DiagnoseBreakdownTable) {
  ASSERT_EQ(cli({"--format", "json", "diagnose", "breakdown", "--r", "4,6,8", "--threshold", "0.7",
                 "--reps", "1", "--grid", "0,100,1000,10000,40000"}),
            0);
  const auto j = nlohmann::json::parse(slurp(dir_ / "breakdown.json"));
  ASSERT_EQ(j["rows"].size(), 3u);
  EXPECT_EQ(j["rows"][2]["r"], "8");
  EXPECT_TRUE(fs::exists(dir_ / "breakdown_curves.json"));
}

TEST_F(Cli, NumericAndIoFailures) {
  std::ofstream(dir_ / "flat.csv") << "a,b\n1,1\n1,1\n1,1\n1,1\n";
  EXPECT_EQ(cli({"diagnose", "contrib", "--input", path("flat.csv")}), kExitNumeric);
  std::ofstream(dir_ / "blocker") << "x";
  EXPECT_EQ(cli({"synth", "two-moons", "--n", "10"}, dir_ / "blocker" / "sub"), kExitIo);
}

}  // namespace
}  // namespace lscae::cli
