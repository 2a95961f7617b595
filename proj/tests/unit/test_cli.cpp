#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "semidiag/io.hpp"

namespace fs = std::filesystem;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    root_ = fs::temp_directory_path() / (std::string("semidiag_cli_") + info->name());
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  int run(const std::string& args) {
    const std::string cmd = std::string(SEMIDIAG_CLI_PATH) + " " + args + " > " +
                            (root_ / "stdout.txt").string() + " 2> " +
                            (root_ / "stderr.txt").string();
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return (root_ / name).string(); }

  std::string read(const std::string& name) const {
    std::ifstream in(root_ / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(root_ / name, std::ios::binary) << text;
  }

  std::map<std::string, std::string> tree(const std::string& dir) const {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root_ / dir)) {
      if (!e.is_regular_file()) continue;
      std::ifstream in(e.path(), std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      out[fs::relative(e.path(), root_ / dir).string()] = ss.str();
    }
    return out;
  }

  // Two-part data from the simulator, written as data/data_rep0.csv.
  std::string make_data(int n = 400) {
    EXPECT_EQ(run("simulate --n " + std::to_string(n) + " --reps 1 --seed 3 --arms twopart-gamma "
                  "--write-data --out-dir " + path("data")),
              0);
    return path("data/data_rep0.csv");
  }

  fs::path root_;
};

std::vector<std::vector<double>> parse_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    std::vector<double> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_F(CliTest, SimulateStructure) {
  ASSERT_EQ(run("simulate --generator two-part-gamma --n 500 --beta0-zero -1 "
                "--arms twopart-gamma,tweedie --reps 1 --seed 7 --out-dir " + path("out")),
            0);
  int svgs = 0;
  for (const auto& [name, _] : tree("out")) svgs += name.ends_with(".svg");
  EXPECT_EQ(svgs, 2);
  EXPECT_TRUE(fs::exists(root_ / "out/aggregate.csv"));
  EXPECT_TRUE(fs::exists(root_ / "out/replications.csv"));
}

TEST_F(CliTest, FitResidualsValidateRoundTrip) {
  const std::string data = make_data();
  ASSERT_EQ(run("fit --input " + data + " --model twopart-gamma --out-dir " + path("fit")), 0);
  const std::string report = read("fit/fit_report.txt");
  EXPECT_NE(report.find("converged: yes"), std::string::npos);
  EXPECT_EQ(read("fit/model.txt").rfind("semidiag-model-version 1\nfamily twopart-gamma\n", 0), 0u);

  ASSERT_EQ(run("residuals --input " + data + " --model-file " + path("fit/model.txt") +
                " --out-dir " + path("res")),
            0);
  ASSERT_EQ(run("validate --holdout " + data + " --model-file " + path("fit/model.txt") +
                " --out-dir " + path("res")),
            0);
  const auto files = tree("res");
  EXPECT_EQ(read("res/residuals.csv").substr(0, 47),
            "index,p0_hat,cdf_value,residual,residual_normal");
  EXPECT_EQ(parse_csv(read("res/residuals.csv")).size(), 400u);
  for (const char* f : {"residuals.csv", "qq_uniform.csv", "qq_uniform.svg", "qq_normal.csv",
                        "qq_normal.svg", "p0_histogram.csv", "uniformity.txt", "baselines.csv"}) {
    ASSERT_TRUE(files.count(f)) << f;
    ASSERT_TRUE(files.count(std::string("oos_") + f)) << f;
    EXPECT_EQ(files.at(f), files.at(std::string("oos_") + f)) << f;
  }
}

TEST_F(CliTest, FiveRowResidualsMatchBruteForce) {
  write("model.txt",
        "semidiag-model-version 1\nfamily tweedie\ncolumn (intercept)\ncolumn x1\n"
        "coef 0.2 0.7\nphi 1.3\npower 1.5\n");
  write("five.csv", "y,x1\n0,0.3\n1.2,-0.5\n0,1.1\n3.5,0.8\n0.4,-1.6\n");
  ASSERT_EQ(run("residuals --input " + path("five.csv") + " --model-file " + path("model.txt") +
                " --out-dir " + path("r")),
            0);
  const auto rows = parse_csv(read("r/residuals.csv"));
  ASSERT_EQ(rows.size(), 5u);
  std::vector<double> p0, cdf;
  const double x1[] = {0.3, -0.5, 1.1, 0.8, -1.6};
  for (int i = 0; i < 5; ++i) {
    p0.push_back(rows[i][1]);
    cdf.push_back(rows[i][2]);
    const double mu = std::exp(0.2 + 0.7 * x1[i]);
    EXPECT_NEAR(rows[i][1], std::exp(-std::sqrt(mu) / (1.3 * 0.5)), 1e-15);
  }
  const auto expect = oracle::residuals_literal(p0, cdf);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(rows[i][3], expect[i]) << i;
}

TEST_F(CliTest, ExitCodes) {
  const std::string data = make_data(200);
  EXPECT_EQ(run("fit --input " + data + " --model lognormal --out-dir " + path("x")), 1);
  EXPECT_NE(read("stderr.txt").find("Usage"), std::string::npos);
  EXPECT_EQ(run("fit --input " + path("nope.csv") + " --model tweedie --out-dir " + path("x")), 1);
  EXPECT_EQ(run("frobnicate"), 1);
  EXPECT_EQ(run("simulate --n 3 --out-dir " + path("x")), 1);
  EXPECT_EQ(run("simulate --arms bogus --out-dir " + path("x")), 1);

  write("blank.csv", "y,x1\n1,2\n,3\n");
  EXPECT_EQ(run("fit --input " + path("blank.csv") + " --model tweedie --out-dir " + path("x")), 2);
  write("neg.csv", "y,x1\n1,2\n-3,3\n");
  EXPECT_EQ(run("fit --input " + path("neg.csv") + " --model tobit --out-dir " + path("x")), 2);

  ASSERT_EQ(run("fit --input " + data + " --model tweedie --out-dir " + path("fit")), 0);
  write("other.csv", "y,z\n1,2\n0,3\n");
  EXPECT_EQ(run("residuals --input " + path("other.csv") + " --model-file " +
                path("fit/model.txt") + " --out-dir " + path("x")),
            2);
  write("empty.csv", "y,x1,x2\n");
  EXPECT_EQ(run("validate --holdout " + path("empty.csv") + " --model-file " +
                path("fit/model.txt") + " --out-dir " + path("x")),
            2);

  // Perfect separation of zeros by x1 makes the logistic part diverge.
  std::string sep = "y,x1\n";
  for (int i = 0; i < 40; ++i) {
    sep += (i < 20 ? "0," : std::to_string(1 + i % 3) + ",") + std::to_string(i) + "\n";
  }
  write("sep.csv", sep);
  EXPECT_EQ(run("fit --input " + path("sep.csv") + " --model twopart-gamma --out-dir " + path("x")),
            3);
  write("dup.csv", "y,a,b\n0,1,1\n1,2,2\n2,3,3\n0,4,4\n3,5,5\n");
  EXPECT_EQ(run("fit --input " + path("dup.csv") + " --model tweedie --out-dir " + path("x")), 3);
}

TEST_F(CliTest, QQCommand) {
  write("r.csv", "index,residual\n0,0.9\n1,0.1\n2,0.5\n");
  ASSERT_EQ(run("qq --input " + path("r.csv") + " --out-dir " + path("q")), 0);
  EXPECT_EQ(read("q/qq.csv").substr(0, 19), "theoretical,sample\n");
  EXPECT_EQ(parse_csv(read("q/qq.csv"))[0][1], 0.1);
  write("bad.csv", "index,residual\n0,1.9\n1,0.1\n");
  EXPECT_EQ(run("qq --input " + path("bad.csv") + " --out-dir " + path("q2")), 2);
}

TEST_F(CliTest, DeterministicTrees) {
  for (const char* dir : {"a", "b"}) {
    ASSERT_EQ(run("simulate --generator figure1 --n 300 --reps 2 --arms tweedie --seed 4 "
                  "--all-figures --write-data --out-dir " + path(dir)),
              0);
    const std::string data = path(std::string(dir) + "/data_rep0.csv");
    ASSERT_EQ(run("fit --input " + data + " --model tweedie --out-dir " + path(dir)), 0);
    ASSERT_EQ(run("residuals --input " + data + " --model-file " + path(dir) + "/model.txt" +
                  " --seed 9 --out-dir " + path(dir)),
              0);
  }
  EXPECT_EQ(tree("a"), tree("b"));
}
