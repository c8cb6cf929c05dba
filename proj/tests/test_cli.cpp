#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cbd/ingestion.hpp"
#include "cbd/report.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(CBD_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("cbd_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }

  std::string example(const std::string& name, const std::string& extra = "") {
    const auto p = (dir_ / (name + ".json")).string();
    EXPECT_EQ(run("generate example --name " + name + " " + extra + " -o " + p).code, 0);
    return p;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, AnalyzeOppositeCorrelations) {
  const auto fig9 = example("fig9");
  const auto r = run("analyze " + fig9 + " --witness");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("verdict: contextual"), std::string::npos);
  EXPECT_NE(r.out.find("certificate:"), std::string::npos);

  const auto m = run("analyze " + fig9 + " --measure --format json");
  EXPECT_EQ(m.code, 1);
  const auto report = cbd::report_from_json(m.out);
  EXPECT_EQ(report.measure->total_variation, cbd::Rational(2));
  EXPECT_EQ(report.measure->measure, cbd::Rational(1));
}

TEST_F(Cli, AnalyzeNoncontextualVariant) {
  const auto flat = example("fig14", "--p 1/2");
  const auto r = run("analyze " + flat + " --measure --format json");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(cbd::report_from_json(r.out).measure->total_variation, cbd::Rational(1));
}

TEST_F(Cli, AnalyzeReadsStdinAndSeveralFiles) {
  const auto fig9 = example("fig9");
  EXPECT_EQ(run("analyze - < " + fig9).code, 1);
  const auto fig1 = example("fig1");
  EXPECT_EQ(run("analyze " + fig1).code, 0);
  const auto both = run("analyze " + fig1 + " " + fig9);
  EXPECT_EQ(both.code, 1);
  EXPECT_LT(both.out.find(fig1), both.out.find(fig9));
}

TEST_F(Cli, AnalyzeErrorsExitTwo) {
  EXPECT_EQ(run("analyze " + (dir_ / "missing.json").string()).code, 2);
  EXPECT_EQ(run("analyze " + write("bad.json", "{\"schema_version\": 1}")).code, 2);
  EXPECT_EQ(run("analyze " + example("fig9") + " --max-columns 8").code, 2);
  EXPECT_EQ(run("analyze").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, Cyclic) {
  const auto fig9 = run("cyclic " + example("fig9") + " --format json");
  EXPECT_EQ(fig9.code, 1);
  const auto r = cbd::report_from_json(fig9.out);
  EXPECT_FALSE(r.verdict.has_value());
  EXPECT_EQ(r.cyclic->cycles.at(0).rank, 2U);
  EXPECT_EQ(r.cyclic->cycles.at(0).delta, cbd::Rational(2));

  const auto szlg = run("cyclic " + example("szlg"));
  EXPECT_EQ(szlg.code, 1);
  EXPECT_NE(szlg.out.find("rank 3"), std::string::npos);

  const auto b = run("cyclic " + example("figB"));
  EXPECT_EQ(b.code, 0);
  EXPECT_NE(b.out.find("cyclic: no (CYC1"), std::string::npos);
}

TEST_F(Cli, Estimate) {
  const auto layout = write("layout.json", R"({"schema_version": 1,
    "contents": [{"label": "q1", "values": ["1", "2"], "plus": "1"},
                 {"label": "q2", "values": ["1", "2"], "plus": "1"},
                 {"label": "q3", "values": ["1", "2"], "plus": "1"}],
    "contexts": [{"label": "c1", "contents": ["q1", "q2"]},
                 {"label": "c2", "contents": ["q2", "q3"]},
                 {"label": "c3", "contents": ["q1", "q3"]}]})");
  std::ostringstream csv;
  csv << "context,q1,q2,q3\n";
  for (int i = 0; i < 7; ++i) csv << "c1,1,1,\nc2,,1,1\n";
  for (int i = 0; i < 3; ++i) csv << "c1,2,2,\nc2,,2,2\nc3,1,,2\nc3,2,,1\n";
  for (int i = 0; i < 4; ++i) csv << "c3,1,,1\n";
  const auto trials = write("trials.csv", csv.str());
  const auto out = (dir_ / "est.json").string();
  EXPECT_EQ(run("estimate " + trials + " " + layout + " -o " + out).code, 0);
  std::ifstream in(out);
  const std::string text((std::istreambuf_iterator<char>(in)), {});
  EXPECT_EQ(cbd::parse_system(text), cbd::example_system("fig10"));

  const auto partial = write("partial.csv", "context,q1,q2,q3\nc1,1,1,\n");
  EXPECT_EQ(run("estimate " + partial + " " + layout).code, 2);
}

TEST_F(Cli, GenerateEprB) {
  const auto out = (dir_ / "epr.json").string();
  EXPECT_EQ(run("generate epr-b --angles 0,0.7853981633974483,1.5707963267948966,-0.7853981633974483 -o " + out).code,
            0);
  const auto r = run("cyclic " + out + " --format json");
  EXPECT_EQ(r.code, 1);
  EXPECT_NEAR(cbd::report_from_json(r.out).cyclic->cycles.at(0).lhs.to_double(), 2.8284271247, 1e-5);

  const auto same = (dir_ / "same.json").string();
  EXPECT_EQ(run("generate epr-b --angles 1,1,1,1 -o " + same).code, 0);
  EXPECT_EQ(run("analyze " + same).code, 0);
  EXPECT_EQ(run("generate epr-b --angles 1,2,3").code, 2);
}

TEST_F(Cli, GenerateExampleVerbatim) {
  const auto r = run("generate example --name fig9");
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, cbd::serialize_system(cbd::example_system("fig9")));
  EXPECT_EQ(run("generate example --name nope").code, 2);
}
