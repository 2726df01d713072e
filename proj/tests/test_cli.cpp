#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"
#include "conducta/graph.hpp"
#include "support.hpp"

namespace fs = std::filesystem;
using namespace conducta;
using namespace conducta::testing;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("conducta_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    unsetenv("CONDUCTA_SEED");
  }
  void TearDown() override {
    unsetenv("CONDUCTA_SEED");
    fs::remove_all(dir_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write_graph(const std::string& name, const WeightedGraph& g) const {
    std::ofstream out(dir_ / name);
    write_edge_list(out, g);
    return path(name);
  }

  std::string write_training(const std::string& name, std::uint64_t seed, int n = 25) const {
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
    synthetic_gp_data(seed, n, 1.0, 1.0, 0.01, x, y);
    std::ofstream out(dir_ / name);
    out.precision(17);
    out << "c0,c1,conductance\n";
    for (int i = 0; i < n; ++i) out << x(i, 0) << ',' << x(i, 1) << ',' << y[i] << '\n';
    return path(name);
  }

  std::string write_partition_config(const std::string& name, const std::string& edges, const std::string& extra) const {
    spit(dir_ / "labels.txt", [] {
      std::string s;
      for (int i = 0; i < 24; ++i) s += i < 12 ? "0\n" : "1\n";
      return s;
    }());
    spit(dir_ / name, R"({"schema_version": 1, "input": {"edges": ")" + edges +
                          R"("}, "labels": "labels.txt", "output_dir": "out", "seed": 5, "pipeline": {"r_refs": 4,)" +
                          extra + R"( "mcmc": {"steps": 300, "burn_in": 100, "chains": 2}}})");
    return path(name);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, NoSubcommandIsUsageError) { EXPECT_EQ(run_cli({}).code, 2); }

TEST_F(CliTest, HelpExitsZero) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("partition"), std::string::npos);
}

TEST_F(CliTest, UnknownOptionIsUsageError) { EXPECT_EQ(run_cli({"embed", "--bogus"}).code, 2); }

TEST_F(CliTest, BuildGraphFromPoints) {
  const auto blobs = gaussian_blobs(0, 30);
  {
    std::ofstream out(dir_ / "pts.csv");
    out.precision(17);
    out << "x,y\n";
    for (Eigen::Index i = 0; i < blobs.points.rows(); ++i) out << blobs.points(i, 0) << ',' << blobs.points(i, 1) << '\n';
  }
  const auto r = run_cli({"build-graph", "--points", path("pts.csv"), "-k", "8", "-o", path("g.txt")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("vertices 60"), std::string::npos);
  EXPECT_EQ(load_edge_list(path("g.txt")).num_vertices(), 60u);
}

TEST_F(CliTest, MissingInputNamesThePath) {
  const auto missing = path("nope.txt");
  const auto r = run_cli({"build-graph", "--edges", missing, "-o", path("g.txt")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(missing), std::string::npos);
}

TEST_F(CliTest, DisconnectedGraphWarns) {
  const auto g = write_graph("g.txt", WeightedGraph(4, {{0, 1, 1.0}, {2, 3, 1.0}}));
  const auto r = run_cli({"build-graph", "--edges", g, "-o", path("h.txt")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("disconnected"), std::string::npos);
}

TEST_F(CliTest, ConductanceRows) {
  const auto g = write_graph("g.txt", two_triangles());
  auto r = run_cli({"conductance", "-g", g, "--centers", "0", "--radius", "1", "-o", path("p.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("0,ok,1,0.14285714285714285"), std::string::npos);
  EXPECT_NE(slurp(path("p.csv")).find("0,1,0.5,0.07142857142857142,0.14285714285714285,feasible"),
            std::string::npos);

  r = run_cli({"conductance", "-g", g, "--centers", "0", "--budget", "0.1", "-o", path("p.csv")});
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("0,infeasible,,"), std::string::npos);

  r = run_cli({"conductance", "-g", g, "-o", path("p.csv")});
  ASSERT_EQ(r.code, 0);
  std::size_t lines = 0;
  for (const char c : r.out) lines += c == '\n';
  EXPECT_EQ(lines, 7u);

  EXPECT_EQ(run_cli({"conductance", "-g", g, "--centers", "9", "-o", path("p.csv")}).code, 2);
  EXPECT_EQ(run_cli({"conductance", "-g", g, "--budget", "0", "-o", path("p.csv")}).code, 2);
}

TEST_F(CliTest, EmbedWritesCsvAndDistortion) {
  const auto g = write_graph("g.txt", path3());
  const auto r = run_cli({"embed", "-g", g, "-r", "2", "--seed", "1", "--distortion", "-o", path("e.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("distortion"), std::string::npos);
  EXPECT_EQ(slurp(path("e.csv")).substr(0, 13), "c0,c1,l2norm\n");
  EXPECT_EQ(run_cli({"embed", "-g", g, "-r", "5", "-o", path("e.csv")}).code, 2);
}

TEST_F(CliTest, McmcSingleChainOmitsRhat) {
  const auto t = write_training("t.csv", 1);
  const auto r = run_cli({"mcmc", "-t", t, "--steps", "300", "--burn-in", "100", "--chains", "1", "-o", path("s.csv"),
                          "--diagnostics", path("d.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto diag = nlohmann::json::parse(slurp(path("d.json")));
  EXPECT_EQ(diag["chains"], 1);
  EXPECT_EQ(diag["draws_per_chain"], 200);
  for (const auto& [_, p] : diag["parameters"].items()) EXPECT_FALSE(p.contains("rhat"));

  const auto r2 = run_cli({"mcmc", "-t", t, "--steps", "300", "--burn-in", "100", "--chains", "2", "-o",
                           path("s2.csv"), "--diagnostics", path("d2.json")});
  ASSERT_EQ(r2.code, 0);
  EXPECT_TRUE(nlohmann::json::parse(slurp(path("d2.json")))["parameters"]["lengthscale"].contains("rhat"));
}

TEST_F(CliTest, McmcStepsNotAboveBurnInIsUsageError) {
  const auto t = write_training("t.csv", 2);
  EXPECT_EQ(run_cli({"mcmc", "-t", t, "--steps", "100", "--burn-in", "100", "-o", path("s.csv")}).code, 2);
}

TEST_F(CliTest, SeedEnvironmentOverridesDefault) {
  const auto t = write_training("t.csv", 3);
  const std::vector<std::string> base{"mcmc", "-t", t, "--steps", "150", "--burn-in", "50", "--chains", "1", "-o"};
  auto with = [&](std::vector<std::string> v, const std::string& out) {
    v.push_back(path(out));
    return v;
  };
  ASSERT_EQ(run_cli(with(base, "a.csv")).code, 0);
  setenv("CONDUCTA_SEED", "77", 1);
  ASSERT_EQ(run_cli(with(base, "b.csv")).code, 0);
  auto explicit_seed = with(base, "c.csv");
  explicit_seed.insert(explicit_seed.end(), {"--seed", "77"});
  unsetenv("CONDUCTA_SEED");
  ASSERT_EQ(run_cli(explicit_seed).code, 0);
  EXPECT_NE(slurp(path("a.csv")), slurp(path("b.csv")));
  EXPECT_EQ(slurp(path("b.csv")), slurp(path("c.csv")));

  setenv("CONDUCTA_SEED", "not-a-number", 1);
  EXPECT_EQ(run_cli(with(base, "d.csv")).code, 2);
}

TEST_F(CliTest, FitGpAndPlotRoundTrip) {
  const auto t = write_training("t.csv", 4);
  spit(dir_ / "pts.csv", "c0,c1\n0,0\n1,1\n-2,0.5\n");
  auto r = run_cli({"fit-gp", "-t", t, "--lengthscale", "1", "--signal-var", "1", "--noise-var", "0.01", "-o",
                    path("m.json"), "--points", path("pts.csv"), "--predictions", path("pred.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("log_marginal_likelihood"), std::string::npos);
  const auto model = nlohmann::json::parse(slurp(path("m.json")));
  EXPECT_EQ(model["n"], 25);
  EXPECT_EQ(model["training_file"], "t.csv");

  r = run_cli({"plot", "--model", path("m.json"), "--points", path("pts.csv"), "--paths", "2", "--svg",
               path("p.svg"), "--csv", path("p.csv")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(path("p.svg")).find("</svg>"), std::string::npos);
  EXPECT_EQ(slurp(path("p.csv")).substr(0, 30), "x_norm,mean,lo,hi,path0,path1\n");

  ASSERT_EQ(run_cli({"mcmc", "-t", t, "--steps", "200", "--burn-in", "50", "--chains", "2", "-o", path("s.csv")}).code,
            0);
  r = run_cli({"plot", "--samples", path("s.csv"), "-t", t, "--points", path("pts.csv"), "--paths", "3", "--svg",
               path("q.svg")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("paths 3"), std::string::npos);
  r = run_cli({"fit-gp", "-t", t, "--samples", path("s.csv"), "-o", path("m2.json")});
  EXPECT_EQ(r.code, 0) << r.err;
}

TEST_F(CliTest, ModelChecksumMismatchIsRejected) {
  const auto t = write_training("t.csv", 5);
  spit(dir_ / "pts.csv", "c0,c1\n0,0\n");
  ASSERT_EQ(run_cli({"fit-gp", "-t", t, "-o", path("m.json")}).code, 0);
  write_training("t.csv", 6);
  const auto r = run_cli({"plot", "--model", path("m.json"), "--points", path("pts.csv"), "--svg", path("p.svg")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("checksum"), std::string::npos);
}

TEST_F(CliTest, PartitionRecoversPlantedCliquesReproducibly) {
  const auto edges = write_graph("g.txt", two_cliques(12));
  const auto cfg = write_partition_config("run.json", "g.txt", "");
  auto r = run_cli({"partition", cfg});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto first = slurp(dir_ / "out" / "clustering.json");
  const auto doc = nlohmann::json::parse(first);
  EXPECT_EQ(doc["clusters"].size(), 2u);
  EXPECT_EQ(doc["ari"], 1.0);
  EXPECT_EQ(doc["seeds"]["pipeline"], 5);
  for (const char* f : {"training.csv", "predictions.csv", "samples.csv", "report.txt"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;

  r = run_cli({"partition", cfg});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(slurp(dir_ / "out" / "clustering.json"), first);

  r = run_cli({"partition", cfg, "--seed", "6"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "out" / "clustering.json"))["seeds"]["pipeline"], 6);
}

TEST_F(CliTest, PartitionValidatesBeforeComputing) {
  write_graph("g.txt", two_cliques(12));
  const auto cfg = write_partition_config("run.json", "g.txt", R"( "n_train": 500,)");
  const auto r = run_cli({"partition", cfg});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("n_train"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "out" / "clustering.json"));

  spit(dir_ / "bad.json", R"({"schema_version": 1, "input": {"edges": "g.txt"}, "surprise": 1})");
  EXPECT_EQ(run_cli({"partition", path("bad.json")}).code, 2);
  spit(dir_ / "broken.json", "{");
  EXPECT_EQ(run_cli({"partition", path("broken.json")}).code, 2);
}
