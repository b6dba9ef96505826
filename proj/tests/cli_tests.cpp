// End-to-end checks of the artsim binary: gen -> train -> eval -> ablate on
// a small instance in a temp directory, exercising flags, config files, exit
// codes and emitted files.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <tuple>

#include "artsim/ablation.hpp"
#include "artsim/features.hpp"
#include "artsim/graph.hpp"
#include "artsim/kv.hpp"

namespace fs = std::filesystem;
using namespace artsim;

namespace {

const std::string kCli = ARTSIM_CLI_PATH;

struct RunResult {
  int exit_code;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  const std::string log = "/tmp/artsim_cli_test.log";
  const std::string cmd = kCli + " " + args + " >" + log + " 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream f(log);
  std::stringstream ss;
  ss << f.rdbuf();
  return {WEXITSTATUS(rc), ss.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  REQUIRE(f.good());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

struct TempDir {
  std::string path;
  explicit TempDir(const std::string& name) : path("/tmp/artsim_cli_" + name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
};

const std::string kGenFlags =
    " --num_nodes 160 --num_communities 4 --knn_edges 4 --dim_clap 8"
    " --dim_acoustic 6 --dim_random 8 --latent_dim 8";

}  // namespace

TEST_CASE("gen writes the artifact set and is byte-reproducible") {
  TempDir dir("gen");
  auto r = run("gen --data-dir " + dir.path + kGenFlags + " --seed 11");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("160 nodes") != std::string::npos);
  for (const char* f : {"edges.tsv", "split.tsv", "nodes.tsv", "manifest.txt",
                        "clap_like.ftrx", "acoustic_like.ftrx", "tags_like.ftrx",
                        "random.ftrx"})
    CHECK(fs::exists(dir.path + "/" + std::string(f)));

  TempDir dir2("gen_rerun");
  auto r2 = run("gen --data-dir " + dir2.path + kGenFlags + " --seed 11");
  CHECK(r2.exit_code == 0);
  for (const char* f : {"edges.tsv", "split.tsv", "manifest.txt", "clap_like.ftrx",
                        "random.ftrx"})
    CHECK(slurp(dir.path + "/" + std::string(f)) ==
          slurp(dir2.path + "/" + std::string(f)));
}

TEST_CASE("gen reads a config file with flag precedence and rejects bad keys") {
  TempDir dir("gen_cfg");
  {
    std::ofstream cfg(dir.path + "/gen.cfg");
    cfg << "num_nodes=160\nnum_communities=4\nknn_edges=4\ndim_clap=8\n"
           "dim_acoustic=6\ndim_random=8\nlatent_dim=8\nseed=3\n";
  }
  // --seed on the command line overrides the config value.
  auto r = run("gen --data-dir " + dir.path + " --config " + dir.path +
               "/gen.cfg --seed 11");
  CHECK(r.exit_code == 0);
  KvFile manifest = KvFile::parse_file(dir.path + "/manifest.txt");
  CHECK(manifest.get("seed") == "11");
  CHECK(manifest.get("num_nodes") == "160");

  {
    std::ofstream cfg(dir.path + "/bad.cfg");
    cfg << "num_nodez=100\n";
  }
  auto bad = run("gen --data-dir " + dir.path + " --config " + dir.path + "/bad.cfg");
  CHECK(bad.exit_code != 0);
}

TEST_CASE("gen fails on an unwritable directory") {
  auto r = run("gen --data-dir /proc/nope" + kGenFlags);
  CHECK(r.exit_code != 0);
}

TEST_CASE("train, eval and ablate chain") {
  TempDir dir("chain");
  REQUIRE(run("gen --data-dir " + dir.path + kGenFlags + " --seed 11").exit_code == 0);

  SUBCASE("train layers 0 logs the MLP-only baseline and is deterministic") {
    auto r = run("train --data-dir " + dir.path +
                 " --layers 0 --features clap_like --epochs 2 --hidden-dim 16"
                 " --embed-dim 8 --k 5 --seed 7");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("MLP-only baseline") != std::string::npos);
    CHECK(r.output.find("dim 8") != std::string::npos);
    CHECK(fs::exists(dir.path + "/model.prms"));
    CHECK(fs::exists(dir.path + "/model.cfg"));
    CHECK(fs::exists(dir.path + "/history.csv"));
    const std::string history = slurp(dir.path + "/history.csv");

    auto r2 = run("train --data-dir " + dir.path +
                  " --layers 0 --features clap_like --epochs 2 --hidden-dim 16"
                  " --embed-dim 8 --k 5 --seed 7");
    CHECK(r2.exit_code == 0);
    CHECK(slurp(dir.path + "/history.csv") == history);
  }

  SUBCASE("concatenated features report the summed dim") {
    auto r = run("train --data-dir " + dir.path +
                 " --layers 1 --features clap_like+tags_like --epochs 2"
                 " --hidden-dim 16 --embed-dim 8 --k 5 --seed 7");
    CHECK(r.exit_code == 0);
    // dim_clap 8 + num_communities 4
    CHECK(r.output.find("'clap_like+tags_like' -> dim 12") != std::string::npos);
  }

  SUBCASE("eval on val and test produces disjoint query sets and a clamped k") {
    REQUIRE(run("train --data-dir " + dir.path +
                " --layers 1 --features clap_like --epochs 2 --hidden-dim 16"
                " --embed-dim 8 --k 5 --seed 7")
                .exit_code == 0);
    auto rv = run("eval --data-dir " + dir.path + " --checkpoint " + dir.path +
                  "/model.prms --phase val --k 5");
    auto rt = run("eval --data-dir " + dir.path + " --checkpoint " + dir.path +
                  "/model.prms --phase test --k 5");
    CHECK(rv.exit_code == 0);
    CHECK(rt.exit_code == 0);
    REQUIRE(fs::exists(dir.path + "/eval_val.csv"));
    REQUIRE(fs::exists(dir.path + "/eval_test.csv"));

    auto read_queries = [](const std::string& path) {
      std::ifstream f(path);
      std::string line;
      std::getline(f, line);  // header
      std::set<std::string> ids;
      std::vector<double> vals;
      double mean = -1;
      while (std::getline(f, line)) {
        if (line.rfind("# mean=", 0) == 0) {
          mean = std::stod(line.substr(7, line.find(' ', 7) - 7));
          continue;
        }
        auto comma = line.find(',');
        ids.insert(line.substr(0, comma));
        vals.push_back(std::stod(line.substr(comma + 1)));
      }
      return std::tuple(ids, vals, mean);
    };
    auto [vq, vvals, vmean] = read_queries(dir.path + "/eval_val.csv");
    auto [tq, tvals, tmean] = read_queries(dir.path + "/eval_test.csv");
    CHECK(!vq.empty());
    CHECK(!tq.empty());
    for (const auto& q : vq) CHECK_FALSE(tq.count(q));
    // The summary mean equals the mean of the per-query rows.
    double sum = 0;
    for (double v : tvals) sum += v;
    CHECK(tmean == doctest::Approx(sum / tvals.size()).epsilon(1e-12));

    // k beyond the candidate count is clamped with a warning (16 val nodes).
    auto rk = run("eval --data-dir " + dir.path + " --checkpoint " + dir.path +
                  "/model.prms --phase val --k 500");
    CHECK(rk.exit_code == 0);
    CHECK(rk.output.find("clamping") != std::string::npos);
  }

  SUBCASE("eval rejects a shape-incompatible checkpoint") {
    REQUIRE(run("train --data-dir " + dir.path +
                " --layers 1 --features clap_like --epochs 1 --hidden-dim 16"
                " --embed-dim 8 --k 5 --seed 7")
                .exit_code == 0);
    // Lie about the feature set in the sibling config: dims no longer match.
    KvFile cfg = KvFile::parse_file(dir.path + "/model.cfg");
    cfg.set("features", "clap_like+tags_like");
    cfg.write_file(dir.path + "/model.cfg");
    auto r = run("eval --data-dir " + dir.path + " --checkpoint " + dir.path +
                 "/model.prms --phase val --k 5");
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("dim mismatch") != std::string::npos);
  }

  SUBCASE("train rejects inconsistent artifacts") {
    TempDir broken("broken");
    for (const auto& entry : fs::directory_iterator(dir.path))
      if (entry.path().extension() != ".csv" && entry.path().extension() != ".prms" &&
          entry.path().extension() != ".cfg")
        fs::copy(entry.path(), broken.path + "/" + entry.path().filename().string());
    // Truncate a tier to the wrong row count.
    save_ftrx_file(broken.path + "/clap_like.ftrx", MatF::Ones(10, 8));
    auto r = run("train --data-dir " + broken.path +
                 " --layers 0 --features clap_like --epochs 1 --hidden-dim 16"
                 " --embed-dim 8 --k 5");
    CHECK(r.exit_code != 0);
    CHECK(r.output.find("expected 160") != std::string::npos);
  }
}

TEST_CASE("ablate writes a parseable CSV and optional SVG, reruns byte-identically") {
  TempDir dir("ablate");
  REQUIRE(run("gen --data-dir " + dir.path + kGenFlags + " --seed 11").exit_code == 0);
  const std::string flags = " --features tags_like,random --layers 0,1 --seeds 2"
                            " --epochs 2 --hidden-dim 16 --embed-dim 8 --k 5"
                            " --seed 21 --svg " + dir.path + "/plot.svg";
  auto r = run("ablate --data-dir " + dir.path + flags);
  CHECK(r.exit_code == 0);
  REQUIRE(fs::exists(dir.path + "/ablate.csv"));
  REQUIRE(fs::exists(dir.path + "/plot.svg"));

  std::ifstream csv(dir.path + "/ablate.csv");
  auto parsed = parse_ablation_csv(csv);
  CHECK(parsed.rows.size() == 2 * 2 * 2);
  CHECK(parsed.aggregates.size() == 4);

  const std::string first = slurp(dir.path + "/ablate.csv");
  auto r2 = run("ablate --data-dir " + dir.path + flags);
  CHECK(r2.exit_code == 0);
  CHECK(slurp(dir.path + "/ablate.csv") == first);

  const std::string svg = slurp(dir.path + "/plot.svg");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("tags_like") != std::string::npos);
}

TEST_CASE("unknown flags and missing data dirs fail cleanly") {
  CHECK(run("train --data-dir /tmp/does_not_exist_artsim --layers 0").exit_code != 0);
  CHECK(run("frobnicate").exit_code != 0);
  TempDir dir("badflag");
  CHECK(run("gen --data-dir " + dir.path + " --no-such-flag 3").exit_code != 0);
}
