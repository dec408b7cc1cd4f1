#include <doctest.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fanning/kernel.hpp"
#include "fanning/point_io.hpp"
#include "support.hpp"

using namespace fanning;
using fanning::testing::points;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(fs::temp_directory_path() / ("fanning_cli_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& leaf) const { return path_ / leaf; }
  std::string str(const std::string& leaf) const { return (path_ / leaf).string(); }

 private:
  fs::path path_;
};

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "fanning");
  return cli::run(args);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

void write_canonical(const TempDir& dir) {
  const testing::CanonicalInstance inst;
  io::write_point_set(dir / "cp.txt", inst.s0.c);
  io::write_point_set(dir / "mom.txt", inst.s0.alpha);
  io::write_point_set(dir / "omega.txt", inst.omega0);
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("shoot on a single control point moves it to (1, 0)") {
    TempDir dir("shoot");
    io::write_point_set(dir / "cp.txt", points({{0, 0}}));
    io::write_point_set(dir / "mom.txt", points({{1, 0}}));
    io::write_point_set(dir / "shape.txt", points({{0, 0}, {3, 3}}));
    REQUIRE(run({"shoot", "--cp", dir.str("cp.txt"), "--mom", dir.str("mom.txt"), "--steps", "10", "--order",
                 "2", "--shape", dir.str("shape.txt"), "--out", dir.str("out")}) == cli::kExitOk);
    // Ten increments of 0.1 accumulate to 1 within one unit in the last place.
    const double ulp = std::numeric_limits<double>::epsilon();
    const Points final_cp = io::read_point_set(dir / "out/final_cp.txt");
    CHECK(std::abs(final_cp(0, 0) - 1.0) <= ulp);
    CHECK(final_cp(0, 1) == 0.0);
    CHECK(slurp(dir / "out/final_mom.txt") == "d=2 n=1\n1 0\n");
    CHECK(fs::exists(dir / "out/cp_0010.txt"));
    CHECK(fs::exists(dir / "out/shape_0010.txt"));
    CHECK(std::abs(io::read_point_set(dir / "out/final_shape.txt")(0, 0) - 1.0) <= ulp);

    REQUIRE(run({"shoot", "--cp", dir.str("cp.txt"), "--mom", dir.str("mom.txt"), "--time", "2", "--out",
                 dir.str("twice")}) == cli::kExitOk);
    CHECK(std::abs(io::read_point_set(dir / "twice/final_cp.txt")(0, 0) - 2.0) <= 2 * ulp);
  }

  TEST_CASE("exit codes") {
    TempDir dir("codes");
    write_canonical(dir);
    CHECK(run({"--help"}) == cli::kExitOk);
    CHECK(run({}) == cli::kExitUsage);
    CHECK(run({"transport", "--cp", dir.str("cp.txt")}) == cli::kExitUsage);
    CHECK(run({"transport", "--cp", dir.str("cp.txt"), "--mom", dir.str("mom.txt"), "--omega", dir.str("omega.txt"),
               "--variant", "fast", "--out", dir.str("t")}) == cli::kExitUsage);
    CHECK(run({"transport", "--cp", dir.str("cp.txt"), "--mom", dir.str("mom.txt"), "--omega", dir.str("omega.txt"),
               "--sigma", "-1", "--out", dir.str("t")}) == cli::kExitUsage);

    std::ofstream(dir / "bad.txt") << "d=2 n=2\n0 0\n1\n";
    CHECK(run({"shoot", "--cp", dir.str("bad.txt"), "--mom", dir.str("mom.txt"), "--out", dir.str("s")}) ==
          cli::kExitUsage);

    io::write_point_set(dir / "dup.txt", points({{0, 0}, {0, 0}}));
    CHECK(run({"transport", "--cp", dir.str("dup.txt"), "--mom", dir.str("mom.txt"), "--omega", dir.str("omega.txt"),
               "--out", dir.str("t")}) == cli::kExitNumeric);
  }

  TEST_CASE("transport writes every node and the diagnostics") {
    TempDir dir("transport");
    write_canonical(dir);
    REQUIRE(run({"transport", "--cp", dir.str("cp.txt"), "--mom", dir.str("mom.txt"), "--omega",
                 dir.str("omega.txt"), "--steps", "8", "--variant", "rk4", "--out", dir.str("t")}) == cli::kExitOk);
    CHECK(fs::exists(dir / "t/omega_0000.txt"));
    CHECK(fs::exists(dir / "t/omega_0008.txt"));
    CHECK(slurp(dir / "t/omega_0008.txt") == slurp(dir / "t/final_omega.txt"));
    const auto csv = read_csv(dir / "t/diagnostics.csv");
    REQUIRE(csv.size() == 10);
    CHECK(csv[0] == std::vector<std::string>{"step", "norm", "pairing"});
    CHECK(csv[9][0] == "8");
  }

  TEST_CASE("config files fill in flags not given on the command line") {
    TempDir dir("config");
    write_canonical(dir);
    std::ofstream(dir / "run.cfg") << "# transport settings\nsteps = 4\nvariant=wec\nsigma=2\n";
    REQUIRE(run({"transport", "--config", dir.str("run.cfg"), "--cp", dir.str("cp.txt"), "--mom", dir.str("mom.txt"),
                 "--omega", dir.str("omega.txt"), "--sigma", "1", "--out", dir.str("a")}) == cli::kExitOk);
    REQUIRE(run({"transport", "--steps", "4", "--variant", "wec", "--cp", dir.str("cp.txt"), "--mom",
                 dir.str("mom.txt"), "--omega", dir.str("omega.txt"), "--out", dir.str("b")}) == cli::kExitOk);
    CHECK(slurp(dir / "a/final_omega.txt") == slurp(dir / "b/final_omega.txt"));
    CHECK(fs::exists(dir / "a/omega_0004.txt"));
    CHECK_FALSE(fs::exists(dir / "a/omega_0005.txt"));

    std::ofstream(dir / "broken.cfg") << "steps\n";
    CHECK(run({"transport", "--config", dir.str("broken.cfg"), "--cp", dir.str("cp.txt"), "--mom",
               dir.str("mom.txt"), "--omega", dir.str("omega.txt"), "--out", dir.str("c")}) == cli::kExitUsage);
  }

  TEST_CASE("convergence CSV layout and trend") {
    TempDir dir("convergence");
    write_canonical(dir);
    REQUIRE(run({"convergence", "--cp", dir.str("cp.txt"), "--mom", dir.str("mom.txt"), "--omega",
                 dir.str("omega.txt"), "--grid", "10,25,50,100,200,400", "--variants", "spg,main", "--out",
                 dir.str("conv.csv")}) == cli::kExitOk);
    const auto csv = read_csv(dir / "conv.csv");
    REQUIRE(csv.size() == 13);
    CHECK(csv[0] == std::vector<std::string>{"variant", "N", "relative_error", "wall_time_seconds"});
    CHECK(csv[1][0] == "main");
    CHECK(csv[7][0] == "spg");
    double previous = 1e300;
    for (int r = 1; r <= 5; ++r) {
      const double e = std::stod(csv[r][2]);
      CHECK(e <= 1.05 * previous);
      previous = e;
    }
    CHECK(csv[6][1] == "400");
    CHECK(std::stod(csv[6][2]) == 0.0);
    CHECK(csv[1][3].find('.') == csv[1][3].size() - 4);
  }

  TEST_CASE("oracle-check") {
    TempDir dir("oracle");
    write_canonical(dir);
    REQUIRE(run({"oracle-check", "--cp", dir.str("cp.txt"), "--mom", dir.str("mom.txt"), "--omega",
                 dir.str("omega.txt"), "--fine", "10000", "--grid", "100", "--out", dir.str("o.csv")}) ==
            cli::kExitOk);
    const auto csv = read_csv(dir / "o.csv");
    REQUIRE(csv.size() == 2);
    CHECK(csv[1][0] == "100");
    CHECK(std::stod(csv[1][1]) <= 1e-2);

    testing::Rng rng(1);
    io::write_point_set(dir / "big.txt", rng.uniform_points(7, 2, 0, 5));
    CHECK(run({"oracle-check", "--cp", dir.str("big.txt"), "--mom", dir.str("big.txt"), "--omega", dir.str("big.txt"),
               "--out", dir.str("o2.csv")}) == cli::kExitUsage);
  }

  TEST_CASE("register, regress and exp-parallelize pipeline") {
    TempDir dir("pipeline");
    const KernelConfig cfg;
    const ControlPoints c0 = points({{-0.5, -0.5}, {0.5, -0.5}, {-0.5, 0.5}, {0.5, 0.5}});
    const ShapePoints y0 = points({{1, 0}, {0, 1}, {-1, 0}, {0, -1}, {0.7, 0.7}, {-0.7, -0.7}});
    const Momenta a = points({{0.2, 0}, {0, 0.2}, {-0.1, 0}, {0, -0.1}});
    const auto shapes = flow_shape(shoot({c0, a}, {10, 2}, cfg), y0);
    io::write_point_set(dir / "cp.txt", c0);
    io::write_point_set(dir / "y0.txt", y0);
    io::write_point_set(dir / "y5.txt", shapes[5]);
    io::write_point_set(dir / "y10.txt", shapes[10]);

    REQUIRE(run({"regress", "--baseline", dir.str("y0.txt"), "--obs", dir.str("y0.txt") + ",70", "--obs",
                 dir.str("y5.txt") + ",71", "--obs", dir.str("y10.txt") + ",72", "--cp", dir.str("cp.txt"),
                 "--max-iters", "300", "--out", dir.str("ref")}) == cli::kExitOk);
    for (const char* f : {"initial_cp.txt", "initial_mom.txt", "baseline.txt", "reference.cfg", "loss.csv",
                          "fit_0.txt", "fit_2.txt"}) {
      CHECK(fs::exists(dir / "ref" / f));
    }
    CHECK(slurp(dir / "ref/reference.cfg").find("time_start=70\ntime_end=72\n") != std::string::npos);

    REQUIRE(run({"register", "--source", dir.str("y0.txt"), "--target", dir.str("y5.txt"), "--cp", dir.str("cp.txt"),
                 "--max-iters", "300", "--out", dir.str("reg")}) == cli::kExitOk);
    for (const char* f : {"momenta.txt", "cp.txt", "deformed.txt", "loss.csv"}) CHECK(fs::exists(dir / "reg" / f));
    const auto loss = read_csv(dir / "reg/loss.csv");
    CHECK(std::stod(loss.back()[1]) < std::stod(loss[1][1]));

    REQUIRE(run({"exp-parallelize", "--reference", dir.str("ref"), "--omega", dir.str("reg/momenta.txt"), "--times",
                 "80,80.5,81", "--onset", "80", "--pace", "2", "--ref-baseline", "70", "--out", dir.str("pred")}) ==
            cli::kExitOk);
    const auto pred = read_csv(dir / "pred/predictions.csv");
    REQUIRE(pred.size() == 4);
    CHECK(pred[0] == std::vector<std::string>{"index", "time", "reference_time", "node", "file"});
    CHECK(pred[2][2] == "71");
    CHECK(pred[2][3] == "5");
    CHECK(pred[3][3] == "10");
    CHECK(fs::exists(dir / "pred/prediction_0002.txt"));

    CHECK(run({"exp-parallelize", "--reference", dir.str("ref"), "--omega", dir.str("reg/momenta.txt"), "--times",
               "90", "--onset", "80", "--ref-baseline", "70", "--out", dir.str("pred2")}) == cli::kExitUsage);
  }
}
