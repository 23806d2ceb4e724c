#include "msmrf/cli.hpp"

#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "msmrf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = msmrf::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("msmrf-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
  void write(const std::string& name, const std::string& text) const { std::ofstream(path(name)) << text; }
  std::string read(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
  }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

const char* kSmallModel = R"({
  "msmrf-model": 1,
  "grid": {"height": 4, "width": 5, "dim": 1},
  "ground": 0,
  "alpha": -0.5,
  "beta": 0.4,
  "continuous": {"family": "gaussian-auto", "params": {"mean": 0.2, "precision": 1.0, "coupling": 0.1}},
  "domain": [-8, 8]
})";

double summary_value(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  std::string k;
  double v;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    if (ls >> k && k == key && ls >> v) return v;
  }
  return NAN;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("zero sweeps write an all-ground field") {
    Scratch s;
    s.write("m.json", kSmallModel);
    const auto r = run({"sample", "--model", s.path("m.json"), "--sweeps", "0", "--out", s.path("f.txt")});
    REQUIRE(r.code == 0);
    CHECK(s.read("f.txt") == "msmrf-field 1 4 5 1\nG G G G G\nG G G G G\nG G G G G\nG G G G G\n");
  }

  TEST_CASE("sampling is byte-reproducible") {
    Scratch s;
    s.write("m.json", kSmallModel);
    for (const char* sched : {"raster", "checkerboard"}) {
      const std::vector<std::string> base{"sample", "--model", s.path("m.json"), "--sweeps", "30", "--seed", "9",
                                          "--schedule", sched, "--threads", "3"};
      auto a = base, b = base;
      a.insert(a.end(), {"--out", s.path("a.txt")});
      b.insert(b.end(), {"--out", s.path("b.txt")});
      const auto ra = run(a), rb = run(b);
      REQUIRE(ra.code == 0);
      REQUIRE(rb.code == 0);
      CHECK(ra.out == rb.out);
      CHECK(s.read("a.txt") == s.read("b.txt"));
    }
  }

  TEST_CASE("independent preset matches its analytic atom probability") {
    Scratch s;
    const auto r = run({"sample", "--preset", "independent", "--sweeps", "500", "--seed", "3", "--out", s.path("f.txt")});
    REQUIRE(r.code == 0);
    const double p = 1.0 / std::sqrt(2.0 * M_PI);
    const double rho = p / (1.0 + p);
    const double frac = summary_value(r.out, "atom_fraction");
    CHECK(std::abs(frac - rho) < 3 * std::sqrt(rho * (1 - rho) / 4096.0));
  }

  TEST_CASE("fit round-trips sampled parameters") {
    Scratch s;
    REQUIRE(run({"sample", "--preset", "independent", "--sweeps", "50", "--seed", "4", "--out", s.path("f.txt")}).code == 0);
    const auto r = run({"fit", "--data", s.path("f.txt"), "--no-beta", "--out", s.path("fit.json")});
    REQUIRE(r.code == 0);
    CHECK(std::abs(summary_value(r.out, "alpha")) < 0.1);
    const auto report = s.read("fit.json");
    CHECK(report.find("\"fit\"") != std::string::npos);
    CHECK(report.find("fnv1a64:") != std::string::npos);
    // The report is itself a model document that can drive a fit.
    const auto again = run({"fit", "--data", s.path("f.txt"), "--model", s.path("fit.json"), "--no-beta"});
    CHECK(again.code == 0);
    CHECK(summary_value(again.out, "iterations") <= 2);
  }

  TEST_CASE("all-ground data exits 4 with a boundary diagnosis") {
    Scratch s;
    s.write("m.json", kSmallModel);
    REQUIRE(run({"sample", "--model", s.path("m.json"), "--sweeps", "0", "--out", s.path("g.txt")}).code == 0);
    const auto r = run({"fit", "--data", s.path("g.txt"), "--out", s.path("fit.json")});
    CHECK(r.code == 4);
    CHECK(r.out.find("boundary") != std::string::npos);
    CHECK(fs::exists(s.path("fit.json")));
  }

  TEST_CASE("truncated data exits 2 naming the line") {
    Scratch s;
    s.write("t.txt", "msmrf-field 1 3 2 1\nG 0.5\nG G\n");
    const auto r = run({"fit", "--data", s.path("t.txt")});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 4") != std::string::npos);
  }

  TEST_CASE("input errors exit 2") {
    Scratch s;
    s.write("bad.json", "{\n \"msmrf-model\": 1,\n \"alpha\": oops\n}\n");
    const auto r = run({"sample", "--model", s.path("bad.json")});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK(run({"sample", "--model", s.path("missing.json")}).code == 2);
    CHECK(run({"sample", "--preset", "nope"}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({}).code == 2);
    CHECK(run({"sample", "--preset", "independent", "--out", s.path("no/such/dir/f.txt")}).code == 2);
  }

  TEST_CASE("verify levels and the negative control") {
    const auto quick = run({"verify", "--level", "quick"});
    CHECK(quick.code == 0);
    CHECK(quick.out.find("FAIL") == std::string::npos);
    CHECK(quick.out.find("PASS beta-symmetry") != std::string::npos);
    const auto bad = run({"verify", "--inject", "beta-asymmetry"});
    CHECK(bad.code == 1);
    CHECK(bad.out.find("FAIL beta-symmetry") != std::string::npos);
  }

  TEST_CASE("decompose tables") {
    Scratch s;
    s.write("sum.json", R"({"msmrf-function": 1, "sites": 2, "ground": 0, "grids": [0, 1, 2], "function": "x1 + x2"})");
    auto r = run({"decompose", "--spec", s.path("sum.json"), "--out", s.path("sum.txt")});
    REQUIRE(r.code == 0);
    const auto sum = s.read("sum.txt");
    CHECK(sum.find("clique 0 1 shape 3 3\n0 0 0 0 0 0 0 0 0\n") != std::string::npos);

    s.write("prod.json", R"({"msmrf-function": 1, "sites": 2, "ground": 0, "grids": [0, 1, 2], "function": "x1 * x2"})");
    r = run({"decompose", "--spec", s.path("prod.json"), "--out", s.path("prod.txt")});
    REQUIRE(r.code == 0);
    const auto prod = s.read("prod.txt");
    CHECK(prod.find("clique 0 shape 3\n0 0 0\n") != std::string::npos);
    CHECK(prod.find("clique 1 shape 3\n0 0 0\n") != std::string::npos);
    CHECK(prod.find("clique 0 1 shape 3 3\n0 0 0 0 1 2 0 2 4\n") != std::string::npos);

    s.write("one.json", R"({"msmrf-function": 1, "sites": 2, "ground": 0, "grids": [0, 1], "function": "x1 + 1"})");
    CHECK(run({"decompose", "--spec", s.path("one.json")}).code == 2);
  }
}
