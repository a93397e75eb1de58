#include "cli_app.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
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
  args.insert(args.begin(), "dirac");
  std::vector<const char *> argv;
  for (const auto &a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = dirac::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string golden(const std::string &name) { return slurp(fs::path(DIRAC_GOLDEN_DIR) / name); }

/// Runs the installed binary through the shell with a thread cap.
std::string run_binary(const std::string &args, int threads) {
  const std::string cmd = "DIRAC_LADDER_THREADS=" + std::to_string(threads) + " \"" +
                          DIRAC_CLI_PATH + "\" " + args + " 2>/dev/null";
  FILE *pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  REQUIRE(pclose(pipe) == 0);
  return out;
}

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / "dirac_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

const std::vector<std::pair<std::string, std::string>> kGolden = {
    {"energy --Z 1 --n 1 --two-j 1 --eps -1", "energy.csv"},
    {"element --g 0.5 --pair 1,1,-1:1,1,-1 --op plain --lambda 1 --method all", "element.csv"},
    {"ladder --g 0.5 --pair 1,1,-1:2,3,-1 --lmin 0 --lmax 6", "ladder.csv"},
    {"audit --Z 1 --grid default", "audit.json"},
};

std::vector<std::string> split(const std::string &s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

} // namespace

TEST_CASE("golden outputs in process", "[cli][golden]") {
  for (const auto &[args, file] : kGolden) {
    CAPTURE(args);
    const auto r = run(split(args));
    CHECK(r.code == 0);
    CHECK(r.out == golden(file));
  }
}

TEST_CASE("golden outputs are byte-identical across runs and thread counts", "[cli][golden]") {
  for (const auto &[args, file] : kGolden) {
    CAPTURE(args);
    const auto expected = golden(file);
    for (int threads : {1, 4})
      for (int rep = 0; rep < 2; ++rep) CHECK(run_binary(args, threads) == expected);
  }
  const std::string multi = "ladder --Z 80 --pair 1,1,-1:2,3,-1 --pair 2,1,1:3,5,-1 "
                            "--pair 2,3,-1:4,7,-1 --pair 3,3,1:4,1,-1 --lmin 0 --lmax 6";
  const auto one = run_binary(multi, 1);
  CHECK(one.rfind("pair,lambda,", 0) == 0);
  CHECK(run_binary(multi, 4) == one);
}

TEST_CASE("example values", "[cli]") {
  CHECK(run(split("energy --Z 1 --n 1 --two-j 1 --eps -1")).out.find("0.999973373968") !=
        std::string::npos);
  CHECK(run(split("energy --g 0.5 --n 1 --two-j 1 --eps -1")).out.find("0.8660254037844") !=
        std::string::npos);
  const auto ladder = run(split("ladder --g 0.5 --pair 1,1,-1:2,3,-1 --lmin 0 --lmax 6")).out;
  int rows = 0;
  std::istringstream in(ladder);
  std::string line;
  std::getline(in, line);
  CHECK(line == "lambda,plain,beta,provenance,err_est");
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.find(",RECURRENCE,") != std::string::npos);
  }
  CHECK(rows == 7);
  const auto seeds = run(split("ladder --g 0.5 --pair 1,1,-1:2,3,-1 --lmin 0 --lmax 6 --with-seeds"));
  CHECK(seeds.out.find("\n-3,") != std::string::npos);
  CHECK(seeds.out.find(",SEED,") != std::string::npos);
}

TEST_CASE("usage errors exit with 2", "[cli][exit]") {
  const auto missing = run(split("energy --Z 1 --two-j 1 --eps -1"));
  CHECK(missing.code == 2);
  CHECK(missing.err.find("--n") != std::string::npos);
  CHECK(missing.err.find("Usage") != std::string::npos);
  CHECK(run(split("energy --Z 1 --n 1 --two-j 3 --eps -1")).code == 2);
  CHECK(run(split("energy --Z 1 --n 1 --two-j 1 --eps 1")).code == 2);
  CHECK(run(split("element --g 0.5 --pair 1,1,-1 --lambda 1")).code == 2);
  CHECK(run(split("element --g 0.5 --pair 1,1,-1:1,1,-1 --lambda 1 --op grad")).code == 2);
  CHECK(run(split("element --g 0.5 --pair 1,1,-1:1,1,-1 --lambda 1 --method guess")).code == 2);
  CHECK(run(split("ladder --g 0.5 --pair 1,1,-1:2,3,-1 --lmin 0")).code == 2);
  CHECK(run(split("audit --Z 1 --grid wide")).code == 2);
  CHECK(run(split("energy --Z 1 --g 0.5 --n 1 --two-j 1 --eps -1")).code == 2);
  CHECK(run(split("transmogrify")).code == 2);
  CHECK(run({}).code == 2);
  CHECK(run(split("energy --help")).code == 0);
}

TEST_CASE("a bad thread cap is a usage error", "[cli][exit]") {
  ::setenv("DIRAC_LADDER_THREADS", "many", 1);
  const auto r = run(split("ladder --g 0.5 --pair 1,1,-1:2,3,-1 --lmin 0 --lmax 2"));
  ::unsetenv("DIRAC_LADDER_THREADS");
  CHECK(r.code == 2);
  CHECK(r.err.find("DIRAC_LADDER_THREADS") != std::string::npos);
}

TEST_CASE("computational failures exit with 1 and keep partial results", "[cli][exit]") {
  const auto critical = run(split("energy --g 1.0 --n 1 --two-j 1 --eps -1 --state 2,3,-1"));
  CHECK(critical.code == 1);
  CHECK(critical.out.find("2,3,-1,") != std::string::npos);
  CHECK(critical.err.find("CriticalCoupling") != std::string::npos);

  const auto out = scratch("divergent.csv");
  const auto manifest = fs::path(out.string() + ".errors.json");
  fs::remove(manifest);
  const auto r = run({"element", "--g", "0.5", "--pair", "1,1,-1:1,1,-1", "--lambda", "-3",
                      "--method", "all", "--output", out.string()});
  CHECK(r.code == 1);
  CHECK(slurp(out).rfind("pair,op,lambda,method,value,err_est,delta_from_analytic\n", 0) == 0);
  REQUIRE(fs::exists(manifest));
  const auto m = slurp(manifest);
  CHECK(m.find("\"errors\"") != std::string::npos);
  CHECK(m.find("DivergentIntegral") != std::string::npos);

  const auto drift = run(split("ladder --Z 1 --pair 2,3,-1:3,1,1 --lmin 0 --lmax 6 "
                               "--precision double --drift-tol 1e-300 --check-every 1"));
  CHECK(drift.code == 1);
  CHECK(drift.err.find("AbortOnDrift") != std::string::npos);
}

TEST_CASE("config files mirror flags and flags win", "[cli][config]") {
  const auto cfg = scratch("energy.json");
  std::ofstream(cfg) << R"({"Z": 20, "n": 2, "two-j": 1, "eps": 1})";
  const auto from_file = run({"energy", "--config", cfg.string()});
  CHECK(from_file.code == 0);
  CHECK(from_file.out == run(split("energy --Z 20 --n 2 --two-j 1 --eps 1")).out);
  const auto overridden = run({"energy", "--config", cfg.string(), "--n", "3"});
  CHECK(overridden.out == run(split("energy --Z 20 --n 3 --two-j 1 --eps 1")).out);

  const auto bad = scratch("bad.json");
  std::ofstream(bad) << R"({"bogus": 1})";
  CHECK(run({"energy", "--config", bad.string(), "--n", "1", "--two-j", "1", "--eps", "-1"}).code ==
        2);
  CHECK(run({"energy", "--config", scratch("absent.json").string()}).code == 2);
}

TEST_CASE("file output matches standard output", "[cli]") {
  const auto out = scratch("ladder.csv");
  const auto r = run({"ladder", "--g", "0.5", "--pair", "1,1,-1:2,3,-1", "--lmin", "0", "--lmax",
                      "6", "--output", out.string()});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(slurp(out) == golden("ladder.csv"));
  CHECK_FALSE(fs::exists(out.string() + ".errors.json"));
}
