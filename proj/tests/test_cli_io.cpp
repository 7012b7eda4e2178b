// End-to-end checks of the command-line tool, run against the binary built
// next to this test.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "sphquad/geometry.hpp"
#include "sphquad/weight_solver.hpp"

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = "./sphquad " + args + " 2>&1";
  std::array<char, 4096> buf{};
  RunResult res;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (fgets(buf.data(), buf.size(), pipe)) res.output += buf.data();
  const int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}

std::string tmp_path(const std::string& name) { return "cli_test_" + name; }

}  // namespace

TEST_CASE("nodes subcommand generates the requested families") {
  auto r = run("nodes --family icosahedral --level 16 --out " + tmp_path("ico.txt"));
  CHECK(r.exit_code == 0);
  CHECK(sphquad::read_nodes_file(tmp_path("ico.txt")).size() == 2562);

  r = run("nodes --family fibonacci --n 2501 --out " + tmp_path("fib.txt"));
  CHECK(r.exit_code == 0);
  CHECK(sphquad::read_nodes_file(tmp_path("fib.txt")).size() == 2501);
}

TEST_CASE("nodes subcommand rejects even fibonacci sizes with exit code 1") {
  const auto r = run("nodes --family fibonacci --n 2500 --out " + tmp_path("bad.txt"));
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("usage error") != std::string::npos);
}

TEST_CASE("weights/integrate round trip") {
  run("nodes --family fibonacci --n 501 --out " + tmp_path("n501.txt"));
  auto r = run("weights --nodes " + tmp_path("n501.txt") + " --solver gmres --tol 1e-12 --out " +
               tmp_path("w501.txt"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("iterations=") != std::string::npos);
  CHECK(r.output.find("mean=") != std::string::npos);

  r = run("integrate --weights " + tmp_path("w501.txt") + " --target one");
  CHECK(r.exit_code == 0);
  std::stringstream ss(r.output.substr(r.output.find("Q = ") + 4));
  double q = 0;
  ss >> q;
  CHECK(q == doctest::Approx(4.0 * M_PI).epsilon(1e-9));
}

TEST_CASE("integrate with a values file of zeros gives zero") {
  run("nodes --family fibonacci --n 101 --out " + tmp_path("n101.txt"));
  run("weights --nodes " + tmp_path("n101.txt") + " --solver direct --out " +
      tmp_path("w101.txt"));
  {
    std::ofstream os(tmp_path("zeros.txt"));
    for (int i = 0; i < 101; ++i) os << "0\n";
  }
  const auto r = run("integrate --weights " + tmp_path("w101.txt") + " --values " +
                     tmp_path("zeros.txt"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("Q = 0") != std::string::npos);
}

TEST_CASE("spheroid subcommand reports the area error") {
  const auto r = run("spheroid --a 0.99666667 --weights " + tmp_path("w501.txt") +
                     " --out " + tmp_path("sp501.txt"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("relative_error=") != std::string::npos);
  std::ifstream check(tmp_path("sp501.txt"));
  CHECK(check.good());
}

TEST_CASE("missing input file exits with code 2") {
  const auto r = run("weights --nodes no_such_file.txt");
  CHECK(r.exit_code == 2);
}

TEST_CASE("quiet flag suppresses the summary") {
  const auto r = run("--quiet nodes --family fibonacci --n 101 --out " + tmp_path("q.txt"));
  CHECK(r.exit_code == 0);
  CHECK(r.output.empty());
}
