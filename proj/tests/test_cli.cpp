#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "lsqroot/cli.hpp"

using namespace lsqroot;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> v;
  std::istringstream in(s);
  for (std::string l; std::getline(in, l);) v.push_back(l);
  return v;
}

int summary_int(const std::string& out, const std::string& key) {
  for (const auto& l : lines(out))
    if (l.rfind("# " + key + " ", 0) == 0) return std::stoi(l.substr(key.size() + 3));
  return -1;
}

}  // namespace

TEST_CASE("solve prints a summary and exits 0 on convergence") {
  const Run r = cli({"solve", "--expr", "x^3 + 4*x^2 - 10", "--x0", "0.5"});
  CHECK(r.code == 0);
  CHECK(r.out.find("# status Converged") != std::string::npos);
  CHECK(r.out.find("# root 1.3652300134141") != std::string::npos);
  CHECK(summary_int(r.out, "iterations") == 8);
}

TEST_CASE("trace has one line per iteration") {
  for (std::string method : {"lsq3", "newton", "secant"}) {
    const Run r = cli({"solve", "--expr", "x - 3*ln(x)", "--x0", "0.5", "--method", method, "--trace"});
    CAPTURE(method);
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    auto header = std::find_if(ls.begin(), ls.end(), [](const std::string& l) { return l.rfind("# k,", 0) == 0; });
    REQUIRE(header != ls.end());
    CHECK(std::distance(header + 1, ls.end()) == summary_int(r.out, "iterations"));
  }
}

TEST_CASE("power mode and spacing flags reach the solver") {
  const Run var = cli({"solve", "--expr", "arctan(x)", "--x0", "3", "--n", "variable"});
  CHECK(var.code == 0);
  const Run fixed = cli({"solve", "--expr", "arctan(x)", "--x0", "3", "--n", "fixed:1"});
  CHECK(fixed.code == 2);
  CHECK(fixed.out.find("# status Diverged") != std::string::npos);
  const Run two = cli({"solve", "--expr", "(x - 3)^2", "--x0", "4", "--n", "fixed:2", "--delta0", "0.05"});
  CHECK(two.code == 0);
}

TEST_CASE("usage errors exit 1") {
  CHECK(cli({}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({"solve", "--x0", "1"}).code == 1);
  CHECK(cli({"solve", "--expr", "x", "--x0", "1", "--bogus"}).code == 1);
  CHECK(cli({"solve", "--expr", "x", "--x0", "abc"}).code == 1);
  CHECK(cli({"solve", "--expr", "x", "--x0", "1", "--n", "fixed:0"}).code == 1);
  CHECK(cli({"solve", "--expr", "x", "--x0", "1", "--n", "sometimes"}).code == 1);
  CHECK(cli({"solve", "--expr", "x", "--x0", "1", "--method", "bisection"}).code == 1);
  CHECK(cli({"solve", "--expr", "x", "--x0", "1", "--delta0", "2"}).code == 1);
  const Run bad = cli({"solve", "--expr", "x +* 2", "--x0", "1"});
  CHECK(bad.code == 1);
  CHECK(bad.err.find("position 3") != std::string::npos);
  CHECK(bad.out.empty());
}

TEST_CASE("non-convergence exits 2") {
  CHECK(cli({"solve", "--expr", "ln(x)", "--x0", "-1"}).code == 2);
  CHECK(cli({"solve", "--expr", "x^2 + 1", "--x0", "0"}).code == 2);
  CHECK(cli({"solve", "--expr", "(x - 2)^4", "--x0", "5", "--max-iter", "2"}).code == 2);
}

TEST_CASE("rate") {
  const Run r = cli({"rate", "--expr", "x^3 + 4*x^2 - 10", "--x0", "0.5", "--method", "secant"});
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  auto header = std::find(ls.begin(), ls.end(), "k,rate");
  REQUIRE(header != ls.end());
  REQUIRE(header + 1 != ls.end());
  const std::string& last = ls.back();
  const double c = std::stod(last.substr(last.find(',') + 1));
  CHECK(c > 1.4);
  CHECK(c < 1.8);
  // Converged at the start: nothing to measure, but not an error.
  const Run bare = cli({"rate", "--expr", "x - 2", "--x0", "2"});
  CHECK(bare.code == 0);
  CHECK(bare.out.find("# no measurable rate") != std::string::npos);
  CHECK(cli({"rate", "--expr", "arctan(x)", "--x0", "3"}).code == 2);
  // A supplied reference root lets a failed run be measured.
  const Run ref = cli({"rate", "--expr", "arctan(x)", "--x0", "3", "--root", "0"});
  CHECK(ref.code == 2);
  CHECK(ref.out.find("k,rate") != std::string::npos);
}

TEST_CASE("fncurve") {
  const Run r = cli({"fncurve"});
  REQUIRE(r.code == 0);
  const auto ls = lines(r.out);
  CHECK(ls.front() == "n,f");
  CHECK(ls.size() == 1 + 301 + 1);
  const std::string& tail = ls.back();
  REQUIRE(tail.rfind("# argmin ", 0) == 0);
  CHECK(std::fabs(std::stod(tail.substr(9)) - 2.0) <= 0.05);
  CHECK(cli({"fncurve", "--E", "2"}).code == 1);
  CHECK(cli({"fncurve", "--from", "3", "--to", "1"}).code == 1);
}

TEST_CASE("bench output is deterministic and can go to a file") {
  const Run a = cli({"bench", "--format", "csv"});
  const Run b = cli({"bench", "--format", "csv"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(lines(a.out).size() == 109);

  const std::string path = "test_cli_bench.md";
  const Run md = cli({"bench", "--format", "markdown", "--out", path, "--methods", "newton,lsq3-variable"});
  REQUIRE(md.code == 0);
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str().find("| Start | Newton | LSQ3 N=variable |") != std::string::npos);
  std::remove(path.c_str());
  CHECK(cli({"bench", "--methods", "newton,bogus"}).code == 1);
}
