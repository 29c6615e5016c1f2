#include "babenko/bifurcation.hpp"
#include "babenko/branch_io.hpp"
#include "babenko/cli.hpp"
#include "babenko/errors.hpp"

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace babenko;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("babenko_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(std::vector<std::string> args, std::string* out = nullptr, std::string* err = nullptr) {
  args.insert(args.begin(), "babenko");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (err) *err = e.str();
  return code;
}

const Branch& sample_branch() {
  static const Branch b = [] {
    Branch br = trace_branch(2, OperatorParams(0.0), ContinuationConfig{}, 64);
    annotate_secondary(br);
    return br;
  }();
  return b;
}

}  // namespace

TEST_CASE("fifteen significant digits") {
  CHECK(format15(0.1) == "0.1");
  CHECK(format15(1.0 / 3.0) == "0.333333333333333");
  CHECK(round15(1.0 / 3.0) == 0.333333333333333);
  CHECK(round15(round15(2.0 / 7.0)) == round15(2.0 / 7.0));
  CHECK(std::signbit(round15(-0.0)) == false);
  CHECK(std::isinf(round15(HUGE_VAL)));
}

TEST_CASE("branch JSON round trip is byte-identical") {
  const Branch& b = sample_branch();
  REQUIRE_FALSE(b.events.empty());
  const std::string first = branch_to_json(b);
  const Branch back = branch_from_json(first);
  CHECK(branch_to_json(back) == first);

  CHECK(back.N == b.N);
  CHECK(back.params.r() == b.params.r());
  CHECK(back.points.size() == b.points.size());
  CHECK(back.events.size() == b.events.size());
  CHECK(std::isinf(back.config.max_amplitude) == std::isinf(b.config.max_amplitude));
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    CHECK(back.points[i].mu == doctest::Approx(b.points[i].mu).epsilon(1e-14));
    CHECK((back.points[i].coeffs.coeffs() - b.points[i].coeffs.coeffs()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(back.theta[i] == doctest::Approx(b.theta[i]).epsilon(1e-14));
  }
  for (std::size_t i = 0; i < b.events.size(); ++i) {
    CHECK(back.events[i].kind == b.events[i].kind);
    CHECK(back.events[i].index == b.events[i].index);
    CHECK(back.events[i].point.has_value() == b.events[i].point.has_value());
  }

  const fs::path dir = scratch("roundtrip");
  write_branch(b, dir / "a.json");
  write_branch(read_branch(dir / "a.json"), dir / "b.json");
  CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
}

TEST_CASE("infinite and undefined numbers are stored as null") {
  Branch b = sample_branch();
  b.config.max_amplitude = HUGE_VAL;
  b.origin.kernel_residual = std::nan("");
  const std::string text = branch_to_json(b);
  CHECK(text.find("\"max_amplitude\": null") != std::string::npos);
  CHECK(text.find("\"kernel_residual\": null") != std::string::npos);
  const Branch back = branch_from_json(text);
  CHECK(std::isinf(back.config.max_amplitude));
  CHECK(std::isnan(back.origin.kernel_residual));
}

TEST_CASE("malformed branch files are rejected") {
  const std::string good = branch_to_json(sample_branch());
  auto replace = [&](const std::string& from, const std::string& to) {
    std::string s = good;
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
  };
  CHECK_THROWS_AS(branch_from_json(replace("\"version\": 1", "\"version\": 2")), FormatError);
  CHECK_THROWS_AS(branch_from_json(replace("\"version\": 1,", "")), FormatError);
  CHECK_THROWS_AS(branch_from_json(replace("babenko-branch", "other")), FormatError);
  CHECK_THROWS_AS(branch_from_json("{ not json"), FormatError);
  CHECK_THROWS_AS(branch_from_json("[]"), FormatError);

  Branch b = sample_branch();
  std::swap(b.theta[1], b.theta[2]);
  CHECK_THROWS_AS(branch_from_json(branch_to_json(b)), FormatError);

  b = sample_branch();
  b.points[1].coeffs = b.points[1].coeffs.resized(10);
  CHECK_THROWS_AS(branch_from_json(branch_to_json(b)), FormatError);

  b = sample_branch();
  b.events.front().index = 100000;
  CHECK_THROWS_AS(branch_from_json(branch_to_json(b)), FormatError);
}

TEST_CASE("branch CSV layout") {
  std::ostringstream out;
  write_branch_csv(sample_branch(), out);
  std::istringstream in(out.str());
  std::string header, row;
  std::getline(in, header);
  CHECK(header.rfind("index,theta,mu,amplitude,crest,b0,b1,", 0) == 0);
  CHECK(std::count(header.begin(), header.end(), ',') == 4 + 64);
  int rows = 0;
  while (std::getline(in, row)) {
    CHECK(std::count(row.begin(), row.end(), ',') == 4 + 64);
    ++rows;
  }
  CHECK(rows == static_cast<int>(sample_branch().points.size()));
}

TEST_CASE("bifurcation diagram CSV") {
  std::ostringstream empty;
  write_bifdiag_csv({}, empty);
  CHECK(empty.str() == "series,mu,norm_inf\n");

  std::ostringstream out;
  write_bifdiag_csv({{"C2", sample_branch()}, {"again", sample_branch()}}, out);
  const std::string s = out.str();
  const auto n = sample_branch().points.size();
  CHECK(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) == 1 + 2 * n + 2);
  CHECK(s.find("\nC2,0.5,0\n") != std::string::npos);
  CHECK(s.find("\nbound,") != std::string::npos);
}

TEST_CASE("point selectors") {
  const Branch& b = sample_branch();
  const int last = static_cast<int>(b.points.size()) - 1;
  CHECK(select_point(b, "first") == 0);
  CHECK(select_point(b, "last") == last);
  CHECK(select_point(b, "2") == 2);
  CHECK(select_point(b, "-1") == last);
  CHECK(select_point(b, "mu:" + format15(b.points[3].mu)) == 3);
  CHECK_THROWS_AS(select_point(b, "middle"), UsageError);
  CHECK_THROWS_AS(select_point(b, "99999"), UsageError);
  CHECK_THROWS_AS(select_point(b, "mu:abc"), UsageError);
}

TEST_CASE("run configuration validation") {
  RunConfig rc;
  CHECK_NOTHROW(rc.validate());
  rc.r = {1.0};
  CHECK_THROWS_AS(rc.validate(), UsageError);
  rc = {};
  rc.modes = {0};
  CHECK_THROWS_AS(rc.validate(), UsageError);
  rc = {};
  rc.format = "xml";
  CHECK_THROWS_AS(rc.validate(), UsageError);
  rc = {};
  rc.continuation.newton_tol = -1.0;
  CHECK_THROWS_AS(rc.validate(), UsageError);
  CHECK(trace_file_name(3, 0.8, 1024, "json") == "C3_r0.8_N1024.json");
}

TEST_CASE("spectrum command") {
  std::string out;
  CHECK(run({"spectrum", "--r", "0.8", "--nmax", "3"}, &out) == kExitOk);
  CHECK(out.find("1,0.219512195121951,") != std::string::npos);
  CHECK(out.find("3,0.194868414380609,") != std::string::npos);
  CHECK(run({"spectrum", "--r", "1.5"}) == kExitUsage);
}

TEST_CASE("usage errors exit with status 1") {
  CHECK(run({}) == kExitUsage);
  CHECK(run({"frobnicate"}) == kExitUsage);
  CHECK(run({"trace", "--bogus"}) == kExitUsage);
  CHECK(run({"trace", "--r", "2"}) == kExitUsage);
  CHECK(run({"trace", "--format", "xml"}) == kExitUsage);
  CHECK(run({"reconstruct", "/nonexistent/branch.json"}) == kExitUsage);
  CHECK(run({"bifdiag", "/nonexistent/branch.json"}) == kExitUsage);
  std::string out;
  CHECK(run({"--help"}, &out) == kExitOk);
  CHECK(out.find("trace") != std::string::npos);
}

TEST_CASE("trace, switch, reconstruct and bifdiag through the driver") {
  const fs::path dir = scratch("driver");
  ::setenv("BABENKO_OUTPUT_DIR", dir.c_str(), 1);
  CHECK(default_output_dir() == dir);

  std::string out;
  REQUIRE(run({"trace", "--r", "0", "--mode", "1,2", "--N", "64", "--jobs", "2"}, &out) ==
          kExitOk);
  const fs::path c2 = dir / "C2_r0_N64.json";
  REQUIRE(fs::exists(dir / "C1_r0_N64.json"));
  REQUIRE(fs::exists(c2));
  CHECK(out.find("endpoint") != std::string::npos);

  // Deterministic: a second run reproduces the file.
  const std::string before = slurp(c2);
  REQUIRE(run({"trace", "--r", "0", "--mode", "2", "--N", "64"}) == kExitOk);
  CHECK(slurp(c2) == before);

  const Branch host = read_branch(c2);
  int secondary = -1, other = -1;
  for (std::size_t i = 0; i < host.events.size(); ++i) {
    if (host.events[i].kind == EventKind::secondary_bifurcation && secondary < 0) secondary = static_cast<int>(i);
    if (host.events[i].kind != EventKind::secondary_bifurcation) other = static_cast<int>(i);
  }
  REQUIRE(secondary >= 0);
  CHECK(run({"switch", c2.string(), "--event", "99"}) == kExitUsage);
  CHECK(run({"switch", c2.string(), "--event", std::to_string(secondary), "--sign", "3"}) == kExitUsage);
  if (other >= 0) CHECK(run({"switch", c2.string(), "--event", std::to_string(other)}) == kExitUsage);

  const fs::path sw = dir / "C21.json";
  REQUIRE(run({"switch", c2.string(), "--event", std::to_string(secondary), "--out", sw.string()}, &out) == kExitOk);
  const Branch born = read_branch(sw);
  CHECK(born.origin.kind == BifurcationKind::secondary);
  CHECK(std::abs(born.points.front().mu - host.events[secondary].mu) < 1e-4);

  REQUIRE(run({"reconstruct", c2.string(), "--point", "last", "--samples", "128"}, &out) == kExitOk);
  const std::string stem = "C2_r0_N64_p" + std::to_string(host.points.size() - 1);
  CHECK(fs::exists(dir / (stem + "_surface.csv")));
  CHECK(fs::exists(dir / (stem + "_eta.csv")));
  CHECK_FALSE(fs::exists(dir / (stem + "_bottom.csv")));
  CHECK(slurp(dir / (stem + "_report.json")).find("\"h\": null") != std::string::npos);
  CHECK(run({"reconstruct", c2.string(), "--point", "nowhere"}) == kExitUsage);

  REQUIRE(run({"trace", "--r", "0.8", "--mode", "1", "--N", "64", "--max-amplitude", "0.05", "--no-detect"}) == kExitOk);
  REQUIRE(run({"reconstruct", (dir / "C1_r0.8_N64.json").string(), "--point", "first"}) == kExitOk);
  CHECK(fs::exists(dir / "C1_r0.8_N64_p0_bottom.csv"));
  CHECK(fs::exists(dir / "C1_r0.8_N64_p0_side.csv"));
  CHECK(slurp(dir / "C1_r0.8_N64_p0_report.json").find("\"h\": 0.22314355131421") != std::string::npos);

  REQUIRE(run({"bifdiag", c2.string(), sw.string()}, &out) == kExitOk);
  CHECK(out.rfind("series,mu,norm_inf\n", 0) == 0);
  CHECK(out.find("\nC2_r0_N64,") != std::string::npos);
  CHECK(out.find("\nC21,") != std::string::npos);
  REQUIRE(run({"bifdiag"}, &out) == kExitOk);
  CHECK(out == "series,mu,norm_inf\n");

  REQUIRE(run({"trace", "--r", "0.5", "--mode", "1", "--N", "32", "--max-amplitude", "0.05", "--format", "csv"}) ==
          kExitOk);
  CHECK(slurp(dir / "C1_r0.5_N32.csv").rfind("index,theta,mu", 0) == 0);

  std::ofstream(dir / "v2.json") << std::string(slurp(c2)).replace(slurp(c2).find("\"version\": 1"), 12, "\"version\": 2");
  CHECK(run({"bifdiag", (dir / "v2.json").string()}) == kExitUsage);
  ::unsetenv("BABENKO_OUTPUT_DIR");
}

TEST_CASE("numerical failures exit with status 2") {
  const fs::path dir = scratch("numerical");
  // A secondary event whose host is far from any solution: every switching
  // attempt fails to converge.
  Branch b = sample_branch();
  const auto it = std::find_if(b.events.begin(), b.events.end(),
                               [](const BranchEvent& e) { return e.kind == EventKind::secondary_bifurcation; });
  REQUIRE(it != b.events.end());
  BranchEvent ev = *it;
  ev.point->host->solution.coeffs.coeffs().setConstant(5.0);
  b.events = {ev};
  write_branch(b, dir / "broken.json");
  std::string err;
  CHECK(run({"switch", (dir / "broken.json").string(), "--event", "0"}, nullptr, &err) == kExitNumerical);
  CHECK(err.find("numerical failure") != std::string::npos);
}
