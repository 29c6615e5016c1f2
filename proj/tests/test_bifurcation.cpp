#include "babenko/bifurcation.hpp"
#include "babenko/errors.hpp"

#include "doctest.h"

#include <algorithm>
#include <cmath>

using namespace babenko;

TEST_CASE("primary points carry mu_n and cos(nt)") {
  const auto pts = primary_points(OperatorParams(0.8), 5, 32);
  REQUIRE(pts.size() == 5);
  for (int n = 1; n <= 5; ++n) {
    const BifurcationPoint& p = pts[n - 1];
    CHECK(p.kind == BifurcationKind::primary);
    CHECK(p.mode == n);
    CHECK(p.mu_star == bifurcation_mu(n, 0.8));
    CHECK_FALSE(p.host.has_value());
    REQUIRE(p.null_direction.size() == 32);
    CHECK(p.null_direction[n] == 1.0);
    CHECK(p.null_direction.coeffs().cwiseAbs().sum() == 1.0);
  }
  CHECK(primary_points(OperatorParams(0.0), 3)[0].null_direction.size() == 0);
  CHECK(primary_points(OperatorParams(0.0), 3)[2].mu_star == 1.0 / 3.0);
}

TEST_CASE("symmetry classes") {
  CHECK(symmetry_class(0, 3) == 0);
  CHECK(symmetry_class(3, 3) == 0);
  CHECK(symmetry_class(1, 3) == 1);
  CHECK(symmetry_class(2, 3) == 1);
  CHECK(symmetry_class(4, 3) == 1);
  CHECK(symmetry_class(2, 4) == 2);
  CHECK(symmetry_class(5, 4) == 1);
  CHECK(symmetry_class(7, 1) == 0);
}

TEST_CASE("block determinants do not change sign on the trivial branch below mu_1") {
  const BabenkoSystem sys(32, OperatorParams(0.0));
  const Branch b = [] {
    ContinuationConfig cfg;
    cfg.max_amplitude = 0.02;
    return trace_branch(2, OperatorParams(0.0), cfg, 32);
  }();
  const int s0 = block_determinant_sign(sys, b.points[1], 2, 1);
  for (std::size_t i = 2; i < b.points.size(); ++i) CHECK(block_determinant_sign(sys, b.points[i], 2, 1) == s0);
}

TEST_CASE("a branch too short to scan yields nothing") {
  ContinuationConfig cfg;
  cfg.max_amplitude = 0.0;
  Branch b = trace_branch(2, OperatorParams(0.0), cfg, 64);
  CHECK(detect_secondary(b).points.empty());
  CHECK(annotate_secondary(b).empty());
  CHECK(b.events.empty());
  CHECK_THROWS_AS(detect_secondary(b, 0.0), std::invalid_argument);
}

TEST_CASE("deep-water C2: secondary point, events and switching") {
  const int n = 256;
  Branch host = trace_branch(2, OperatorParams(0.0), ContinuationConfig{}, n);
  annotate_secondary(host);
  std::vector<const BranchEvent*> secondaries;
  for (const BranchEvent& e : host.events)
    if (e.kind == EventKind::secondary_bifurcation) secondaries.push_back(&e);
  REQUIRE_FALSE(secondaries.empty());
  const BranchEvent& first = *secondaries.front();
  CHECK(std::abs(first.mu - 0.58768) < 2e-3);

  for (std::size_t i = 1; i < host.events.size(); ++i) CHECK(host.events[i - 1].index <= host.events[i].index);

  REQUIRE(first.point.has_value());
  const BifurcationPoint& p = *first.point;
  CHECK(p.kind == BifurcationKind::secondary);
  CHECK(p.symmetry_class == 1);
  CHECK(p.kernel_residual < 1e-6);
  REQUIRE(p.host.has_value());
  CHECK(p.host->solution.mu == p.mu_star);
  CHECK(std::abs(p.null_direction.coeffs().cwiseAbs().maxCoeff() - 1.0) < 1e-12);
  double odd = 0.0;
  for (int k = 1; k < n; k += 2) odd += p.null_direction[k] * p.null_direction[k];
  CHECK(odd > 0.99 * p.null_direction.coeffs().squaredNorm());

  SwitchOptions opt;
  opt.sign = 1;
  const Branch sw = switch_branch(p, ContinuationConfig{}, opt);
  REQUIRE(sw.points.size() > 3);
  CHECK(sw.origin.kind == BifurcationKind::secondary);
  CHECK(std::abs(sw.points.front().mu - p.mu_star) < 1e-4);
  CHECK((sw.points.front().coeffs.coeffs() - p.host->solution.coeffs.coeffs()).cwiseAbs().maxCoeff() < 1e-4);
  double off_host = 0.0;
  const WaveSolution& end = sw.points.back();
  for (int k = 1; k < n; k += 2) off_host = std::max(off_host, std::abs(end.coeffs[k]));
  CHECK(off_host > 1e-3);
  for (const WaveSolution& s : sw.points) CHECK(s.crest_value() <= 0.5 * s.mu);
  CHECK_FALSE(sw.events.empty());
}

TEST_CASE("switching needs a secondary point") {
  const auto pts = primary_points(OperatorParams(0.0), 1, 16);
  CHECK_THROWS_AS(switch_branch(pts[0], ContinuationConfig{}), std::invalid_argument);
}

TEST_CASE("finite-depth primary points lie between mu_1 / n and 1 / n") {
  for (double r : {0.3, 0.8, 0.95}) {
    for (int n = 2; n <= 64; ++n) {
      CHECK(bifurcation_mu(n, r) > bifurcation_mu(1, r) / n);
      CHECK(bifurcation_mu(n, r) <= 1.0 / n);
    }
  }
}

TEST_CASE("C1 below its fold has no secondary points") {
  ContinuationConfig cfg;
  cfg.max_amplitude = 0.12;
  const Branch b = trace_branch(1, OperatorParams(0.8), cfg, 256);
  CHECK(detect_secondary(b).points.empty());
}

TEST_CASE("the C2 secondary point is stable under grid refinement") {
  auto first_secondary = [](int n) {
    Branch b = trace_branch(2, OperatorParams(0.0), ContinuationConfig{}, n);
    annotate_secondary(b);
    for (const BranchEvent& e : b.events)
      if (e.kind == EventKind::secondary_bifurcation) return e.mu;
    return std::nan("");
  };
  CHECK(std::abs(first_secondary(256) - first_secondary(512)) < 1e-4);
}

TEST_CASE("switching at a regular host point falls back to the host") {
  ContinuationConfig cfg;
  cfg.max_amplitude = 0.1;
  const Branch host = trace_branch(2, OperatorParams(0.0), cfg, 64);
  BifurcationPoint p;
  p.kind = BifurcationKind::secondary;
  p.mode = 1;
  p.symmetry_class = 1;
  p.mu_star = host.points.back().mu;
  p.null_direction = CosineSeries::zeros(64);
  p.null_direction[1] = 1.0;
  p.host = HostReference{static_cast<int>(host.points.size()) - 1, host.points.back()};
  CHECK_THROWS_AS(switch_branch(p, ContinuationConfig{}), FallbackToHost);
}
