#include "babenko/reconstruct.hpp"

#include "babenko/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace babenko {

namespace {

constexpr int kOversample = 8;

// 1 - r^{2k} without cancellation for r close to 1.
double one_minus_r2k(int k, double r) { return r == 0.0 ? 1.0 : -std::expm1(2.0 * k * std::log(r)); }

double r_pow(double r, double p) { return r == 0.0 ? 0.0 : std::exp(p * std::log(r)); }

// Sum over k >= 1 of c_k sin(kt) and its t-derivative, by rotating (cos kt, sin kt).
struct SineSum {
  double value = 0.0, derivative = 0.0;
};

SineSum sine_sum(const std::vector<double>& c, double t) {
  SineSum s;
  const double c1 = std::cos(t), s1 = std::sin(t);
  double ck = 1.0, sk = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
    s.value += c[k] * sk;
    s.derivative += static_cast<double>(k) * c[k] * ck;
  }
  return s;
}

SineSum cosine_sum(const std::vector<double>& c, double t) {
  SineSum s;
  const double c1 = std::cos(t), s1 = std::sin(t);
  double ck = 1.0, sk = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) {
    const double cn = ck * c1 - sk * s1;
    sk = sk * c1 + ck * s1;
    ck = cn;
    s.value += c[k] * ck;
    s.derivative -= static_cast<double>(k) * c[k] * sk;
  }
  return s;
}

// Largest step of the wrong sign in a sequence that should strictly decrease.
double decrease_violation(const std::vector<double>& v) {
  double worst = 0.0;
  bool strict = true;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double d = v[i] - v[i - 1];
    if (d >= 0.0) {
      strict = false;
      worst = std::max(worst, d);
    }
  }
  return strict ? 0.0 : std::max(worst, std::numeric_limits<double>::min());
}

double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

bool segments_cross(const CurveSample& p1, const CurveSample& p2, const CurveSample& q1,
                    const CurveSample& q2) {
  const double d1 = cross(p2.x - p1.x, p2.y - p1.y, q1.x - p1.x, q1.y - p1.y);
  const double d2 = cross(p2.x - p1.x, p2.y - p1.y, q2.x - p1.x, q2.y - p1.y);
  const double d3 = cross(q2.x - q1.x, q2.y - q1.y, p1.x - q1.x, p1.y - q1.y);
  const double d4 = cross(q2.x - q1.x, q2.y - q1.y, p2.x - q1.x, p2.y - q1.y);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 &&
         d4 != 0;
}

// Sweep over segments ordered by left end; only x-overlapping pairs are tested.
bool polyline_self_intersects(const std::vector<CurveSample>& pts) {
  const std::size_t m = pts.size() < 2 ? 0 : pts.size() - 1;
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  auto lo = [&](std::size_t i) { return std::min(pts[i].x, pts[i + 1].x); };
  auto hi = [&](std::size_t i) { return std::max(pts[i].x, pts[i + 1].x); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return lo(a) < lo(b); });
  std::vector<std::size_t> active;
  for (std::size_t i : order) {
    const double x0 = lo(i);
    active.erase(std::remove_if(active.begin(), active.end(), [&](std::size_t j) { return hi(j) < x0; }),
                 active.end());
    for (std::size_t j : active) {
      const std::size_t gap = i > j ? i - j : j - i;
      if (gap <= 1) continue;
      if (segments_cross(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
    }
    active.push_back(i);
  }
  return false;
}

}  // namespace

ReconstructedDomain reconstruct(const WaveSolution& sol, int samples) {
  if (samples < 64) throw std::invalid_argument("reconstruct needs at least 64 samples");
  const int n = sol.size();
  if (n < 1) throw std::invalid_argument("empty solution");
  const double r = sol.r;
  const Vector& b = sol.coeffs.coeffs();

  ReconstructedDomain d;
  d.r = r;
  d.mu = sol.mu;
  d.map_coeffs.assign(n, 0.0);
  d.x_sine.assign(n, 0.0);
  d.y_cos.assign(n, 0.0);
  d.bottom_sine.assign(n, 0.0);
  double B = 0.0;
  for (int k = 1; k < n; ++k) {
    const double a = b[k] / one_minus_r2k(k, r);
    d.map_coeffs[k] = a;
    const double beta = multiplier_beta(k, r);
    d.x_sine[k] = beta * b[k];
    d.y_cos[k] = b[k];
    d.bottom_sine[k] = 2.0 * a * r_pow(r, k);
    B += 0.5 * k * beta * b[k] * b[k];
  }
  d.B = B;
  if (r > 0.0) {
    d.h = B - std::log(r);
    if (!(d.h > 0.0)) throw NonPositiveDepth("non-positive mean depth " + std::to_string(d.h));
  } else {
    d.h = std::numeric_limits<double>::infinity();
  }

  double bmax = 0.0, tail = 0.0;
  const int tail_start = n - std::max(1, n / 10);
  for (int k = 1; k < n; ++k) {
    bmax = std::max(bmax, std::abs(b[k]));
    if (k >= tail_start) tail = std::max(tail, std::abs(b[k]));
  }
  d.tail_ratio = bmax > 0.0 ? tail / bmax : 0.0;

  d.surface.reserve(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    const double t = -M_PI + 2.0 * M_PI * i / samples;
    const SurfacePoint p = surface_at(d, t);
    d.surface.push_back({t, p.x, p.y});
  }
  if (d.finite_depth()) {
    for (int i = 0; i <= samples; ++i) {
      const double t = -M_PI + 2.0 * M_PI * i / samples;
      d.bottom.push_back({t, bottom_x(d, t), -d.h});
    }
    for (int i = 0; i <= samples; ++i) {
      const double u = -1.0 + (1.0 - r) * i / samples;
      d.side.push_back({u, -M_PI, side_y(d, u)});
    }
  }
  d.checks = check_correspondence(d);
  return d;
}

SurfacePoint surface_at(const ReconstructedDomain& dom, double t) {
  const SineSum xs = sine_sum(dom.x_sine, t);
  const SineSum yc = cosine_sum(dom.y_cos, t);
  return {-t - xs.value, -dom.B + yc.value, -1.0 - xs.derivative, yc.derivative};
}

double bottom_x(const ReconstructedDomain& dom, double t) {
  return -t - sine_sum(dom.bottom_sine, t).value;
}

double side_y(const ReconstructedDomain& dom, double u) {
  const double m = std::abs(u);
  if (!(m > 0.0)) throw std::domain_error("side parameter must be non-zero");
  double y = std::log(m) - dom.B;
  const double lr = dom.r > 0.0 ? std::log(dom.r) : 0.0;
  const double lm = std::log(m);
  for (std::size_t k = 1; k < dom.map_coeffs.size(); ++k) {
    const double sign = (k % 2) ? -1.0 : 1.0;
    const double inner = dom.r > 0.0 ? std::exp(k * (2.0 * lr - lm)) : 0.0;
    y += sign * dom.map_coeffs[k] * (std::exp(k * lm) - inner);
  }
  return y;
}

CorrespondenceReport check_correspondence(const ReconstructedDomain& dom) {
  CorrespondenceReport rep;
  const int base = std::max<int>(64, static_cast<int>(dom.surface.size()) - 1);
  const int m = kOversample * base;
  rep.sample_count = m + 1;

  std::vector<double> xs(m + 1);
  for (int i = 0; i <= m; ++i) xs[i] = surface_at(dom, M_PI * i / m).x;
  rep.surface_worst = decrease_violation(xs);
  rep.surface_monotone = rep.surface_worst == 0.0;

  if (dom.finite_depth()) {
    std::vector<double> xb(m + 1);
    for (int i = 0; i <= m; ++i) xb[i] = bottom_x(dom, M_PI * i / m);
    rep.bottom_worst = decrease_violation(xb);
    rep.bottom_monotone = rep.bottom_worst == 0.0;

    // u from -1 to -r: |u| shrinks and y_+ must fall from y(pi) to -h.
    std::vector<double> ys(m + 1);
    for (int i = 0; i <= m; ++i) ys[i] = side_y(dom, -1.0 + (1.0 - dom.r) * i / m);
    rep.side_worst = decrease_violation(ys);
    rep.side_monotone = rep.side_worst == 0.0;
  }
  rep.self_intersection = polyline_self_intersects(dom.surface);
  return rep;
}

std::vector<std::pair<double, double>> surface_elevation(const ReconstructedDomain& dom, int count) {
  if (count < 1) throw std::invalid_argument("count must be positive");
  if (!dom.checks.surface_monotone || dom.checks.self_intersection)
    throw InvertibilityFailed("surface x(t) is not monotone; eta(x) is not defined");
  std::vector<std::pair<double, double>> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const double x = -M_PI + 2.0 * M_PI * i / count;
    // x(t) decreases from pi to -pi on [-pi, pi]; safeguarded Newton.
    double lo = -M_PI, hi = M_PI, t = -x;
    for (int it = 0; it < 100; ++it) {
      const SurfacePoint p = surface_at(dom, t);
      const double f = p.x - x;
      if (f > 0.0) lo = t; else hi = t;
      if (std::abs(f) < 1e-14 || hi - lo < 1e-15) break;
      double tn = t - f / p.dx;
      if (!(tn > lo && tn < hi) || p.dx >= 0.0) tn = 0.5 * (lo + hi);
      t = tn;
    }
    out.emplace_back(x, surface_at(dom, t).y);
  }
  return out;
}

CrestAngle crest_angle(const ReconstructedDomain& dom, double t_crest, double spacing) {
  if (spacing <= 0.0) spacing = 8.0 * M_PI / static_cast<double>(std::max<std::size_t>(dom.map_coeffs.size(), 8));
  auto slope = [&](double t) {
    const SurfacePoint p = surface_at(dom, t);
    return std::abs(p.dy / p.dx);
  };
  double side_angle[2];
  double side_slope[2];
  bool confident = true;
  for (int s = 0; s < 2; ++s) {
    const double dir = s == 0 ? 1.0 : -1.0;
    const double s1 = slope(t_crest + dir * spacing);
    const double s2 = slope(t_crest + dir * 2.0 * spacing);
    const double s3 = slope(t_crest + dir * 3.0 * spacing);
    double s0 = 3.0 * s1 - 3.0 * s2 + s3;
    if (!std::isfinite(s0)) {
      confident = false;
      s0 = s1;
    }
    if (s0 < 0.0) s0 = 0.0;
    const double spread = std::max({s1, s2, s3}) - std::min({s1, s2, s3});
    if (std::abs(s0 - s1) > std::max(0.25 * s1, 1e-3) || spread > 0.5 * std::max(s1, 1e-3))
      confident = confident && s1 < 1e-2;
    side_slope[s] = s0;
    side_angle[s] = std::atan(s0) * 180.0 / M_PI;
  }
  if (std::abs(side_angle[0] - side_angle[1]) > 1.0) confident = false;
  CrestAngle a;
  a.degrees = 180.0 - side_angle[0] - side_angle[1];
  a.slope = 0.5 * (side_slope[0] + side_slope[1]);
  a.confident = confident;
  return a;
}

ProfileSummary summarize(const ReconstructedDomain& dom, const WaveSolution& sol) {
  ProfileSummary ps;
  ps.h = dom.h;
  ps.norm_inf = sol.amplitude;
  const int m = kOversample * std::max<int>(64, static_cast<int>(dom.surface.size()) - 1) / 2;

  struct Raw {
    double t, y;
    bool crest;
  };
  std::vector<Raw> raw;
  auto dy = [&](double t) { return surface_at(dom, t).dy; };

  // Alternating extrema of y(t) on [0, pi]; both ends are extrema by evenness.
  double t0 = M_PI / m, d0 = dy(t0);
  raw.push_back({0.0, surface_at(dom, 0.0).y, d0 <= 0.0});
  for (int i = 2; i < m; ++i) {
    const double t1 = M_PI * i / m, d1 = dy(t1);
    if (d0 != 0.0 && d1 != 0.0 && (d0 > 0.0) != (d1 > 0.0)) {
      double lo = t0, hi = t1;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((dy(mid) > 0.0) == (d0 > 0.0)) lo = mid; else hi = mid;
      }
      const double t = 0.5 * (lo + hi);
      raw.push_back({t, surface_at(dom, t).y, d0 > 0.0});
    }
    if (d1 != 0.0) {
      t0 = t1;
      d0 = d1;
    }
  }
  if (raw.back().crest != (d0 > 0.0)) raw.push_back({M_PI, surface_at(dom, M_PI).y, d0 > 0.0});

  // Over one full period (mirror image included) drop adjacent crest/trough
  // pairs whose height difference is below 1% of the total range: ripples of
  // the truncated series, not features of the wave.
  std::vector<Raw> cyc;
  for (std::size_t i = raw.size(); i-- > 0;)
    if (raw[i].t > 0.0 && raw[i].t < M_PI) cyc.push_back({-raw[i].t, raw[i].y, raw[i].crest});
  cyc.insert(cyc.end(), raw.begin(), raw.end());
  if (cyc.back().t >= M_PI && cyc.front().t <= -M_PI) cyc.pop_back();
  double ymin = cyc.front().y, ymax = cyc.front().y;
  for (const auto& e : cyc) {
    ymin = std::min(ymin, e.y);
    ymax = std::max(ymax, e.y);
  }
  const double thr = 1e-2 * (ymax - ymin);
  while (cyc.size() > 2) {
    std::size_t best = 0;
    double diff = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cyc.size(); ++i) {
      const double d = std::abs(cyc[i].y - cyc[(i + 1) % cyc.size()].y);
      if (d < diff) {
        diff = d;
        best = i;
      }
    }
    if (diff >= thr) break;
    const std::size_t second = (best + 1) % cyc.size();
    cyc.erase(cyc.begin() + std::max(best, second));
    cyc.erase(cyc.begin() + std::min(best, second));
  }

  for (const auto& e : cyc) {
    if (e.t < 0.0) continue;
    const Extremum ex{e.t, surface_at(dom, e.t).x, e.y};
    (e.crest ? ps.crests : ps.troughs).push_back(ex);
  }

  ps.crest = surface_at(dom, 0.0).y;
  double crest_t = 0.0;
  if (!ps.crests.empty()) {
    ps.crest = -std::numeric_limits<double>::infinity();
    for (const auto& c : ps.crests)
      if (c.y > ps.crest) {
        ps.crest = c.y;
        crest_t = c.t;
      }
  }
  ps.trough = ps.crest;
  if (!ps.troughs.empty()) {
    ps.trough = std::numeric_limits<double>::infinity();
    for (const auto& c : ps.troughs) ps.trough = std::min(ps.trough, c.y);
  }
  ps.crest_to_trough = ps.crest - ps.trough;
  ps.angle = crest_angle(dom, crest_t, 0.0);
  return ps;
}

}  // namespace babenko
