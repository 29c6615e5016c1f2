#pragma once

// Physical one-wave domain recovered from a solution through the annulus map
//
//   z(u) = i [ log u - B + sum_k a_k (u^k - r^{2k} u^{-k}) ],
//
// where a_k = b_k / (1 - r^{2k}) are the map coefficients belonging to the
// cosine coefficients b_k of the solution, so that the surface ordinate
// y(t) = Im z(e^{it}) reproduces w(t) itself.

#include "babenko/babenko_eq.hpp"

#include <utility>
#include <vector>

namespace babenko {

struct CurveSample {
  double param;  // t on the circles, u on the cut
  double x;
  double y;
};

struct CorrespondenceReport {
  bool bottom_monotone = true;
  double bottom_worst = 0.0;  // largest increment of the wrong sign
  bool side_monotone = true;
  double side_worst = 0.0;
  bool surface_monotone = true;
  double surface_worst = 0.0;
  bool self_intersection = false;
  int sample_count = 0;

  bool all_monotone() const { return bottom_monotone && side_monotone && surface_monotone; }
};

struct ReconstructedDomain {
  double r = 0.0;
  double mu = 0.0;
  double B = 0.0;  // mean-zero constant
  double h = 0.0;  // mean depth; +inf for r = 0
  std::vector<double> map_coeffs;  // a_0 = 0, a_1..a_{N-1}
  std::vector<CurveSample> surface;  // t in [-pi, pi]
  std::vector<CurveSample> bottom;   // t in [-pi, pi], y = -h
  std::vector<CurveSample> side;     // side x = -pi (t = pi end), u in [-1, -r]
  CorrespondenceReport checks;
  /// max |b_k| over the last tenth of the spectrum relative to max |b_k|.
  double tail_ratio = 0.0;

  // Derived series, k = 0..N-1 (entry 0 unused):
  //   x(t)   = -t - sum x_sine[k] sin kt
  //   y(t)   = -B + sum y_cos[k] cos kt
  //   x_h(t) = -t - sum bottom_sine[k] sin kt
  std::vector<double> x_sine;
  std::vector<double> y_cos;
  std::vector<double> bottom_sine;

  bool finite_depth() const { return r > 0.0; }
};

struct SurfacePoint {
  double x, y, dx, dy;  // position and d/dt
};

ReconstructedDomain reconstruct(const WaveSolution& sol, int samples = 512);
CorrespondenceReport check_correspondence(const ReconstructedDomain& dom);

SurfacePoint surface_at(const ReconstructedDomain& dom, double t);
double bottom_x(const ReconstructedDomain& dom, double t);
double side_y(const ReconstructedDomain& dom, double u);

/// eta(x) on count uniform x in [-pi, pi), obtained by inverting x(t).
std::vector<std::pair<double, double>> surface_elevation(const ReconstructedDomain& dom,
                                                         int count = 1024);

struct CrestAngle {
  double degrees = 180.0;  // full included angle
  bool confident = true;
  double slope = 0.0;      // extrapolated one-sided |dy/dx| at the crest
};

/// Included crest angle at parameter t_crest, from one-sided slopes at three
/// spacings extrapolated to the crest. spacing <= 0 uses eight node widths,
/// 8 pi / N: closer in, the truncated series rounds the corner off.
CrestAngle crest_angle(const ReconstructedDomain& dom, double t_crest = 0.0, double spacing = 0.0);

struct Extremum {
  double t, x, y;
};

struct ProfileSummary {
  double h = 0.0;
  double crest = 0.0;
  double trough = 0.0;
  double crest_to_trough = 0.0;
  double norm_inf = 0.0;  // max over nodes of |w|
  CrestAngle angle;
  std::vector<Extremum> crests;   // local maxima of y(t), t in [0, pi]
  std::vector<Extremum> troughs;  // local minima
};

ProfileSummary summarize(const ReconstructedDomain& dom, const WaveSolution& sol);

}  // namespace babenko
