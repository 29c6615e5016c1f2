#pragma once

// Newton solver for the amplitude-augmented system and amplitude-stepping
// branch continuation.

#include "babenko/babenko_eq.hpp"
#include "babenko/bifurcation_point.hpp"

#include <limits>
#include <string>
#include <vector>

namespace babenko {

struct ContinuationConfig {
  double newton_tol = 1e-10;  // residual max-norm
  int max_newton_iters = 25;
  double initial_step = 1e-3;
  double max_step = 1e-2;
  double min_step = 1e-7;
  double step_shrink = 0.5;
  double step_grow = 1.2;
  int fast_iterations = 4;  // grow the step after convergence in at most this many
  int max_points = 5000;
  double max_amplitude = std::numeric_limits<double>::infinity();
  /// Stop once the measured crest half-angle is within this many degrees of 60.
  double crest_angle_window_deg = 0.5;

  void validate() const;
};

enum class EventKind { fold, secondary_bifurcation, termination_extreme, termination_no_convergence };

std::string to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

struct BranchEvent {
  int index = 0;  // branch point at (or just after) the event
  EventKind kind = EventKind::fold;
  double mu = 0.0;
  double amplitude = 0.0;
  std::string note;
  std::optional<BifurcationPoint> point;  // secondary events only
};

struct Branch {
  OperatorParams params;
  int N = 0;
  bool dealias = false;
  ContinuationConfig config;
  BifurcationPoint origin;
  std::vector<WaveSolution> points;
  std::vector<double> theta;  // cumulative |delta amplitude|, strictly increasing
  std::vector<BranchEvent> events;

  /// Harmonics present in every point are multiples of this (n for C_n).
  int symmetry_period() const;
  void push_point(WaveSolution s);
};

struct NewtonResult {
  WaveSolution solution;
  int iterations = 0;
  /// Tangent of the constraint-parametrised curve at the solution.
  double dmu_dtheta = std::numeric_limits<double>::quiet_NaN();
  CosineSeries dw_dtheta;
  int augmented_sign = 0;
  double rcond = 0.0;
};

/// Linear side condition <functional, w> = value used instead of the
/// amplitude equation (branch switching pins the kernel component).
struct LinearPin {
  Vector functional;
  double value = 0.0;
};

/// With symmetry_period p > 1 the Newton updates are confined to harmonics
/// that are multiples of p whenever the discrete product preserves that
/// subspace (de-aliasing on, or p dividing 2N); convergence is still judged
/// on the full residual.
NewtonResult newton_solve_detailed(const BabenkoSystem& system, const Seed& guess,
                                   double target_amplitude, const ContinuationConfig& config,
                                   int symmetry_period = 1);
NewtonResult newton_solve_pinned(const BabenkoSystem& system, const Seed& guess,
                                 const LinearPin& pin, const ContinuationConfig& config);
WaveSolution newton_solve(const BabenkoSystem& system, const Seed& guess, double target_amplitude,
                          const ContinuationConfig& config, int symmetry_period = 1);

Branch trace_branch(int n, const BabenkoSystem& system, const ContinuationConfig& config);
Branch trace_branch(int n, const OperatorParams& params, const ContinuationConfig& config,
                    int grid_size = 256, bool dealias = false);

/// Continue an existing branch from its last point(s), stepping the
/// amplitude in the given direction (+1 or -1) until a termination rule
/// fires. Used for primary traces and for branches born at a switch.
void extend_branch(const BabenkoSystem& system, Branch& branch, int direction);

/// Same, stepping the pin value <functional, w> instead of the amplitude.
/// Branches born at a secondary point use this: their amplitude, the larger
/// of two competing crests, need not be monotone.
void extend_branch_pinned(const BabenkoSystem& system, Branch& branch, const Vector& functional,
                          int direction);

/// Re-converge a solution on a larger grid. The amplitude target is re-read
/// from the interpolated solution on the new nodes so the comparison is not
/// polluted by the node shift.
WaveSolution refine_solution(const WaveSolution& sol, int new_size, bool dealias,
                             const ContinuationConfig& config);

}  // namespace babenko
