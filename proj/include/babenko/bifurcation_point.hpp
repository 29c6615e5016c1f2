#pragma once

#include "babenko/babenko_eq.hpp"

#include <limits>
#include <optional>

namespace babenko {

enum class BifurcationKind { primary, secondary };

struct HostReference {
  int index = 0;          // host-branch point that closes the detection bracket
  WaveSolution solution;  // host solution at the located point
};

struct BifurcationPoint {
  double mu_star = 0.0;
  BifurcationKind kind = BifurcationKind::primary;
  int mode = 1;  // primary: n; secondary: dominant harmonic of the kernel
  std::optional<HostReference> host;
  /// Approximate kernel of the mu-fixed Jacobian, unit max-norm. Empty for
  /// primary points built without a grid.
  CosineSeries null_direction;
  /// Residue class (mod the host's symmetry period) the kernel lives in.
  int symmetry_class = 0;
  double kernel_residual = std::numeric_limits<double>::quiet_NaN();
};

}  // namespace babenko
