#pragma once

// Primary bifurcation points, secondary-bifurcation detection along a traced
// branch, and switching onto the bifurcating branch.

#include "babenko/bifurcation_point.hpp"
#include "babenko/continuation.hpp"

#include <string>
#include <vector>

namespace babenko {

/// mu_n(r) for n = 1..n_max. With grid_size > 0 the null direction cos(nt)
/// is attached on that many coefficients.
std::vector<BifurcationPoint> primary_points(const OperatorParams& params, int n_max,
                                             int grid_size = 0);

/// Residue class of harmonic k for a host whose harmonics are multiples of p:
/// min(k mod p, p - k mod p). Harmonics in one class only couple to each other
/// through the linearisation about the host.
int symmetry_class(int k, int period);

/// Sign of the determinant of the mu-fixed Jacobian restricted to the
/// harmonics of one residue class; for class 0 the amplitude-augmented block
/// is used so that folds do not register.
int block_determinant_sign(const BabenkoSystem& system, const WaveSolution& sol, int period,
                           int cls);

struct SecondaryScan {
  std::vector<BifurcationPoint> points;
  std::vector<std::string> warnings;
};

/// Scan a branch for sign changes of the block determinants and bisect each
/// bracket in amplitude down to 1e-8. Gaps between branch points wider than
/// scan_step are filled with extra solves first.
SecondaryScan detect_secondary(const Branch& branch, double scan_step = 2e-3);

/// detect_secondary plus insertion of secondary_bifurcation events, kept
/// ordered by point index. Returns the warnings.
std::vector<std::string> annotate_secondary(Branch& branch, double scan_step = 2e-3);

struct SwitchOptions {
  int sign = 1;  // side of the kernel direction tried first
  bool dealias = false;
  std::vector<double> eps_fractions{1e-3, 1e-2, 1e-1};  // of the host amplitude
};

/// Follow the branch that crosses the host at a secondary point. The first
/// point of the result is the host solution at the bifurcation.
Branch switch_branch(const BifurcationPoint& point, const ContinuationConfig& config,
                     const SwitchOptions& options = {});

}  // namespace babenko
