#include "babenko/bifurcation.hpp"

#include "babenko/errors.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <string>

namespace babenko {

namespace {

constexpr double kBracketWidth = 1e-8;

std::vector<int> class_indices(int n, int period, int cls) {
  std::vector<int> idx;
  for (int k = 0; k < n; ++k)
    if (symmetry_class(k, period) == cls) idx.push_back(k);
  return idx;
}

int lu_sign(const Eigen::PartialPivLU<Matrix>& lu) {
  double s = lu.permutationP().determinant();
  const auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag[i] == 0.0) return 0;
    if (diag[i] < 0.0) s = -s;
  }
  return s > 0 ? 1 : -1;
}

Matrix class_block(const BabenkoSystem& sys, const WaveSolution& sol, const std::vector<int>& idx) {
  const Matrix j = sys.jacobian(sol.mu, sol.coeffs);
  return j(idx, idx);
}

Matrix augmented_block(const BabenkoSystem& sys, const WaveSolution& sol, const std::vector<int>& idx) {
  const int m = static_cast<int>(idx.size());
  Matrix a(m + 1, m + 1);
  a.topLeftCorner(m, m) = class_block(sys, sol, idx);
  const Vector fmu = sys.mu_derivative(sol.coeffs);
  Eigen::Index node = 0;
  sol.values.cwiseAbs().maxCoeff(&node);
  const double s = sol.values[node] < 0.0 ? -1.0 : 1.0;
  const Vector row = s * sys.synthesis_row(static_cast<int>(node));
  for (int i = 0; i < m; ++i) {
    a(i, m) = fmu[idx[i]];
    a(m, i) = row[idx[i]];
  }
  a(m, m) = 0.0;
  return a;
}

Seed blend(const WaveSolution& s0, const WaveSolution& s1, double a) {
  const double da = s1.amplitude - s0.amplitude;
  const double t = da != 0.0 ? (a - s0.amplitude) / da : 0.5;
  return {s0.mu + t * (s1.mu - s0.mu),
          CosineSeries(s0.coeffs.coeffs() + t * (s1.coeffs.coeffs() - s0.coeffs.coeffs()))};
}

// Kernel by inverse iteration: first on the class block, then polished on
// the full Jacobian, which on the aliased grid couples the classes weakly.
CosineSeries kernel_vector(const BabenkoSystem& sys, const WaveSolution& sol, const std::vector<int>& idx,
                           double& residual) {
  const Matrix j = sys.jacobian(sol.mu, sol.coeffs);
  const Eigen::PartialPivLU<Matrix> block_lu(Matrix(j(idx, idx)));
  Vector x = Vector::Ones(static_cast<Eigen::Index>(idx.size()));
  for (int it = 0; it < 8; ++it) {
    x = block_lu.solve(x);
    x /= x.cwiseAbs().maxCoeff();
  }
  Vector full = Vector::Zero(sys.size());
  for (std::size_t i = 0; i < idx.size(); ++i) full[idx[i]] = x[i];
  const Eigen::PartialPivLU<Matrix> lu(j);
  for (int it = 0; it < 3; ++it) {
    Vector next = lu.solve(full);
    if (!next.allFinite()) break;
    next /= next.cwiseAbs().maxCoeff();
    if ((j * next).norm() / next.norm() >= (j * full).norm() / full.norm()) break;
    full = next;
  }
  const double at_zero = full.sum();
  Eigen::Index big = 0;
  full.cwiseAbs().maxCoeff(&big);
  const double ref = std::abs(at_zero) > 1e-8 ? at_zero : full[big];
  if (ref < 0.0) full = -full;
  full /= full.cwiseAbs().maxCoeff();
  residual = (j * full).norm() / full.norm();
  return CosineSeries(full);
}

}  // namespace

std::vector<BifurcationPoint> primary_points(const OperatorParams& params, int n_max, int grid_size) {
  if (n_max < 1) throw std::invalid_argument("n_max must be >= 1");
  std::vector<BifurcationPoint> out;
  for (int n = 1; n <= n_max; ++n) {
    BifurcationPoint p;
    p.kind = BifurcationKind::primary;
    p.mode = n;
    p.mu_star = bifurcation_mu(n, params.r());
    if (grid_size > n) {
      p.null_direction = CosineSeries::mode(grid_size, n);
      p.kernel_residual = 0.0;
    }
    out.push_back(std::move(p));
  }
  return out;
}

int symmetry_class(int k, int period) {
  if (period <= 1) return 0;
  const int m = k % period;
  return std::min(m, period - m);
}

int block_determinant_sign(const BabenkoSystem& system, const WaveSolution& sol, int period, int cls) {
  const std::vector<int> idx = class_indices(system.size(), period, cls);
  if (idx.empty()) return 1;
  const Matrix m = cls == 0 ? augmented_block(system, sol, idx) : class_block(system, sol, idx);
  return lu_sign(Eigen::PartialPivLU<Matrix>(m));
}

SecondaryScan detect_secondary(const Branch& branch, double scan_step) {
  if (!(scan_step > 0.0)) throw std::invalid_argument("scan_step must be positive");
  SecondaryScan scan;
  if (branch.points.size() < 2) return scan;
  const BabenkoSystem sys(branch.N, branch.params, branch.dealias);
  const int period = branch.symmetry_period();
  const int classes = period / 2 + 1;

  auto signs_at = [&](const WaveSolution& s) {
    std::vector<int> out(classes);
    for (int c = 0; c < classes; ++c) out[c] = block_determinant_sign(sys, s, period, c);
    return out;
  };

  WaveSolution prev;
  std::vector<int> prev_signs;
  bool have_prev = false;

  auto bisect = [&](const WaveSolution& left, const WaveSolution& right, int cls, int sign_left,
                    int index) {
    WaveSolution lo = left, hi = right;
    try {
      while (std::abs(hi.amplitude - lo.amplitude) > kBracketWidth) {
        const double a = 0.5 * (lo.amplitude + hi.amplitude);
        const WaveSolution mid = newton_solve(sys, blend(lo, hi, a), a, branch.config, period);
        if (block_determinant_sign(sys, mid, period, cls) == sign_left) lo = mid; else hi = mid;
      }
    } catch (const NumericalError& e) {
      scan.warnings.push_back("inconclusive bracket at amplitude " + std::to_string(lo.amplitude) +
                              ".." + std::to_string(hi.amplitude) + " (class " + std::to_string(cls) +
                              "): " + e.what());
      return;
    }
    const double a = 0.5 * (lo.amplitude + hi.amplitude);
    WaveSolution at;
    try {
      at = newton_solve(sys, blend(lo, hi, a), a, branch.config, period);
    } catch (const NumericalError&) {
      at = hi;
    }
    BifurcationPoint p;
    p.kind = BifurcationKind::secondary;
    p.mu_star = at.mu;
    p.symmetry_class = cls;
    double res = 0.0;
    p.null_direction = kernel_vector(sys, at, class_indices(sys.size(), period, cls), res);
    p.kernel_residual = res;
    Eigen::Index big = 0;
    p.null_direction.coeffs().cwiseAbs().maxCoeff(&big);
    p.mode = static_cast<int>(big);
    p.host = HostReference{index, at};
    scan.points.push_back(std::move(p));
  };

  auto visit = [&](const WaveSolution& cur, int index) {
    std::vector<int> now = signs_at(cur);
    if (have_prev) {
      for (int c = 0; c < classes; ++c)
        if (prev_signs[c] != now[c] && prev_signs[c] != 0 && now[c] != 0)
          bisect(prev, cur, c, prev_signs[c], index);
    }
    prev = cur;
    prev_signs = std::move(now);
    have_prev = true;
  };

  for (std::size_t i = 0; i < branch.points.size(); ++i) {
    const WaveSolution& cur = branch.points[i];
    if (cur.amplitude == 0.0) continue;  // the trivial point is singular at mu_n
    if (have_prev) {
      // Coarse steps can hide a pair of sign changes; look in between.
      const double a0 = prev.amplitude;
      const double gap = cur.amplitude - a0;
      const int sub = static_cast<int>(std::ceil(std::abs(gap) / scan_step));
      for (int k = 1; k < sub; ++k) {
        const double a = a0 + gap * k / sub;
        try {
          const WaveSolution left = prev;
          visit(newton_solve(sys, blend(left, cur, a), a, branch.config, period), static_cast<int>(i));
        } catch (const NumericalError& e) {
          scan.warnings.push_back("scan point at amplitude " + std::to_string(a) + " failed: " + e.what());
          break;
        }
      }
    }
    visit(cur, static_cast<int>(i));
  }
  std::sort(scan.points.begin(), scan.points.end(), [](const auto& a, const auto& b) {
    return a.host->solution.amplitude < b.host->solution.amplitude;
  });
  return scan;
}

std::vector<std::string> annotate_secondary(Branch& branch, double scan_step) {
  SecondaryScan scan = detect_secondary(branch, scan_step);
  for (auto& p : scan.points) {
    BranchEvent ev;
    ev.index = p.host->index;
    ev.kind = EventKind::secondary_bifurcation;
    ev.mu = p.mu_star;
    ev.amplitude = p.host->solution.amplitude;
    ev.note = "class " + std::to_string(p.symmetry_class) + ", mode " + std::to_string(p.mode);
    ev.point = std::move(p);
    branch.events.push_back(std::move(ev));
  }
  // Several events can close on the same point; order those by their
  // distance from the preceding point.
  auto offset = [&](const BranchEvent& e) {
    if (e.index <= 0 || e.index > static_cast<int>(branch.points.size())) return 0.0;
    return std::abs(e.amplitude - branch.points[static_cast<std::size_t>(e.index - 1)].amplitude);
  };
  std::stable_sort(branch.events.begin(), branch.events.end(), [&](const BranchEvent& a, const BranchEvent& b) {
    if (a.index != b.index) return a.index < b.index;
    return offset(a) < offset(b);
  });
  return scan.warnings;
}

Branch switch_branch(const BifurcationPoint& point, const ContinuationConfig& config,
                     const SwitchOptions& options) {
  config.validate();
  if (point.kind != BifurcationKind::secondary || !point.host)
    throw std::invalid_argument("branch switching needs a secondary point with a host solution");
  const WaveSolution& host = point.host->solution;
  const int n = host.size();
  if (point.null_direction.size() != n)
    throw SizeMismatch("null direction does not match the host solution size");
  if (!(host.amplitude > 0.0)) throw std::invalid_argument("host solution is trivial");

  const BabenkoSystem sys(n, OperatorParams(host.r), options.dealias);
  const NewtonResult anchor = newton_solve_detailed(sys, {host.mu, host.coeffs}, host.amplitude, config);
  const WaveSolution& star = anchor.solution;
  const Vector& dw = anchor.dw_dtheta.coeffs();

  Vector phi = point.null_direction.coeffs();
  if (dw.squaredNorm() > 0.0) phi -= (phi.dot(dw) / dw.squaredNorm()) * dw;
  if (!(phi.cwiseAbs().maxCoeff() > 0.0)) throw FallbackToHost("kernel direction is parallel to the host tangent");
  const double phi2 = phi.squaredNorm();

  // Host branch continued to a given amplitude, for the landed-on-host test.
  auto host_at = [&](double a) {
    const Seed g{star.mu + (a - star.amplitude) * anchor.dmu_dtheta,
                 CosineSeries(star.coeffs.coeffs() + (a - star.amplitude) * dw)};
    return newton_solve(sys, g, a, config);
  };

  const int first = options.sign < 0 ? -1 : 1;
  std::string last_error = "no attempt converged";
  for (int sign : {first, -first}) {
    for (double frac : options.eps_fractions) {
      const double eps = sign * frac * star.amplitude;
      LinearPin pin{phi, phi.dot(star.coeffs.coeffs()) + eps * phi2};
      const Seed guess{star.mu, CosineSeries(star.coeffs.coeffs() + eps * phi)};
      NewtonResult res;
      try {
        res = newton_solve_pinned(sys, guess, pin, config);
      } catch (const NumericalError& e) {
        last_error = e.what();
        continue;
      }
      const WaveSolution& s = res.solution;
      const double dist = (s.coeffs.coeffs() - star.coeffs.coeffs()).cwiseAbs().maxCoeff();
      if (!(dist < 50.0 * std::abs(eps)) || s.crest_value() > 0.5 * s.mu) {
        last_error = "pinned solution left the neighbourhood of the bifurcation";
        continue;
      }
      bool on_host = false;
      try {
        const WaveSolution h = host_at(s.amplitude);
        on_host = (h.coeffs.coeffs() - s.coeffs.coeffs()).cwiseAbs().maxCoeff() <= 1e-3 * std::abs(eps);
      } catch (const NumericalError&) {
      }
      if (on_host) {
        last_error = "re-convergence landed on the host branch";
        continue;
      }

      Branch br;
      br.params = sys.params();
      br.N = n;
      br.dealias = options.dealias;
      br.config = config;
      br.origin = point;
      br.push_point(star);
      br.push_point(s);
      extend_branch_pinned(sys, br, phi, sign);
      return br;
    }
  }
  throw FallbackToHost("branch switching failed for both signs: " + last_error);
}

}  // namespace babenko
