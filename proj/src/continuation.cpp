#include "babenko/continuation.hpp"

#include "babenko/errors.hpp"
#include "babenko/reconstruct.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace babenko {

namespace {

constexpr double kRcondFloor = 1e-13;
constexpr double kAmplitudeTol = 1e-12;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int lu_sign(const Eigen::PartialPivLU<Matrix>& lu) {
  double s = lu.permutationP().determinant();
  const auto diag = lu.matrixLU().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (diag[i] == 0.0) return 0;
    if (diag[i] < 0.0) s = -s;
  }
  return s > 0 ? 1 : -1;
}

struct SideCondition {
  const Vector* functional = nullptr;  // null: amplitude equation
  double target = 0.0;

  // Linearised row and residual at the current iterate.
  void linearise(const BabenkoSystem& sys, const Vector& coeffs, const Vector& values,
                 Vector& row, double& residual) const {
    if (functional) {
      row = *functional;
      residual = functional->dot(coeffs) - target;
      return;
    }
    Eigen::Index m = 0;
    values.cwiseAbs().maxCoeff(&m);
    const double s = values[m] < 0.0 ? -1.0 : 1.0;
    row = s * sys.synthesis_row(static_cast<int>(m));
    residual = s * values[m] - target;
  }
};

// Modes kept as unknowns. A host with harmonics in multiples of p stays in
// that subspace when the discrete product preserves it: always with
// de-aliasing, and on the aliased grid when p divides 2N.
std::vector<int> solved_modes(const BabenkoSystem& sys, int period) {
  const int n = sys.size();
  const bool reduce = period > 1 && (sys.dealias() || (2 * n) % period == 0);
  std::vector<int> idx;
  for (int k = 0; k < n; ++k)
    if (!reduce || k % period == 0) idx.push_back(k);
  return idx;
}

Matrix augmented_matrix(const BabenkoSystem& sys, double mu, const CosineSeries& w, const Vector& row,
                        const std::vector<int>& idx) {
  const int m = static_cast<int>(idx.size());
  const Matrix j = sys.jacobian(mu, w);
  const Vector fmu = sys.mu_derivative(w);
  Matrix a(m + 1, m + 1);
  a.topLeftCorner(m, m) = j(idx, idx);
  for (int i = 0; i < m; ++i) {
    a(i, m) = fmu[idx[i]];
    a(m, i) = row[idx[i]];
  }
  a(m, m) = 0.0;
  return a;
}

NewtonResult solve_augmented(const BabenkoSystem& sys, const Seed& guess, const SideCondition& side,
                             const ContinuationConfig& cfg, int period) {
  const int n = sys.size();
  if (guess.w.size() != n)
    throw SizeMismatch("guess has " + std::to_string(guess.w.size()) + " coefficients, grid has " +
                       std::to_string(n));
  if (!std::isfinite(guess.mu) || !guess.w.coeffs().allFinite())
    throw std::domain_error("non-finite Newton guess");

  const std::vector<int> idx = solved_modes(sys, period);
  const int m = static_cast<int>(idx.size());
  Vector c = Vector::Zero(n);
  for (int k : idx) c[k] = guess.w[k];
  double mu = guess.mu;
  Vector row;
  int it = 0;
  for (;; ++it) {
    const CosineSeries w(c);
    const Vector r = sys.residual(mu, w).coeffs();
    const Vector values = sys.grid().to_values(w);
    double g = 0.0;
    side.linearise(sys, c, values, row, g);
    const double rnorm = r.cwiseAbs().maxCoeff();
    if (!std::isfinite(rnorm) || !std::isfinite(g))
      throw NoConvergence("Newton iterate became non-finite");
    const double side_tol = side.functional ? cfg.newton_tol : kAmplitudeTol;
    if (rnorm < cfg.newton_tol && std::abs(g) <= side_tol) break;
    if (it >= cfg.max_newton_iters)
      throw NoConvergence("no convergence after " + std::to_string(it) +
                          " Newton iterations (residual " + std::to_string(rnorm) + ")");
    const Eigen::PartialPivLU<Matrix> lu(augmented_matrix(sys, mu, w, row, idx));
    if (!(lu.rcond() >= kRcondFloor)) throw SingularJacobian("augmented Jacobian is singular");
    Vector rhs(m + 1);
    for (int i = 0; i < m; ++i) rhs[i] = -r[idx[i]];
    rhs[m] = -g;
    const Vector d = lu.solve(rhs);
    for (int i = 0; i < m; ++i) c[idx[i]] += d[i];
    mu += d[m];
  }

  NewtonResult res;
  res.iterations = it;
  res.solution = sys.make_solution(mu, CosineSeries(c));
  const Eigen::PartialPivLU<Matrix> lu(augmented_matrix(sys, mu, res.solution.coeffs, row, idx));
  res.rcond = lu.rcond();
  res.augmented_sign = lu_sign(lu);
  Vector e = Vector::Zero(m + 1);
  e[m] = 1.0;
  const Vector tangent = lu.solve(e);
  Vector dw = Vector::Zero(n);
  for (int i = 0; i < m; ++i) dw[idx[i]] = tangent[i];
  res.dw_dtheta = CosineSeries(std::move(dw));
  res.dmu_dtheta = tangent[m];
  return res;
}

bool below_stokes_bound(const WaveSolution& s) { return s.crest_value() <= 0.5 * s.mu; }

// Step parameter of a continuation: the amplitude, or a linear pin <phi, w>.
struct Parametrisation {
  std::function<double(const WaveSolution&)> value;
  std::function<NewtonResult(const Seed&, double)> solve;
  bool amplitude = true;
};

Seed interpolate(const Parametrisation& par, const WaveSolution& s0, const WaveSolution& s1, double v) {
  const double v0 = par.value(s0), dv = par.value(s1) - v0;
  const double t = dv != 0.0 ? (v - v0) / dv : 0.0;
  return {s0.mu + t * (s1.mu - s0.mu),
          CosineSeries(s0.coeffs.coeffs() + t * (s1.coeffs.coeffs() - s0.coeffs.coeffs()))};
}

// Regula falsi (Illinois) on dmu/dtheta between two accepted points.
BranchEvent locate_fold(const Parametrisation& par, const WaveSolution& left, double g_left,
                        const WaveSolution& right, double g_right, int index) {
  BranchEvent ev;
  ev.index = index;
  ev.kind = EventKind::fold;
  WaveSolution lo = left, hi = right, best = std::abs(g_left) < std::abs(g_right) ? left : right;
  double glo = g_left, ghi = g_right;
  int stuck = 0;
  try {
    for (int it = 0; it < 60; ++it) {
      const double vlo = par.value(lo), vhi = par.value(hi);
      if (std::abs(vhi - vlo) < 1e-12) break;
      const double v = vhi - ghi * (vhi - vlo) / (ghi - glo);
      const NewtonResult r = par.solve(interpolate(par, lo, hi, v), v);
      const double g = r.dmu_dtheta;
      best = r.solution;
      if (g == 0.0) break;
      if ((g > 0) == (ghi > 0)) {
        hi = r.solution;
        ghi = g;
        if (stuck == -1) glo *= 0.5;
        stuck = -1;
      } else {
        lo = r.solution;
        glo = g;
        if (stuck == 1) ghi *= 0.5;
        stuck = 1;
      }
    }
  } catch (const NumericalError& e) {
    ev.note = std::string("fold refinement stopped: ") + e.what();
  }
  ev.mu = best.mu;
  ev.amplitude = best.amplitude;
  return ev;
}

void extend_core(const BabenkoSystem& sys, Branch& br, int direction, const Parametrisation& par) {
  const ContinuationConfig& cfg = br.config;
  cfg.validate();
  if (br.points.empty()) throw std::invalid_argument("cannot extend an empty branch");
  direction = direction < 0 ? -1 : 1;

  double dmu_last = kNaN;
  CosineSeries dw_last = CosineSeries::zeros(sys.size());
  if (br.points.back().amplitude > 0.0) {
    const WaveSolution& p = br.points.back();
    const NewtonResult r = par.solve({p.mu, p.coeffs}, par.value(p));
    dmu_last = r.dmu_dtheta;
    dw_last = r.dw_dtheta;
  }

  auto predict = [&](double target) -> Seed {
    const WaveSolution& p1 = br.points.back();
    if (par.amplitude && p1.amplitude == 0.0)
      return {p1.mu, CosineSeries::mode(sys.size(), br.origin.mode, target)};
    const double v1 = par.value(p1);
    if (br.points.size() >= 2) {
      const WaveSolution& p0 = br.points[br.points.size() - 2];
      if (std::abs(v1 - par.value(p0)) > 1e-3 * std::abs(target - v1)) return interpolate(par, p0, p1, target);
    }
    const double dv = target - v1;
    return {p1.mu + dv * dmu_last, CosineSeries(p1.coeffs.coeffs() + dv * dw_last.coeffs())};
  };

  auto terminate = [&](bool bound_failure, const std::string& why) {
    const WaveSolution& p = br.points.back();
    const bool near_extreme = bound_failure || (p.mu > 0.0 && p.crest_value() >= 0.9 * 0.5 * p.mu);
    BranchEvent ev;
    ev.index = static_cast<int>(br.points.size()) - 1;
    ev.kind = near_extreme ? EventKind::termination_extreme : EventKind::termination_no_convergence;
    ev.mu = p.mu;
    ev.amplitude = p.amplitude;
    ev.note = why;
    br.events.push_back(std::move(ev));
  };

  double step = cfg.initial_step;
  while (static_cast<int>(br.points.size()) < cfg.max_points) {
    const WaveSolution& last = br.points.back();
    if (last.amplitude >= cfg.max_amplitude && (direction > 0 || !par.amplitude)) break;
    const double v_last = par.value(last);
    double target = v_last + direction * step;
    bool capped = false;
    if (par.amplitude) {
      if (direction > 0 && target >= cfg.max_amplitude) {
        target = cfg.max_amplitude;
        capped = true;
      }
      if (direction < 0 && target <= 0.0) break;
    }

    NewtonResult res;
    bool ok = true;
    bool bound_failure = false;
    std::string why;
    try {
      res = par.solve(predict(target), target);
      if (!below_stokes_bound(res.solution)) {
        ok = false;
        bound_failure = true;
        why = "crest above mu/2";
      }
    } catch (const NumericalError& e) {
      ok = false;
      why = e.what();
    }
    if (!ok) {
      step *= cfg.step_shrink;
      if (step < cfg.min_step) {
        terminate(bound_failure, "step below min_step: " + why);
        break;
      }
      continue;
    }

    const WaveSolution previous = br.points.back();
    const double dmu_prev = dmu_last;
    br.push_point(res.solution);
    dmu_last = res.dmu_dtheta;
    dw_last = res.dw_dtheta;
    const int index = static_cast<int>(br.points.size()) - 1;

    if (std::isfinite(dmu_prev) && std::isfinite(dmu_last) && dmu_prev != 0.0 &&
        (dmu_prev > 0.0) != (dmu_last > 0.0)) {
      br.events.push_back(locate_fold(par, previous, dmu_prev, br.points.back(), dmu_last, index));
    }

    const WaveSolution& cur = br.points.back();
    if (cur.crest_value() >= 0.99 * 0.5 * cur.mu) {
      const CrestAngle angle = crest_angle(reconstruct(cur, 64));
      if (std::abs(0.5 * angle.degrees - 60.0) <= cfg.crest_angle_window_deg) {
        terminate(true, "crest angle " + std::to_string(angle.degrees) + " deg");
        break;
      }
    }
    if (capped) break;
    if (res.iterations <= cfg.fast_iterations) step = std::min(step * cfg.step_grow, cfg.max_step);
  }
}

}  // namespace

void ContinuationConfig::validate() const {
  if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol must be positive");
  if (max_newton_iters < 1) throw std::invalid_argument("max_newton_iters must be >= 1");
  if (!(min_step > 0.0 && min_step < initial_step && initial_step <= max_step))
    throw std::invalid_argument("step sizes must satisfy 0 < min_step < initial_step <= max_step");
  if (!(step_shrink > 0.0 && step_shrink < 1.0)) throw std::invalid_argument("step_shrink must lie in (0, 1)");
  if (!(step_grow >= 1.0)) throw std::invalid_argument("step_grow must be >= 1");
  if (max_points < 1) throw std::invalid_argument("max_points must be >= 1");
  if (!(max_amplitude >= 0.0)) throw std::invalid_argument("max_amplitude must be non-negative");
}

std::string to_string(EventKind kind) {
  switch (kind) {
    case EventKind::fold: return "fold";
    case EventKind::secondary_bifurcation: return "secondary_bifurcation";
    case EventKind::termination_extreme: return "termination_extreme";
    case EventKind::termination_no_convergence: return "termination_no_convergence";
  }
  return "unknown";
}

EventKind event_kind_from_string(const std::string& s) {
  for (auto k : {EventKind::fold, EventKind::secondary_bifurcation, EventKind::termination_extreme,
                 EventKind::termination_no_convergence})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown event kind '" + s + "'");
}

int Branch::symmetry_period() const {
  return origin.kind == BifurcationKind::primary ? std::max(1, origin.mode) : 1;
}

void Branch::push_point(WaveSolution s) {
  const double step = points.empty() ? s.amplitude : std::abs(s.amplitude - points.back().amplitude);
  theta.push_back(theta.empty() ? step : theta.back() + step);
  points.push_back(std::move(s));
}

NewtonResult newton_solve_detailed(const BabenkoSystem& system, const Seed& guess,
                                   double target_amplitude, const ContinuationConfig& config,
                                   int symmetry_period) {
  if (!(target_amplitude >= 0.0)) throw std::invalid_argument("target amplitude must be >= 0");
  if (target_amplitude == 0.0) {
    // max_k |w_k| = 0 forces w = 0, which solves the equation for every mu.
    NewtonResult res;
    res.solution = system.make_solution(guess.mu, CosineSeries::zeros(system.size()));
    res.dw_dtheta = CosineSeries::zeros(system.size());
    return res;
  }
  return solve_augmented(system, guess, SideCondition{nullptr, target_amplitude}, config,
                         symmetry_period);
}

NewtonResult newton_solve_pinned(const BabenkoSystem& system, const Seed& guess,
                                 const LinearPin& pin, const ContinuationConfig& config) {
  if (pin.functional.size() != system.size()) throw SizeMismatch("pin functional has wrong size");
  return solve_augmented(system, guess, SideCondition{&pin.functional, pin.value}, config, 1);
}

WaveSolution newton_solve(const BabenkoSystem& system, const Seed& guess, double target_amplitude,
                          const ContinuationConfig& config, int symmetry_period) {
  return newton_solve_detailed(system, guess, target_amplitude, config, symmetry_period).solution;
}

void extend_branch(const BabenkoSystem& sys, Branch& br, int direction) {
  const int period = br.symmetry_period();
  Parametrisation par;
  par.value = [](const WaveSolution& s) { return s.amplitude; };
  par.solve = [&](const Seed& g, double a) { return newton_solve_detailed(sys, g, a, br.config, period); };
  extend_core(sys, br, direction, par);
}

void extend_branch_pinned(const BabenkoSystem& sys, Branch& br, const Vector& functional, int direction) {
  if (functional.size() != sys.size()) throw SizeMismatch("pin functional has wrong size");
  Parametrisation par;
  par.amplitude = false;
  par.value = [&](const WaveSolution& s) { return functional.dot(s.coeffs.coeffs()); };
  par.solve = [&](const Seed& g, double v) {
    return newton_solve_pinned(sys, g, LinearPin{functional, v}, br.config);
  };
  extend_core(sys, br, direction, par);
}

Branch trace_branch(int n, const BabenkoSystem& system, const ContinuationConfig& config) {
  config.validate();
  const Seed seed = asymptotic_seed(n, 0.0, system.params(), system.grid());

  Branch br;
  br.params = system.params();
  br.N = system.size();
  br.dealias = system.dealias();
  br.config = config;
  br.origin.kind = BifurcationKind::primary;
  br.origin.mode = n;
  br.origin.mu_star = seed.mu;
  br.origin.null_direction = CosineSeries::mode(system.size(), n);
  br.push_point(system.make_solution(seed.mu, seed.w));
  if (config.max_amplitude > 0.0) extend_branch(system, br, +1);
  return br;
}

Branch trace_branch(int n, const OperatorParams& params, const ContinuationConfig& config,
                    int grid_size, bool dealias) {
  return trace_branch(n, BabenkoSystem(grid_size, params, dealias), config);
}

WaveSolution refine_solution(const WaveSolution& sol, int new_size, bool dealias,
                             const ContinuationConfig& config) {
  const BabenkoSystem sys(new_size, OperatorParams(sol.r), dealias);
  const CosineSeries w = sol.coeffs.resized(new_size);
  const double target = sys.grid().to_values(w).cwiseAbs().maxCoeff();
  return newton_solve(sys, {sol.mu, w}, target, config);
}

}  // namespace babenko
