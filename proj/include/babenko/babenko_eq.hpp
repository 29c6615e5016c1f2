#pragma once

// Discrete Babenko equation in the L_r-preconditioned form
//
//   L_r w - mu (I - P_0) w + L_r (w J_r w) + 1/2 (I - P_0) w^2 = 0
//
// posed for the cosine coefficients of w. Products are formed pointwise on
// the collocation nodes (aliased) or, with de-aliasing on, on a 2N-node grid
// and truncated back to N modes (which equals the exact Galerkin product).

#include "babenko/spectral.hpp"

namespace babenko {

struct WaveSolution {
  double mu = 0.0;
  double r = 0.0;
  Vector values;        // w at the collocation nodes
  CosineSeries coeffs;  // b_0..b_{N-1}
  double amplitude = 0.0;  // max_k |w(x_k)|

  int size() const { return coeffs.size(); }
  /// Largest node value of w; bounded above by mu / 2 on physical branches.
  double crest_value() const;
};

struct Seed {
  double mu;
  CosineSeries w;
};

/// Solver context for one (N, r, de-aliasing) combination. Immutable after
/// construction; one instance per branch trace.
class BabenkoSystem {
 public:
  BabenkoSystem(int n, OperatorParams params, bool dealias = false);

  int size() const { return grid_.size(); }
  const SpectralGrid& grid() const { return grid_; }
  const OperatorParams& params() const { return params_; }
  bool dealias() const { return dealias_; }
  const Vector& lambda() const { return lambda_; }
  const Vector& lr() const { return lr_; }

  CosineSeries residual(double mu, const CosineSeries& w) const;
  /// Frechet derivative of the residual in w, as an N x N matrix acting on
  /// coefficients.
  Matrix jacobian(double mu, const CosineSeries& w) const;
  /// Derivative of the residual in mu: -(I - P_0) w.
  Vector mu_derivative(const CosineSeries& w) const;

  /// Coefficients of the collocation product f g.
  CosineSeries product(const CosineSeries& f, const CosineSeries& g) const;
  /// Matrix of g -> product(f, g).
  Matrix multiplication_matrix(const CosineSeries& f) const;

  WaveSolution make_solution(double mu, CosineSeries w) const;
  /// Row of the synthesis matrix: node value j as a functional on coefficients.
  Vector synthesis_row(int node) const;

 private:
  void check(const CosineSeries& w) const;

  SpectralGrid grid_;
  SpectralGrid fine_grid_;
  OperatorParams params_;
  bool dealias_;
  Vector lambda_;
  Vector lr_;
};

CosineSeries residual(double mu, const CosineSeries& w, const OperatorParams& params,
                      bool dealias = false);
Matrix jacobian(double mu, const CosineSeries& w, const OperatorParams& params,
                bool dealias = false);

/// Small-amplitude start (mu_n, s cos nt) near the n-th primary bifurcation.
Seed asymptotic_seed(int n, double s, const OperatorParams& params, const SpectralGrid& grid);

}  // namespace babenko
