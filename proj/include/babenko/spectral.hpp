#pragma once

// Operator algebra on even 2*pi-periodic functions represented by cosine
// series on the half period (0, pi).
//
// Transform convention (fixed for the whole project):
//
//   w(t) = sum_{k=0}^{N-1} c_k cos(k t)
//
// with no normalisation factor on c_0. Point values live on the midpoint
// nodes x_j = pi (2j + 1) / (2N), j = 0..N-1, and the forward transform is the
// exact inverse of cosine synthesis on those nodes (DCT-II / DCT-III pair).

#include <Eigen/Core>

#include <memory>
#include <span>
#include <vector>

namespace babenko {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Inner radius r of the conformal annulus; r = 0 is infinitely deep water.
class OperatorParams {
 public:
  explicit OperatorParams(double r = 0.0);

  double r() const { return r_; }

 private:
  double r_;
};

/// Coefficients c_0..c_{N-1} of cos(k t).
class CosineSeries {
 public:
  CosineSeries() = default;
  explicit CosineSeries(Vector coeffs) : coeffs_(std::move(coeffs)) {}

  static CosineSeries zeros(int n) { return CosineSeries(Vector::Zero(n)); }
  /// amplitude * cos(mode t) on n coefficients.
  static CosineSeries mode(int n, int mode, double amplitude = 1.0);

  int size() const { return static_cast<int>(coeffs_.size()); }
  double operator[](int k) const { return coeffs_[k]; }
  double& operator[](int k) { return coeffs_[k]; }

  const Vector& coeffs() const { return coeffs_; }
  Vector& coeffs() { return coeffs_; }

  /// Sum of c_k cos(k t) at an arbitrary t (Clenshaw recurrence).
  double evaluate(double t) const;
  /// Same series zero-padded (or truncated) to n coefficients.
  CosineSeries resized(int n) const;

 private:
  Vector coeffs_;
};

/// Multiplier of B_r: cos nt -> beta_n sin nt; beta_0 = 0.
double multiplier_beta(int n, double r);
/// Eigenvalue of J_r = B_r d/dt on cos nt: lambda_n = n beta_n, lambda_0 = 0.
double eigenvalue_lambda(int n, double r);
/// mu_n = 1 / lambda_n for n >= 1. The n = 0 entry of L_r (mu_0 = 1) is
/// handled by apply_Lr, not here.
double bifurcation_mu(int n, double r);

CosineSeries apply_Jr(const CosineSeries& v, const OperatorParams& params);
CosineSeries apply_Lr(const CosineSeries& v, const OperatorParams& params);
CosineSeries project_P0(const CosineSeries& v);

/// Diagonals of J_r and L_r on the first n modes.
Vector jr_diagonal(int n, const OperatorParams& params);
Vector lr_diagonal(int n, const OperatorParams& params);

/// Collocation grid with N midpoint nodes on (0, pi) and the DCT pair that
/// maps node values to cosine coefficients and back.
///
/// Copies share the underlying FFTW plans; transforms use per-call buffers
/// and are safe to run from several threads at once.
class SpectralGrid {
 public:
  explicit SpectralGrid(int n);

  int size() const { return n_; }
  const std::vector<double>& nodes() const { return nodes_; }

  /// Node values -> coefficients.
  CosineSeries to_coeffs(std::span<const double> values) const;
  CosineSeries to_coeffs(const Vector& values) const;
  /// Coefficients -> node values.
  Vector to_values(const CosineSeries& coeffs) const;

  /// J_r applied to point values: forward transform, diagonal scaling,
  /// inverse transform.
  Vector apply_Jr_values(std::span<const double> values, const OperatorParams& params) const;
  Vector apply_Lr_values(std::span<const double> values, const OperatorParams& params) const;

 private:
  struct Plans;

  int n_;
  std::vector<double> nodes_;
  std::shared_ptr<const Plans> plans_;
};

}  // namespace babenko
