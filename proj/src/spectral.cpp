#include "babenko/spectral.hpp"

#include "babenko/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

namespace babenko {

namespace {

// The FFTW planner is not re-entrant; execution of an existing plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

void check_r(double r) {
  if (!(r >= 0.0 && r < 1.0))
    throw std::invalid_argument("annulus radius r must lie in [0, 1), got " + std::to_string(r));
}

// r^{2n} and 1 - r^{2n}, the latter without cancellation for r close to 1.
struct PowerPair {
  double q;
  double one_minus_q;
};

PowerPair even_power(int n, double r) {
  if (r == 0.0) return {0.0, 1.0};
  const double e = 2.0 * n * std::log(r);
  return {std::exp(e), -std::expm1(e)};
}

}  // namespace

OperatorParams::OperatorParams(double r) : r_(r) { check_r(r); }

CosineSeries CosineSeries::mode(int n, int mode, double amplitude) {
  if (mode < 0 || mode >= n)
    throw std::invalid_argument("mode " + std::to_string(mode) + " not representable on " +
                                std::to_string(n) + " coefficients");
  Vector c = Vector::Zero(n);
  c[mode] = amplitude;
  return CosineSeries(std::move(c));
}

double CosineSeries::evaluate(double t) const {
  const int n = size();
  if (n == 0) return 0.0;
  const double x = std::cos(t);
  double b1 = 0.0, b2 = 0.0;
  for (int k = n - 1; k >= 1; --k) {
    const double b0 = coeffs_[k] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return coeffs_[0] + x * b1 - b2;
}

CosineSeries CosineSeries::resized(int n) const {
  Vector c = Vector::Zero(n);
  const int m = std::min(n, size());
  c.head(m) = coeffs_.head(m);
  return CosineSeries(std::move(c));
}

double multiplier_beta(int n, double r) {
  check_r(r);
  if (n < 0) throw std::invalid_argument("mode index must be non-negative");
  if (n == 0) return 0.0;
  const auto [q, one_minus_q] = even_power(n, r);
  return (1.0 + q) / one_minus_q;
}

double eigenvalue_lambda(int n, double r) { return n * multiplier_beta(n, r); }

double bifurcation_mu(int n, double r) {
  check_r(r);
  if (n < 1) throw std::invalid_argument("bifurcation points are indexed from n = 1");
  const auto [q, one_minus_q] = even_power(n, r);
  return one_minus_q / (n * (1.0 + q));
}

Vector jr_diagonal(int n, const OperatorParams& params) {
  Vector d(n);
  for (int k = 0; k < n; ++k) d[k] = eigenvalue_lambda(k, params.r());
  return d;
}

Vector lr_diagonal(int n, const OperatorParams& params) {
  Vector d(n);
  if (n > 0) d[0] = 1.0;
  for (int k = 1; k < n; ++k) d[k] = bifurcation_mu(k, params.r());
  return d;
}

CosineSeries apply_Jr(const CosineSeries& v, const OperatorParams& params) {
  return CosineSeries(jr_diagonal(v.size(), params).cwiseProduct(v.coeffs()));
}

CosineSeries apply_Lr(const CosineSeries& v, const OperatorParams& params) {
  return CosineSeries(lr_diagonal(v.size(), params).cwiseProduct(v.coeffs()));
}

CosineSeries project_P0(const CosineSeries& v) {
  Vector c = Vector::Zero(v.size());
  if (v.size() > 0) c[0] = v[0];
  return CosineSeries(std::move(c));
}

struct SpectralGrid::Plans {
  fftw_plan forward = nullptr;  // REDFT10 (DCT-II)
  fftw_plan inverse = nullptr;  // REDFT01 (DCT-III)

  explicit Plans(int n) {
    std::vector<double> in(n), out(n);
    std::lock_guard lock(planner_mutex());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward = fftw_plan_r2r_1d(n, in.data(), out.data(), FFTW_REDFT10, flags);
    inverse = fftw_plan_r2r_1d(n, in.data(), out.data(), FFTW_REDFT01, flags);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }
  Plans(const Plans&) = delete;
  Plans& operator=(const Plans&) = delete;
};

SpectralGrid::SpectralGrid(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("grid size must be positive");
  nodes_.resize(n);
  for (int j = 0; j < n; ++j) nodes_[j] = std::numbers::pi * (2.0 * j + 1.0) / (2.0 * n);
  plans_ = std::make_shared<const Plans>(n);
}

CosineSeries SpectralGrid::to_coeffs(std::span<const double> values) const {
  if (static_cast<int>(values.size()) != n_)
    throw SizeMismatch("expected " + std::to_string(n_) + " node values, got " +
                       std::to_string(values.size()));
  std::vector<double> in(values.begin(), values.end());
  Vector c(n_);
  fftw_execute_r2r(plans_->forward, in.data(), c.data());
  c /= static_cast<double>(n_);
  c[0] *= 0.5;
  return CosineSeries(std::move(c));
}

CosineSeries SpectralGrid::to_coeffs(const Vector& values) const {
  return to_coeffs(std::span<const double>(values.data(), static_cast<size_t>(values.size())));
}

Vector SpectralGrid::to_values(const CosineSeries& coeffs) const {
  if (coeffs.size() != n_)
    throw SizeMismatch("expected " + std::to_string(n_) + " coefficients, got " +
                       std::to_string(coeffs.size()));
  std::vector<double> in(coeffs.coeffs().data(), coeffs.coeffs().data() + n_);
  for (int k = 1; k < n_; ++k) in[k] *= 0.5;
  Vector v(n_);
  fftw_execute_r2r(plans_->inverse, in.data(), v.data());
  return v;
}

Vector SpectralGrid::apply_Jr_values(std::span<const double> values,
                                     const OperatorParams& params) const {
  return to_values(apply_Jr(to_coeffs(values), params));
}

Vector SpectralGrid::apply_Lr_values(std::span<const double> values,
                                     const OperatorParams& params) const {
  return to_values(apply_Lr(to_coeffs(values), params));
}

}  // namespace babenko
