#include "babenko/babenko_eq.hpp"

#include "babenko/errors.hpp"

#include <cmath>
#include <string>

namespace babenko {

double WaveSolution::crest_value() const { return values.size() ? values.maxCoeff() : 0.0; }

BabenkoSystem::BabenkoSystem(int n, OperatorParams params, bool dealias)
    : grid_(n),
      fine_grid_(dealias ? 2 * n : 1),
      params_(params),
      dealias_(dealias),
      lambda_(jr_diagonal(n, params)),
      lr_(lr_diagonal(n, params)) {}

void BabenkoSystem::check(const CosineSeries& w) const {
  if (w.size() != size())
    throw SizeMismatch("series has " + std::to_string(w.size()) + " coefficients, grid has " +
                       std::to_string(size()));
  if (!w.coeffs().allFinite()) throw std::domain_error("non-finite coefficients");
}

CosineSeries BabenkoSystem::product(const CosineSeries& f, const CosineSeries& g) const {
  check(f);
  check(g);
  if (!dealias_) {
    return grid_.to_coeffs(Vector(grid_.to_values(f).cwiseProduct(grid_.to_values(g))));
  }
  const int n = size();
  const Vector fv = fine_grid_.to_values(f.resized(2 * n));
  const Vector gv = fine_grid_.to_values(g.resized(2 * n));
  return fine_grid_.to_coeffs(Vector(fv.cwiseProduct(gv))).resized(n);
}

Matrix BabenkoSystem::multiplication_matrix(const CosineSeries& f) const {
  check(f);
  const int n = size();
  const Vector& c = f.coeffs();
  Matrix k = Matrix::Zero(n, n);
  // cos(m t) cos(k t) = (cos((m-k) t) + cos((m+k) t)) / 2; on the midpoint
  // grid cos(p x_j) = -cos((2N - p) x_j) for N < p < 2N and cos(N x_j) = 0.
  for (int col = 0; col < n; ++col) {
    for (int row = 0; row < n; ++row) {
      double s = 0.0;
      if (col + row < n) s += c[col + row];
      if (row > 0 && col >= row) s += c[col - row];
      if (row >= col) s += c[row - col];
      if (!dealias_ && row + col > n) s -= c[2 * n - row - col];
      k(row, col) = 0.5 * s;
    }
  }
  return k;
}

CosineSeries BabenkoSystem::residual(double mu, const CosineSeries& w) const {
  check(w);
  if (!std::isfinite(mu)) throw std::domain_error("non-finite mu");
  const CosineSeries jw(lambda_.cwiseProduct(w.coeffs()));
  const Vector wjw = product(w, jw).coeffs();
  Vector sq = product(w, w).coeffs();
  sq[0] = 0.0;
  Vector shifted = w.coeffs();
  shifted[0] = 0.0;
  return CosineSeries(lr_.cwiseProduct(w.coeffs() + wjw) - mu * shifted + 0.5 * sq);
}

Matrix BabenkoSystem::jacobian(double mu, const CosineSeries& w) const {
  check(w);
  if (!std::isfinite(mu)) throw std::domain_error("non-finite mu");
  const int n = size();
  const Matrix kw = multiplication_matrix(w);
  const Matrix kjw = multiplication_matrix(CosineSeries(lambda_.cwiseProduct(w.coeffs())));
  Matrix j = lr_.asDiagonal() * (kjw + kw * lambda_.asDiagonal());
  j.bottomRows(n - 1) += kw.bottomRows(n - 1);
  j.diagonal() += lr_;
  j.diagonal().tail(n - 1).array() -= mu;
  return j;
}

Vector BabenkoSystem::mu_derivative(const CosineSeries& w) const {
  Vector d = -w.coeffs();
  d[0] = 0.0;
  return d;
}

WaveSolution BabenkoSystem::make_solution(double mu, CosineSeries w) const {
  check(w);
  WaveSolution s;
  s.mu = mu;
  s.r = params_.r();
  s.values = grid_.to_values(w);
  s.amplitude = s.values.cwiseAbs().maxCoeff();
  s.coeffs = std::move(w);
  return s;
}

Vector BabenkoSystem::synthesis_row(int node) const {
  const double x = grid_.nodes().at(node);
  Vector row(size());
  for (int k = 0; k < size(); ++k) row[k] = std::cos(k * x);
  return row;
}

CosineSeries residual(double mu, const CosineSeries& w, const OperatorParams& params,
                      bool dealias) {
  return BabenkoSystem(w.size(), params, dealias).residual(mu, w);
}

Matrix jacobian(double mu, const CosineSeries& w, const OperatorParams& params, bool dealias) {
  return BabenkoSystem(w.size(), params, dealias).jacobian(mu, w);
}

Seed asymptotic_seed(int n, double s, const OperatorParams& params, const SpectralGrid& grid) {
  if (n < 1) throw std::invalid_argument("seed mode must be positive");
  if (n >= grid.size())
    throw std::invalid_argument("mode " + std::to_string(n) + " is not representable with N = " +
                                std::to_string(grid.size()));
  return {bifurcation_mu(n, params.r()), CosineSeries::mode(grid.size(), n, s)};
}

}  // namespace babenko
