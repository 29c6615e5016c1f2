#pragma once

// Slow reference implementations that share no code with the library: trig
// sums instead of transforms, hyperbolic functions instead of the cached
// multipliers, and a singular-integral quadrature for the conjugation operator.

#include <cmath>
#include <numbers>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;
constexpr double pi = std::numbers::pi;

inline double coth_beta(int n, double r) {
  if (n == 0) return 0.0;
  if (r == 0.0) return 1.0;
  return 1.0 / std::tanh(-n * std::log(r));
}

inline Vec nodes(int n) {
  Vec x(n);
  for (int j = 0; j < n; ++j) x[j] = pi * (2 * j + 1) / (2.0 * n);
  return x;
}

inline double cos_sum(const Vec& c, double t) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) s += c[k] * std::cos(k * t);
  return s;
}

inline double dcos_sum(const Vec& c, double t) {
  double s = 0.0;
  for (std::size_t k = 1; k < c.size(); ++k) s -= k * c[k] * std::sin(k * t);
  return s;
}

// Coefficients of the cosine interpolant of values given on the n midpoint nodes.
inline Vec analyse(const Vec& values) {
  const int n = static_cast<int>(values.size());
  const Vec x = nodes(n);
  Vec c(n, 0.0);
  for (int k = 0; k < n; ++k) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += values[j] * std::cos(k * x[j]);
    c[k] = (k == 0 ? 1.0 : 2.0) * s / n;
  }
  return c;
}

// Odd kernel of the annulus conjugation operator beyond the Hilbert part:
// sum_n 4 q_n / (1 - q_n) sin(n x), q_n = r^{2n}.
inline double kernel_tail(double x, double r) {
  if (r == 0.0) return 0.0;
  double s = 0.0;
  for (int n = 1; n < 2000; ++n) {
    const double q = std::pow(r, 2 * n);
    if (q < 1e-22) break;
    s += 4.0 * q / (1.0 - q) * std::sin(n * x);
  }
  return s;
}

// (B_r f)(t) = 1/(2 pi) PV int f(s) [cot((t - s)/2) + tail(t - s)] ds for a
// periodic f given as a callable with derivative fp. The Hilbert part uses
// singularity subtraction; the trapezoidal rule on m points is exact for trig
// polynomials of degree below m/2.
template <class F, class Fp>
double conjugate(F f, Fp fp, double t, double r, int m = 256) {
  double s = 0.0;
  const double h = 2.0 * pi / m;
  const double ft = f(t);
  for (int i = 0; i < m; ++i) {
    const double si = t + i * h;
    double v;
    if (i == 0)
      v = -2.0 * fp(t);
    else
      v = (f(si) - ft) / std::tan((t - si) / 2.0);
    v += f(si) * kernel_tail(t - si, r);
    s += v;
  }
  return s * h / (2.0 * pi);
}

// J_r w = B_r(w') for w = sum c_k cos kt, evaluated by quadrature.
inline double apply_J(const Vec& c, double t, double r) {
  auto f = [&](double s) { return dcos_sum(c, s); };
  auto fp = [&](double s) {
    double v = 0.0;
    for (std::size_t k = 1; k < c.size(); ++k) v -= double(k * k) * c[k] * std::cos(k * s);
    return v;
  };
  return conjugate(f, fp, t, r);
}

// Residual L(w + w Jw) - mu Q w + 1/2 Q w^2 with all pieces built from trig
// sums on the collocation nodes (dealias = false) or on 2N nodes truncated to
// N modes (dealias = true).
inline Vec residual(double mu, const Vec& c, double r, bool dealias) {
  const int n = static_cast<int>(c.size());
  Vec jc(n);
  for (int k = 0; k < n; ++k) jc[k] = k * coth_beta(k, r) * c[k];
  const int m = dealias ? 2 * n : n;
  const Vec x = nodes(m);
  Vec wjw(m), ww(m);
  for (int j = 0; j < m; ++j) {
    const double w = cos_sum(c, x[j]);
    wjw[j] = w * cos_sum(jc, x[j]);
    ww[j] = w * w;
  }
  Vec a = analyse(wjw), b = analyse(ww);
  Vec out(n);
  for (int k = 0; k < n; ++k) {
    const double l = k == 0 ? 1.0 : 1.0 / (k * coth_beta(k, r));
    out[k] = l * (c[k] + a[k]);
    if (k > 0) out[k] += -mu * c[k] + 0.5 * b[k];
  }
  return out;
}

}  // namespace oracle
