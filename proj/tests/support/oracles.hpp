#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

inline double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

struct Moments {
  double mean, variance, skewness, excess_kurtosis;
};

inline Moments moments(const std::vector<double>& x) {
  const double m = mean(x);
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  const double n = static_cast<double>(x.size());
  m2 /= n;
  m3 /= n;
  m4 /= n;
  return {m, m2 * n / (n - 1), m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

// Composite Simpson rule on [a, b] with an even number of panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  if (panels % 2) ++panels;
  const double h = (b - a) / panels;
  double s = f(a) + f(b);
  for (int i = 1; i < panels; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Standard normal quantile by bisection on the CDF.
inline double normal_quantile(double p) {
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// Expected shortfall of N(0, 1) at level alpha, in loss units.
inline double normal_cvar(double alpha) { return normal_pdf(normal_quantile(alpha)) / alpha; }

// Empirical left-tail loss quantile: minus the k-th smallest, k = floor(n a) + 1.
inline double sorted_var(std::vector<double> x, double alpha) {
  std::sort(x.begin(), x.end());
  const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(x.size()) * alpha + 1e-9));
  return -x[std::min(k, x.size() - 1)];
}

// Mean loss over observations at or below the VaR threshold.
inline double sorted_cvar(std::vector<double> x, double alpha) {
  const double thr = -sorted_var(x, alpha);
  double s = 0.0;
  std::size_t n = 0;
  for (double v : x)
    if (v <= thr) s += v, ++n;
  return -s / static_cast<double>(n);
}

// Nonparametric bootstrap standard error of a statistic.
inline double bootstrap_se(const std::vector<std::vector<double>>& columns,
                           const std::function<double(const std::vector<std::vector<double>>&)>& stat, int reps,
                           std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const std::size_t n = columns.front().size();
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<double> draws;
  std::vector<std::vector<double>> res(columns.size(), std::vector<double>(n));
  for (int r = 0; r < reps; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = pick(gen);
      for (std::size_t c = 0; c < columns.size(); ++c) res[c][i] = columns[c][j];
    }
    draws.push_back(stat(res));
  }
  return std::sqrt(variance(draws));
}

// Kendall's tau-a by pair counting.
inline double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  long conc = 0, disc = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double s = (x[i] - x[j]) * (y[i] - y[j]);
      if (s > 0) ++conc;
      if (s < 0) ++disc;
    }
  const double pairs = 0.5 * static_cast<double>(x.size()) * static_cast<double>(x.size() - 1);
  return static_cast<double>(conc - disc) / pairs;
}

// Minimizer of f over [lo, hi] on a uniform grid.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi, long points) {
  double best = lo, fb = f(lo);
  for (long i = 1; i <= points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points);
    const double v = f(x);
    if (v < fb) fb = v, best = x;
  }
  return best;
}

// Closed-form two-asset minimum-variance weight on the first asset (budget only).
inline double two_asset_min_variance_w1(double s11, double s22, double s12) {
  return (s22 - s12) / (s11 + s22 - 2.0 * s12);
}

// Rockafellar-Uryasev CVaR of a discrete sample with a fractional tail scenario.
inline double ru_cvar(std::vector<double> x, double alpha) {
  std::sort(x.begin(), x.end());
  const double tail = alpha * static_cast<double>(x.size());
  double used = 0.0, acc = 0.0;
  for (double v : x) {
    if (used >= tail) break;
    const double w = std::min(1.0, tail - used);
    acc += w * v;
    used += w;
  }
  return -acc / tail;
}

// Solves the 2x2 normal equations of y = a + b x directly.
inline std::pair<double, double> normal_equations(const std::vector<double>& y, const std::vector<double>& x) {
  double n = static_cast<double>(x.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double det = n * sxx - sx * sx;
  return {(sxx * sy - sx * sxy) / det, (n * sxy - sx * sy) / det};
}

// Lognormal call price, written out independently of the library.
inline double black_scholes_call(double s, double k, double t, double r, double sigma) {
  const double sd = sigma * std::sqrt(t);
  const double d1 = (std::log(s / k) + (r + 0.5 * sigma * sigma) * t) / sd;
  return s * normal_cdf(d1) - k * std::exp(-r * t) * normal_cdf(d1 - sd);
}

}  // namespace oracle
