#include "dwi/analytics.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "dwi/error.hpp"

namespace dwi {

namespace {

void check_inputs(std::span<const double> y, std::span<const double> x) {
  if (y.size() != x.size()) throw ValidationError("regression: y and x lengths differ");
  if (y.size() < 3) throw ValidationError("regression needs at least 3 observations");
  for (std::size_t i = 0; i < y.size(); ++i)
    if (!std::isfinite(y[i]) || !std::isfinite(x[i])) throw ValidationError("regression: non-finite input");
}

double two_sided_p(double coef, double se, double df) {
  if (se > 0.0) {
    boost::math::students_t t(df);
    return 2.0 * boost::math::cdf(boost::math::complement(t, std::abs(coef / se)));
  }
  return coef == 0.0 ? 1.0 : 0.0;
}

// Weighted least squares with SEs from sum(w r^2) / (n - 2).
void weighted_fit(std::span<const double> y, std::span<const double> x, std::span<const double> w, RegressionFit& f) {
  double sw = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("regression: regressor is constant (rank-deficient design)");
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += w[i] * r * r;
  }
  const double df = static_cast<double>(y.size()) - 2.0;
  const double s2 = df > 0.0 ? sse / df : 0.0;
  f.rmse = std::sqrt(s2);
  f.se_slope = std::sqrt(s2 / sxx);
  f.se_intercept = std::sqrt(s2 * (1.0 / sw + mx * mx / sxx));
  f.p_slope = df > 0.0 ? two_sided_p(f.slope, f.se_slope, df) : 1.0;
  f.p_intercept = df > 0.0 ? two_sided_p(f.intercept, f.se_intercept, df) : 1.0;
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2), v.end());
  const double hi = v[n / 2];
  if (n % 2) return hi;
  return 0.5 * (hi + *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n / 2)));
}

}  // namespace

RegressionFit ols(std::span<const double> y, std::span<const double> x) {
  check_inputs(y, x);
  RegressionFit f;
  std::vector<double> w(y.size(), 1.0);
  weighted_fit(y, x, w, f);
  return f;
}

RegressionFit robust_regression(std::span<const double> y, std::span<const double> x, const RobustOptions& opt) {
  check_inputs(y, x);
  if (!(opt.tuning > 0.0) || opt.max_iter < 1 || !(opt.tol > 0.0))
    throw ValidationError("robust regression: tuning, max_iter and tol must be positive");
  const std::size_t n = y.size();
  RegressionFit f = ols(y, x);
  f.method = RegressionMethod::Robust;
  std::vector<double> w(n, 1.0), r(n), absdev(n);
  double yscale = 0.0;
  for (double v : y) yscale = std::max(yscale, std::abs(v));
  f.converged = false;
  for (int it = 1; it <= opt.max_iter; ++it) {
    f.iterations = it;
    for (std::size_t i = 0; i < n; ++i) r[i] = y[i] - f.intercept - f.slope * x[i];
    const double med = median(r);
    for (std::size_t i = 0; i < n; ++i) absdev[i] = std::abs(r[i] - med);
    const double scale = median(absdev) / 0.6745;
    if (!(scale > 1e-12 * std::max(1.0, yscale))) {
      // Residuals are (almost) all identical: the data lie on a line.
      f.converged = true;
      break;
    }
    std::size_t positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = r[i] / (opt.tuning * scale);
      w[i] = std::abs(u) < 1.0 ? (1.0 - u * u) * (1.0 - u * u) : 0.0;
      positive += w[i] > 0.0 ? 1 : 0;
    }
    if (positive < 3) {
      f.warnings.push_back("fewer than 3 observations kept positive weight; stopping");
      break;
    }
    const double a0 = f.intercept, b0 = f.slope;
    weighted_fit(y, x, w, f);
    if (std::abs(f.intercept - a0) < opt.tol * (1.0 + std::abs(a0)) && std::abs(f.slope - b0) < opt.tol * (1.0 + std::abs(b0))) {
      f.converged = true;
      break;
    }
  }
  if (!f.converged) f.warnings.push_back("IRLS did not converge in " + std::to_string(opt.max_iter) + " iterations");
  f.weights = w;
  return f;
}

JensenAlpha jensen_alpha(std::span<const double> asset, std::span<const double> market, double risk_free) {
  check_inputs(asset, market);
  std::vector<double> ea(asset.size()), em(market.size());
  for (std::size_t i = 0; i < asset.size(); ++i) {
    ea[i] = asset[i] - risk_free;
    em[i] = market[i] - risk_free;
  }
  const RegressionFit f = ols(ea, em);
  double ma = 0.0, mm = 0.0;
  for (std::size_t i = 0; i < ea.size(); ++i) {
    ma += ea[i];
    mm += em[i];
  }
  ma /= static_cast<double>(ea.size());
  mm /= static_cast<double>(em.size());
  return {ma - f.slope * mm, f.slope, risk_free};
}

}  // namespace dwi
