#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "dwi/error.hpp"
#include "dwi/options.hpp"

using namespace dwi;

namespace {

// Unit-variance NIG with the given shape.
NigParams unit_nig(double alpha, double beta, double mu) {
  NigParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.mu = mu;
  const double g = std::sqrt(alpha * alpha - beta * beta);
  p.delta = g * g * g / (alpha * alpha);
  return p;
}

OptionModelParams fitted_like() {
  OptionModelParams p;
  p.alpha0 = 0.00634;
  p.alpha1 = 0.65;
  p.beta1 = 0.0;
  p.nig = unit_nig(2.84, -1.68, 1.14);
  p.a1 = 0.0356;
  p.risk_free = 0.02;
  p.spot = 0.008048;
  p.variance_cap = 0.999 * esscher_variance_limit(p.nig);
  return p;
}

OptionModelParams symmetric() {
  OptionModelParams p;
  p.alpha0 = 0.01;
  p.alpha1 = 0.1;
  p.beta1 = 0.8;
  p.nig = unit_nig(1.5, 0.0, 0.0);
  p.a1 = 0.05;
  p.risk_free = 0.03;
  p.spot = 100.0;
  return p;
}

// Constant variance sigma^2 with near-Gaussian innovations.
OptionModelParams gaussian(double sigma, double r) {
  OptionModelParams p;
  p.alpha0 = sigma * sigma;
  p.alpha1 = 0.0;
  p.beta1 = 0.0;
  p.nig = unit_nig(1e4, 0.0, 0.0);
  p.a1 = sigma * sigma;
  p.risk_free = r;
  p.spot = 1.0;
  return p;
}

// Closed-form log-MGF of R_t written out from the NIG MGF.
double log_mgf(double u, const NigParams& p, double a, double r, double l0) {
  const double sa = std::sqrt(a);
  const double v = u * sa;
  return u * (r + l0 * sa - 0.5 * a) + p.mu * v +
         p.delta * (std::sqrt(p.alpha * p.alpha - p.beta * p.beta) -
                    std::sqrt(p.alpha * p.alpha - (p.beta + v) * (p.beta + v)));
}

}  // namespace

TEST_CASE("Esscher parameter in the Gaussian limit") {
  // With unit-variance innovations the shift is (r' - M - s^2/2)/s^2 where
  // M = r' + m and s^2 = a, i.e. -lambda0 / sqrt(a).
  for (double l0 : {0.0, 0.3, -0.5}) {
    for (double a : {0.01, 0.04, 0.25}) {
      const double th = esscher_theta(unit_nig(1e4, 0.0, 0.0), a, 0.02, l0);
      CHECK(th == doctest::Approx(-l0 / std::sqrt(a)).epsilon(1e-3).scale(1.0));
    }
  }
  // Innovation variance 1e-4: drift already r' - a/2 but spread 100x smaller.
  // The tilted skew is sqrt(a) / (2 delta) of alpha, so delta stays large.
  NigParams narrow{1e6, 0.0, 100.0, 0.0};
  const double a = 0.04, s2 = a * narrow.variance();
  const double expect = (0.5 * a - 0.5 * s2) / s2;
  CHECK(esscher_theta(narrow, a, 0.02) == doctest::Approx(expect).epsilon(1e-3));
}

TEST_CASE("Esscher parameter solves the martingale condition") {
  for (const auto& p : {fitted_like(), symmetric()}) {
    for (double a : {0.005, 0.0356, 0.2, 1.0}) {
      if (p.variance_cap > 0.0 && a > p.variance_cap) continue;
      const double r = p.risk_free;
      const double th = esscher_theta(p.nig, a, r);
      const double resid = std::exp(log_mgf(1.0 + th, p.nig, a, r, 0.0)) - std::exp(log_mgf(th, p.nig, a, r, 0.0) + r);
      CHECK(std::abs(resid) < 1e-10);
      CHECK(conditional_log_mgf(th, p.nig, a, r) == doctest::Approx(log_mgf(th, p.nig, a, r, 0.0)).epsilon(1e-12));

      // Two-level grid scan of the domain for the sign change.
      const double sa = std::sqrt(a);
      const double lo = -(p.nig.alpha + p.nig.beta) / sa + 1e-9, hi = (p.nig.alpha - p.nig.beta) / sa - 1.0 - 1e-9;
      const auto h = [&](double t) { return log_mgf(1.0 + t, p.nig, a, r, 0.0) - log_mgf(t, p.nig, a, r, 0.0) - r; };
      double root = NAN;
      double l = lo, u = hi;
      for (int level = 0; level < 2; ++level) {
        const long pts = 1000000;
        double prev = h(l);
        for (long i = 1; i <= pts; ++i) {
          const double x = l + (u - l) * static_cast<double>(i) / static_cast<double>(pts);
          const double v = h(x);
          if ((prev <= 0.0) != (v <= 0.0)) {
            const double step = (u - l) / static_cast<double>(pts);
            u = x;
            l = x - step;
            root = 0.5 * (l + u);
            break;
          }
          prev = v;
        }
      }
      REQUIRE(std::isfinite(root));
      CHECK(std::abs(th - root) < 1e-6);
    }
  }
}

TEST_CASE("no risk-neutral measure beyond the variance limit") {
  const auto nig = unit_nig(2.84, -1.68, 1.14);
  const double lim = esscher_variance_limit(nig);
  CHECK(lim > 0.0);
  CHECK_NOTHROW(esscher_theta(nig, 0.99 * lim, 0.02));
  try {
    esscher_theta(nig, 1.5 * lim, 0.02);
    FAIL("expected NoRiskNeutralMeasure");
  } catch (const NoRiskNeutralMeasure& e) {
    CHECK(e.lower() < e.upper());
  }
}

TEST_CASE("discounted paths are martingales") {
  const std::size_t n = 100000;
  for (const auto& p : {fitted_like(), symmetric(), gaussian(0.2, 0.05)}) {
    const auto paths = simulate_risk_neutral(p, 16, n, 7);
    for (int t : {1, 4, 16}) {
      const auto x = paths.terminal(t);
      std::vector<double> d(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) d[i] = std::exp(-p.risk_free * t) * x[i];
      const double se = std::sqrt(oracle::variance(d) / static_cast<double>(n));
      CHECK(std::abs(oracle::mean(d) - p.spot) < 3.0 * se);
    }
  }
}

TEST_CASE("zero volatility grows at the risk-free rate") {
  OptionModelParams p = gaussian(1e-7, 0.04);
  p.spot = 2.0;
  const auto paths = simulate_risk_neutral(p, 5, 1000, 3);
  for (std::size_t i = 0; i < 1000; i += 97)
    for (int t = 1; t <= 5; ++t) CHECK(paths.at(i, t) == doctest::Approx(2.0 * std::exp(0.04 * t)).epsilon(1e-5));
}

TEST_CASE("paths are reproducible") {
  const auto p = symmetric();
  const auto a = simulate_risk_neutral(p, 4, 5000, 11, 1);
  const auto b = simulate_risk_neutral(p, 4, 5000, 11, 1);
  const auto c = simulate_risk_neutral(p, 4, 5000, 11, 3);
  CHECK(a.values == b.values);
  CHECK(a.values == c.values);
  CHECK(a.values != simulate_risk_neutral(p, 4, 5000, 12, 1).values);
}

TEST_CASE("pricing identities on shared paths") {
  const auto p = symmetric();
  const auto paths = simulate_risk_neutral(p, 8, 20000, 5);
  for (int t : {1, 8}) {
    const auto c0 = price_option(paths, OptionKind::Call, 0.0, t);
    const auto p0 = price_option(paths, OptionKind::Put, 0.0, t);
    CHECK(p0.price == 0.0);
    CHECK(std::abs(c0.price - p.spot) < 3.0 * c0.mc_standard_error);

    double prev_call = 1e300, prev_put = -1.0;
    for (double k = 40.0; k <= 200.0; k += 10.0) {
      const auto c = price_option(paths, OptionKind::Call, k, t);
      const auto q = price_option(paths, OptionKind::Put, k, t);
      const double parity = p.spot - k * std::exp(-p.risk_free * t);
      const double se = std::hypot(c.mc_standard_error, q.mc_standard_error);
      CHECK(std::abs(c.price - q.price - parity) < 3.0 * se);
      CHECK(c.price <= prev_call);
      CHECK(q.price >= prev_put);
      CHECK(c.price >= 0.0);
      CHECK(c.price <= p.spot * 1.0 + 3.0 * c.mc_standard_error);
      CHECK(q.price <= k * std::exp(-p.risk_free * t));
      CHECK(c.path_count == 20000);
      prev_call = c.price;
      prev_put = q.price;
    }
  }
  CHECK_THROWS_AS(price_option(paths, OptionKind::Call, -1.0, 1), ValidationError);
  CHECK_THROWS_AS(price_option(paths, OptionKind::Call, 100.0, 9), ValidationError);
  CHECK_THROWS_AS(price_option(p, OptionKind::Call, 100.0, 1, 999, 1), ValidationError);
}

TEST_CASE("constant-volatility benchmark") {
  for (double sigma : {0.15, 0.3}) {
    const auto p = gaussian(sigma, 0.02);
    for (int t : {1, 4}) {
      const auto q = price_option(p, OptionKind::Call, 1.0, t, 100000, 9);
      const double bs = oracle::black_scholes_call(1.0, 1.0, t, 0.02, sigma);
      CHECK(std::abs(q.price / bs - 1.0) < 0.01);
      CHECK(lognormal_price(OptionKind::Call, 1.0, 1.0, t, 0.02, sigma) == doctest::Approx(bs).epsilon(1e-12));
    }
  }
}

TEST_CASE("standard error shrinks with the path count") {
  const auto p = symmetric();
  double prev = 0.0;
  for (std::size_t n : {1000u, 10000u, 100000u}) {
    const auto q = price_option(p, OptionKind::Call, 100.0, 2, n, 13);
    if (prev > 0.0) CHECK(std::abs(prev / q.mc_standard_error / std::sqrt(10.0) - 1.0) < 0.2);
    prev = q.mc_standard_error;
  }
}

TEST_CASE("implied volatility") {
  for (double t : {0.5, 1.0, 7.0})
    for (double k : {0.6, 1.0, 1.4}) {
      const double c = lognormal_price(OptionKind::Call, 1.0, k, t, 0.02, 0.3);
      CHECK(std::abs(implied_vol(OptionKind::Call, c, 1.0, k, t, 0.02) - 0.3) < 1e-6);
      const double q = lognormal_price(OptionKind::Put, 1.0, k, t, 0.02, 0.3);
      CHECK(std::abs(implied_vol(OptionKind::Put, q, 1.0, k, t, 0.02) - 0.3) < 1e-6);
    }
  double prev = -1.0;
  for (double s = 0.01; s <= 5.0; s += 0.01) {
    const double c = lognormal_price(OptionKind::Call, 1.0, 1.1, 2.0, 0.02, s);
    CHECK(c > prev);
    prev = c;
  }
  CHECK(std::isnan(implied_vol(OptionKind::Call, 1.5, 1.0, 1.0, 1.0, 0.02)));
  CHECK(std::isnan(implied_vol(OptionKind::Call, 0.0, 1.0, 0.5, 1.0, 0.02)));

  std::vector<OptionQuote> quotes(2);
  quotes[0].strike = 1.0;
  quotes[0].price = lognormal_price(OptionKind::Call, 1.0, 1.0, 1.0, 0.02, 0.25);
  quotes[1].strike = 1.0;
  quotes[1].price = 2.0;
  const auto surf = implied_vol_surface(quotes, 1.0, 0.02);
  REQUIRE(surf.cells.size() == 2);
  CHECK(surf.cells[0].valid);
  CHECK(surf.cells[0].implied_vol == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(surf.cells[0].moneyness == 1.0);
  CHECK_FALSE(surf.cells[1].valid);
}

TEST_CASE("surface grid") {
  const auto m = default_moneyness_grid();
  const auto t = default_maturities();
  CHECK(m.size() == 11);
  CHECK(m.front() == doctest::Approx(0.5));
  CHECK(m.back() == doctest::Approx(1.5));
  CHECK(t.size() == 16);
  const auto paths = simulate_risk_neutral(gaussian(0.2, 0.02), 16, 20000, 17);
  const auto surf = call_surface(paths, m, t);
  CHECK(surf.cells.size() == m.size() * t.size());
  int checked = 0;
  for (const auto& c : surf.cells) {
    CHECK(c.strike == doctest::Approx(1.0 / c.moneyness));
    // Far out-of-the-money cells rest on a handful of paths, where neither the
    // standard error nor the linearization below means much.
    if (!c.valid || c.mc_standard_error > 0.05 * c.price) continue;
    // Price noise mapped through vega.
    const double h = 1e-4;
    const double vega = (lognormal_price(OptionKind::Call, 1.0, c.strike, c.maturity, 0.02, 0.2 + h) -
                         lognormal_price(OptionKind::Call, 1.0, c.strike, c.maturity, 0.02, 0.2 - h)) /
                        (2.0 * h);
    CHECK(std::abs(c.implied_vol - 0.2) < 3.0 * c.mc_standard_error / vega + 1e-6);
    ++checked;
  }
  CHECK(checked > 150);
}

TEST_CASE("parameter validation") {
  auto p = symmetric();
  p.alpha1 = 0.3;
  p.beta1 = 0.75;
  CHECK_THROWS_AS(p.validate(), DomainError);
  p = symmetric();
  p.spot = 0.0;
  CHECK_THROWS_AS(p.validate(), DomainError);
  CHECK(parse_option_kind("put") == OptionKind::Put);
  CHECK_THROWS_AS(parse_option_kind("straddle"), ValidationError);
}
