#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dwi/error.hpp"
#include "dwi/index.hpp"

using namespace dwi;

namespace {

IndicatorPanel filled(std::size_t countries, std::size_t years, double (*f)(std::size_t, std::size_t, std::size_t)) {
  std::vector<std::string> c;
  for (std::size_t i = 0; i < countries; ++i) c.push_back("C" + std::to_string(i));
  std::vector<int> y;
  for (std::size_t t = 0; t < years; ++t) y.push_back(2000 + static_cast<int>(t));
  IndicatorPanel p(canonical_indicators(), c, y);
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < countries; ++l)
      for (std::size_t t = 0; t < years; ++t) p.set(k, l, t, f(k, l, t));
  return p;
}

double varied(std::size_t k, std::size_t l, std::size_t t) { return 1.0 + k * 3.0 + l * l + 0.5 * t + (k * l) % 3; }

}  // namespace

TEST_CASE("normalization") {
  const auto one = normalize_indicators(filled(1, 3, varied));
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t t = 0; t < 3; ++t) CHECK(one.value(k, 0, t) == 1.0);

  const auto two = normalize_indicators(filled(2, 1, [](std::size_t, std::size_t l, std::size_t) {
    return l == 0 ? 1.0 : 3.0;
  }));
  CHECK(two.value(0, 0, 0) == 0.25);
  CHECK(two.value(0, 1, 0) == 0.75);

  const auto many = normalize_indicators(filled(5, 4, varied));
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t t = 0; t < 4; ++t) {
      double s = 0.0;
      for (std::size_t l = 0; l < 5; ++l) s += many.value(k, l, t);
      CHECK(std::abs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("normalization is invariant to rescaling one indicator") {
  auto p = filled(4, 3, varied);
  auto q = p;
  for (std::size_t l = 0; l < 4; ++l)
    for (std::size_t t = 0; t < 3; ++t) q.set(2, l, t, 7.5 * p.value(2, l, t));
  const auto a = wellbeing_index(normalize_indicators(p)), b = wellbeing_index(normalize_indicators(q));
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("wellbeing index averages the non-GDP indicators") {
  auto fn = filled(9, 1, [](std::size_t, std::size_t, std::size_t) { return 1.0 / 9.0; });
  CHECK(wellbeing_index(fn)(4, 0) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));

  const double vals[] = {0.1, 0.2, 0.1, 0.2, 0.1, 0.2, 0.1};
  const auto gdp = fn.indicator_index("gdp");
  std::size_t i = 0;
  for (std::size_t k = 0; k < 8; ++k)
    if (k != gdp) fn.set(k, 0, 0, vals[i++]);
  fn.set(gdp, 0, 0, 0.9);
  CHECK(wellbeing_index(fn)(0, 0) == doctest::Approx(1.0 / 7.0).epsilon(1e-14));

  const auto wi = wellbeing_index(normalize_indicators(filled(6, 5, varied)));
  CHECK(wi.minCoeff() > 0.0);
  CHECK(wi.maxCoeff() < 1.0);
}

TEST_CASE("dollar index") {
  Eigen::MatrixXd wi(1, 1), g(1, 1);
  wi << 0.1;
  g << 50000.0;
  CHECK(dollar_index(wi, g).per_country(0, 0) == doctest::Approx(5000.0).epsilon(1e-15));

  Eigen::MatrixXd wi3 = Eigen::MatrixXd::Constant(3, 2, 0.2), g3 = Eigen::MatrixXd::Constant(3, 2, 1000.0);
  const auto same = dollar_index(wi3, g3);
  CHECK(same.global(1) == doctest::Approx(same.per_country(2, 1)).epsilon(1e-15));

  wi3(0, 0) = 0.3;
  g3(1, 0) = 4000.0;
  const auto mixed = dollar_index(wi3, g3);
  CHECK(mixed.global(0) >= mixed.per_country.col(0).minCoeff());
  CHECK(mixed.global(0) <= mixed.per_country.col(0).maxCoeff());

  g3(2, 1) = -1.0;
  CHECK_THROWS_AS(dollar_index(wi3, g3), DomainError);
}

TEST_CASE("exponential transform closed form") {
  Eigen::MatrixXd d(1, 2);
  d << 0.0, std::log(2.0);
  const auto f = fit_exponential_transform(d, 0.5);
  CHECK(f.b == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(f.a == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f(0.0) == 0.5);
  CHECK(f(std::log(2.0)) == 1.0);
  double prev = 0.0;
  for (int i = 0; i <= 100; ++i) {
    const double v = f(std::log(2.0) * i / 100.0);
    CHECK(v > prev);
    prev = v;
  }
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(2, 3, 4.0);
  CHECK_THROWS_AS(fit_exponential_transform(flat, 0.5), ValidationError);
}

TEST_CASE("log returns") {
  Eigen::MatrixXd v(3, 4);
  v << 2, 2, 2, 2,  //
      0.5, 1.0, 0.8, 0.9,  //
      0.3, 0.1, 0.7, 0.2;
  const auto r = log_returns(v);
  CHECK(r.row(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r(1, 0) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(std::abs(r.row(2).sum() - std::log(0.2 / 0.3)) < 1e-12);
  // Cumulative exponentiation rebuilds the series.
  double x = v(2, 0);
  for (int t = 0; t < 3; ++t) {
    x *= std::exp(r(2, t));
    CHECK(std::abs(x - v(2, t + 1)) < 1e-10);
  }
  v(1, 2) = 0.0;
  CHECK_THROWS_AS(log_returns(v), DomainError);
}

TEST_CASE("build_index on a synthetic panel") {
  const auto s = build_index(filled(4, 6, varied), 0.01);
  CHECK(s.labels.back() == "global");
  CHECK(s.asset_values.rows() == 5);
  CHECK(s.asset_values.maxCoeff() == 1.0);
  CHECK(s.asset_values.minCoeff() == 0.01);
  CHECK(s.log_returns.cols() == 5);
  for (Eigen::Index t = 0; t < 6; ++t) {
    Eigen::Index a, b;
    s.per_country_dwi.col(t).maxCoeff(&a);
    s.asset_values.topRows(4).col(t).maxCoeff(&b);
    CHECK(a == b);
  }
}
