#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "../support/fixtures.hpp"
#include "dwi/csv.hpp"
#include "dwi/error.hpp"
#include "dwi/ingest.hpp"

using namespace dwi;

namespace {

const std::vector<std::string> kNine = {"USA", "AUS", "BRA", "CHN", "DEU", "IND", "JPN", "ZAF", "GBR"};

IndicatorPanel synthetic_panel(std::size_t countries, std::size_t years) {
  std::vector<std::string> c;
  for (std::size_t i = 0; i < countries; ++i) c.push_back("C" + std::to_string(i));
  std::vector<int> y;
  for (std::size_t t = 0; t < years; ++t) y.push_back(2000 + static_cast<int>(t));
  return IndicatorPanel(canonical_indicators(), c, y);
}

}  // namespace

TEST_CASE("csv records and numbers") {
  const auto f = csv::split_record(R"("a,b",c,"say ""hi""",)");
  REQUIRE(f.size() == 4);
  CHECK(f[0] == "a,b");
  CHECK(f[2] == "say \"hi\"");
  CHECK(f[3].empty());
  CHECK(csv::parse_number("1.25").value() == 1.25);
  CHECK_FALSE(csv::parse_number("1.2x"));
  CHECK_FALSE(csv::parse_number(""));
  CHECK(csv::format_number(std::nan("")) == "NA");
  const double v = 0.1 + 0.2;
  CHECK(csv::parse_number(csv::format_number(v)).value() == v);
}

TEST_CASE("complete 9 x 8 x 31 input loads with no missing cells") {
  const auto dir = fixture::temp_dir("complete");
  const auto man = fixture::write_dataset(dir, kNine, 1990, 2020, fixture::plausible);
  const auto p = load_panel(man);
  CHECK(p.num_countries() == 9);
  CHECK(p.num_indicators() == 8);
  CHECK(p.num_years() == 31);
  CHECK(p.missing_count() == 0);
  CHECK(p.value(3, 2, 5) == doctest::Approx(std::stod(fixture::plausible(3, 2, 1995))));
}

TEST_CASE("one blank cell is flagged at exactly that cell") {
  const auto dir = fixture::temp_dir("hole");
  const auto man = fixture::write_dataset(dir, {"AAA", "BBB"}, 2000, 2010, [](int k, int l, int y) {
    return (k == 4 && l == 1 && y == 2003) ? std::string() : fixture::plausible(k, l, y);
  });
  const auto p = load_panel(man);
  CHECK(p.missing_count() == 1);
  CHECK(p.missing(4, 1, 3));
}

TEST_CASE("bad year header is a parse error naming the cell") {
  const auto dir = fixture::temp_dir("badyear");
  const auto man = fixture::write_dataset(dir, {"AAA"}, 1990, 1995, fixture::plausible, "19x0");
  try {
    load_panel(man);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.row() == 3);
    CHECK(e.column() == 5);
    CHECK(std::string(e.what()).find("19x0") != std::string::npos);
  }
}

TEST_CASE("unknown indicator name in the manifest is a schema error") {
  const auto dir = fixture::temp_dir("schema");
  fixture::write_dataset(dir, {"AAA"}, 1990, 1995, fixture::plausible);
  std::ofstream(dir / "manifest.ini", std::ios::app) << "happiness = XX.HAP\n";
  CHECK_THROWS_AS(load_manifest(dir / "manifest.ini"), SchemaError);
}

TEST_CASE("bundled data loads") {
  const auto p = load_panel(std::filesystem::path(DWI_DATA_DIR) / "manifest.ini");
  CHECK(p.num_countries() == 9);
  CHECK(p.num_years() == 31);
  CHECK(p.countries().front() == "USA");
}

TEST_CASE("positivity transform") {
  auto p = synthetic_panel(2, 1);
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < 2; ++l) p.set(k, l, 0, 10.0);
  const auto gini = p.indicator_index("gini"), unemp = p.indicator_index("unemployment");
  p.set(gini, 0, 0, 0.0);
  p.set(gini, 1, 0, 41.5);
  const auto t = transform_positive(p);
  CHECK(t.value(gini, 0, 0) == 100.0);
  CHECK(t.value(gini, 1, 0) == doctest::Approx(58.5).epsilon(1e-15));
  CHECK(t.value(unemp, 0, 0) == 90.0);
  CHECK(t.display_name(gini) == "neg_gini");
  CHECK(t.display_name(unemp) == "employment");
  // Involution on the two transformed indicators.
  const auto back = transform_positive(t);
  CHECK(back.value(gini, 1, 0) == doctest::Approx(41.5).epsilon(1e-15));
  CHECK(back.value(unemp, 1, 0) == 10.0);

  p.set(unemp, 1, 0, 100.0);
  try {
    transform_positive(p);
    FAIL("expected a domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("C1") != std::string::npos);
    CHECK(std::string(e.what()).find("2000") != std::string::npos);
  }
}

TEST_CASE("imputation leaves a complete panel unchanged") {
  auto p = synthetic_panel(3, 6);
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < 3; ++l)
      for (std::size_t t = 0; t < 6; ++t) p.set(k, l, t, 1.0 + k + 0.1 * l + 0.01 * t * t);
  const auto r = impute_missing(p);
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < 3; ++l)
      for (std::size_t t = 0; t < 6; ++t) CHECK(r.panel.value(k, l, t) == p.value(k, l, t));
  CHECK(r.converged);
}

TEST_CASE("rank-1 panel with one deleted cell is recovered") {
  auto p = synthetic_panel(4, 8);
  std::vector<double> u(8), v(32);
  for (std::size_t k = 0; k < 8; ++k) u[k] = 1.0 + 0.7 * k;
  for (std::size_t j = 0; j < 32; ++j) v[j] = 2.0 + std::sin(0.3 * j);
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < 4; ++l)
      for (std::size_t t = 0; t < 8; ++t) p.set(k, l, t, u[k] * v[l * 8 + t]);
  const double truth = p.value(5, 2, 3);
  p.set_missing(5, 2, 3);
  const auto r = impute_missing(p, {1, 1e-14, 20000});
  CHECK(std::abs(r.panel.value(5, 2, 3) - truth) / truth < 1e-8);
  CHECK(r.panel.missing(5, 2, 3));  // provenance retained
}

TEST_CASE("rank-2 panel with 5% of cells deleted is recovered") {
  auto p = synthetic_panel(9, 31);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(0.5, 1.5);
  Eigen::MatrixXd A(8, 2), B(2, 9 * 31);
  for (int i = 0; i < A.size(); ++i) A.data()[i] = U(gen);
  for (int i = 0; i < B.size(); ++i) B.data()[i] = U(gen);
  const Eigen::MatrixXd M = A * B;
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < 9; ++l)
      for (std::size_t t = 0; t < 31; ++t)
        p.set(k, l, t, M(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l * 31 + t)));
  std::uniform_int_distribution<std::size_t> K(0, 7), L(0, 8), T(0, 30);
  const std::size_t target = 8 * 9 * 31 / 20;
  while (p.missing_count() < target) p.set_missing(K(gen), L(gen), T(gen));
  const auto r = impute_missing(p, {2, 1e-14, 20000});
  double err = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < 9; ++l)
      for (std::size_t t = 0; t < 31; ++t) {
        const double truth = M(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l * 31 + t));
        if (p.missing(k, l, t)) {
          err += std::abs(r.panel.value(k, l, t) - truth) / truth;
          ++n;
        } else {
          CHECK(r.panel.value(k, l, t) == p.value(k, l, t));  // observed cells untouched
        }
      }
  CHECK(n == target);
  CHECK(err / static_cast<double>(n) < 1e-6);
}

TEST_CASE("an all-missing series cannot be imputed") {
  auto p = synthetic_panel(2, 5);
  for (std::size_t k = 0; k < 8; ++k)
    for (std::size_t l = 0; l < 2; ++l)
      for (std::size_t t = 0; t < 5; ++t) p.set(k, l, t, 1.0 + k + l + t);
  for (std::size_t t = 0; t < 5; ++t) p.set_missing(2, 1, t);
  CHECK_THROWS_AS(impute_missing(p), ValidationError);
}
