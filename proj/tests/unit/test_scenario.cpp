#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "../support/oracles.hpp"
#include "dwi/error.hpp"
#include "dwi/scenario.hpp"

using namespace dwi;

namespace {

MvNigParams innovations(int d, double rho) {
  MvNigParams p;
  p.alpha = 1.8;
  p.delta = 1.0;
  p.beta = Eigen::VectorXd::Zero(d);
  p.mu = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd s(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) s(i, j) = std::pow(rho, std::abs(i - j));
  p.structure = s / std::pow(s.determinant(), 1.0 / d);
  return p;
}

FittedVolModel unit_model() {
  FittedVolModel m;
  m.family = VolFamily::Garch11;
  m.vol = {1.0, 0.0, 0.0, 0.0};
  return m;
}

std::vector<std::string> labels(int d) {
  std::vector<std::string> out;
  for (int i = 0; i < d; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

double corr(const Eigen::MatrixXd& m, int a, int b) {
  const Eigen::VectorXd x = m.col(a).array() - m.col(a).mean();
  const Eigen::VectorXd y = m.col(b).array() - m.col(b).mean();
  return x.dot(y) / std::sqrt(x.squaredNorm() * y.squaredNorm());
}

}  // namespace

TEST_CASE("unit models pass innovations through") {
  const auto inn = innovations(3, 0.5);
  const std::vector<FittedVolModel> models(3, unit_model());
  const auto sc = forecast_year(models, labels(3), inn, 2000, 17);
  const auto raw = mvnig_sample(inn, 2000, 17);
  CHECK(sc.returns.rows() == 2000);
  CHECK((sc.returns - raw).cwiseAbs().maxCoeff() == 0.0);
  CHECK(sc.provenance.size() == 3);
  CHECK(sc.seed == 17);
}

TEST_CASE("same seed gives identical scenarios regardless of threads") {
  const auto inn = innovations(4, 0.3);
  std::vector<FittedVolModel> models(4, unit_model());
  models[1].mean = {0.02, -0.4};
  models[1].terminal = {0.3, 0.5};
  models[2].vol = {0.1, 0.2, 0.6, 0.0};
  models[2].terminal = {-0.2, 0.4};
  const auto a = forecast_year(models, labels(4), inn, 5000, 99, 1);
  const auto b = forecast_year(models, labels(4), inn, 5000, 99, 1);
  const auto c = forecast_year(models, labels(4), inn, 5000, 99, 4);
  CHECK(a.returns == b.returns);
  CHECK(a.returns == c.returns);
  CHECK(a.returns.allFinite());
}

TEST_CASE("scenario correlations follow the structure matrix") {
  const int d = 5;
  MvNigParams inn = innovations(d, 0.85);
  Eigen::MatrixXd s(d, d);
  s << 1.0, 0.8, 0.5, 0.1, -0.4,
       0.8, 1.0, 0.6, 0.3, -0.2,
       0.5, 0.6, 1.0, 0.7, 0.2,
       0.1, 0.3, 0.7, 1.0, 0.45,
       -0.4, -0.2, 0.2, 0.45, 1.0;
  REQUIRE(s.determinant() > 0.0);
  inn.structure = s / std::pow(s.determinant(), 1.0 / d);
  inn.validate();
  std::vector<FittedVolModel> models(d, unit_model());
  for (int j = 0; j < d; ++j) models[static_cast<std::size_t>(j)].vol.alpha0 = 0.5 + 0.3 * j;
  const auto sc = forecast_year(models, labels(d), inn, 10000, 5);
  std::vector<double> target, observed;
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      target.push_back(inn.structure(i, j) / std::sqrt(inn.structure(i, i) * inn.structure(j, j)));
      observed.push_back(corr(sc.returns, i, j));
    }
  CHECK(oracle::kendall_tau(target, observed) > 0.9);
}

TEST_CASE("column means approach the one-step conditional mean") {
  const auto inn = innovations(2, 0.2);
  FittedVolModel m;
  m.family = VolFamily::Garch11;
  m.mean = {0.03, 0.4};
  m.vol = {0.02, 0.1, 0.8, 0.0};
  m.terminal = {0.25, 0.09};
  const std::vector<FittedVolModel> models{m, unit_model()};
  const std::size_t s = 200000;
  const auto sc = forecast_year(models, labels(2), inn, s, 8);
  const double target = 0.03 + 0.4 * 0.25;
  const double sd = std::sqrt((0.02 + 0.1 * 0.25 * 0.25 + 0.8 * 0.09) * inn.marginal(0).variance());
  CHECK(std::abs(sc.returns.col(0).mean() - target) < 3.0 * sd / std::sqrt(static_cast<double>(s)));
  CHECK(std::abs(sc.returns.col(1).mean()) < 3.0 * std::sqrt(inn.marginal(1).variance() / static_cast<double>(s)));
}

TEST_CASE("dimension mismatch is rejected") {
  const auto inn = innovations(3, 0.1);
  const std::vector<FittedVolModel> two(2, unit_model());
  CHECK_THROWS_AS(forecast_year(two, labels(2), inn, 10, 1), ValidationError);
  const std::vector<FittedVolModel> three(3, unit_model());
  CHECK_THROWS_AS(forecast_year(three, labels(3), inn, 0, 1), ValidationError);
}
