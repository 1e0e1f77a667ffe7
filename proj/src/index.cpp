#include "dwi/index.hpp"

#include <cmath>

#include "dwi/error.hpp"

namespace dwi {

IndicatorPanel normalize_indicators(const IndicatorPanel& panel) {
  IndicatorPanel out = panel;
  const std::size_t K = panel.num_indicators(), L = panel.num_countries(), T = panel.num_years();
  for (std::size_t k = 0; k < K; ++k)
    for (std::size_t t = 0; t < T; ++t) {
      double sum = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        if (!panel.has_value(k, l, t))
          throw ValidationError("normalize: " + panel.indicators()[k] + " for " + panel.countries()[l] + " in " +
                                std::to_string(panel.years()[t]) + " is missing; impute first");
        const double v = panel.value(k, l, t);
        if (!(v > 0.0))
          throw DomainError("normalize: " + panel.display_name(k) + " for " + panel.countries()[l] + " in " +
                            std::to_string(panel.years()[t]) + " is not strictly positive");
        sum += v;
      }
      for (std::size_t l = 0; l < L; ++l) out.set(k, l, t, panel.value(k, l, t) / sum);
    }
  return out;
}

Eigen::MatrixXd wellbeing_index(const IndicatorPanel& fn, const std::string& excluded) {
  const std::size_t K = fn.num_indicators(), L = fn.num_countries(), T = fn.num_years();
  if (K < 2) throw ValidationError("wellbeing index needs at least 2 indicators, got " + std::to_string(K));
  const std::size_t skip = fn.indicator_index(excluded);
  Eigen::MatrixXd wi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(T));
  for (std::size_t k = 0; k < K; ++k) {
    if (k == skip) continue;
    for (std::size_t l = 0; l < L; ++l)
      for (std::size_t t = 0; t < T; ++t)
        wi(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(t)) += fn.value(k, l, t);
  }
  return wi / static_cast<double>(K - 1);
}

Eigen::MatrixXd gdp_per_capita(const IndicatorPanel& panel) {
  const std::size_t g = panel.indicator_index("gdp"), p = panel.indicator_index("population");
  const std::size_t L = panel.num_countries(), T = panel.num_years();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(T));
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t t = 0; t < T; ++t) {
      const double pop = panel.value(p, l, t);
      if (!(pop > 0.0))
        throw DomainError("population for " + panel.countries()[l] + " in " + std::to_string(panel.years()[t]) +
                          " is not positive");
      out(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(t)) = panel.value(g, l, t) / pop;
    }
  return out;
}

DollarIndex dollar_index(const Eigen::MatrixXd& wi, const Eigen::MatrixXd& gdp_pc) {
  if (wi.rows() != gdp_pc.rows() || wi.cols() != gdp_pc.cols())
    throw ValidationError("dollar_index: WI and GDP per capita shapes differ");
  if (wi.rows() == 0) throw ValidationError("dollar_index: no countries");
  for (Eigen::Index l = 0; l < gdp_pc.rows(); ++l)
    for (Eigen::Index t = 0; t < gdp_pc.cols(); ++t)
      if (!(gdp_pc(l, t) > 0.0))
        throw DomainError("GDP per capita is not positive at country " + std::to_string(l) + ", year index " +
                          std::to_string(t));
  DollarIndex out;
  out.per_country = wi.cwiseProduct(gdp_pc);
  out.global = out.per_country.colwise().mean().transpose();
  return out;
}

double ExpTransform::operator()(double x) const { return std::pow(eps_low, (hi - x) / (hi - lo)); }

ExpTransform fit_exponential_transform(const Eigen::MatrixXd& all_dwi, double eps_low) {
  if (!(eps_low > 0.0 && eps_low < 1.0)) throw ValidationError("eps_low must lie in (0, 1)");
  if (all_dwi.size() == 0) throw ValidationError("exponential transform: empty input");
  ExpTransform f;
  f.eps_low = eps_low;
  f.lo = all_dwi.minCoeff();
  f.hi = all_dwi.maxCoeff();
  if (!(f.hi > f.lo)) throw DomainError("exponential transform: degenerate range (min == max)");
  f.b = std::log(1.0 / eps_low) / (f.hi - f.lo);
  f.a = std::exp(-f.b * f.hi);
  return f;
}

Eigen::MatrixXd log_returns(const Eigen::MatrixXd& v) {
  if (v.cols() < 2) throw ValidationError("log_returns: need at least two periods");
  if ((v.array() <= 0.0).any()) throw DomainError("log_returns: asset values must be strictly positive");
  Eigen::MatrixXd r(v.rows(), v.cols() - 1);
  for (Eigen::Index i = 0; i < v.rows(); ++i)
    for (Eigen::Index t = 1; t < v.cols(); ++t) r(i, t - 1) = std::log(v(i, t) / v(i, t - 1));
  return r;
}

IndexSeries build_index(const IndicatorPanel& panel, double eps_low) {
  IndexSeries s;
  s.labels = panel.countries();
  s.labels.push_back("global");
  s.years = panel.years();
  s.wi = wellbeing_index(normalize_indicators(panel));
  auto d = dollar_index(s.wi, gdp_per_capita(panel));
  s.per_country_dwi = std::move(d.per_country);
  s.global_dwi = std::move(d.global);

  const Eigen::Index L = s.per_country_dwi.rows(), T = s.per_country_dwi.cols();
  Eigen::MatrixXd all(L + 1, T);
  all.topRows(L) = s.per_country_dwi;
  all.row(L) = s.global_dwi.transpose();
  s.transform = fit_exponential_transform(all, eps_low);
  s.asset_values = all.unaryExpr([&](double x) { return s.transform(x); });
  s.log_returns = log_returns(s.asset_values);
  return s;
}

}  // namespace dwi
