#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dwi/ingest.hpp"

namespace dwi {

// FN(k,l,t) = F(k,l,t) / sum_l F(k,l,t). Requires a complete, positive panel.
IndicatorPanel normalize_indicators(const IndicatorPanel& panel);

// Mean of the normalized indicators excluding `excluded` (GDP). L x T.
Eigen::MatrixXd wellbeing_index(const IndicatorPanel& normalized, const std::string& excluded = "gdp");

// GDP / population, L x T.
Eigen::MatrixXd gdp_per_capita(const IndicatorPanel& panel);

struct DollarIndex {
  Eigen::MatrixXd per_country;  // L x T
  Eigen::VectorXd global;       // T
};

DollarIndex dollar_index(const Eigen::MatrixXd& wi, const Eigen::MatrixXd& gdp_pc);

// f(x) = a * exp(b x), pinned so that f(min) = eps_low and f(max) = 1.
struct ExpTransform {
  double a = 0.0;
  double b = 0.0;
  double eps_low = 0.0;
  double lo = 0.0;
  double hi = 0.0;

  // Evaluated as eps_low^((hi - x) / (hi - lo)), which equals a*exp(b*x) but
  // lands on eps_low and 1 exactly at the two ends.
  double operator()(double x) const;
};

ExpTransform fit_exponential_transform(const Eigen::MatrixXd& all_dwi, double eps_low);

// Row-wise ln(v_t / v_{t-1}); input rows are series, columns are years.
Eigen::MatrixXd log_returns(const Eigen::MatrixXd& asset_values);

struct IndexSeries {
  std::vector<std::string> labels;  // countries followed by "global"
  std::vector<int> years;
  Eigen::MatrixXd wi;               // L x T
  Eigen::MatrixXd per_country_dwi;  // L x T
  Eigen::VectorXd global_dwi;       // T
  ExpTransform transform;
  Eigen::MatrixXd asset_values;     // (L+1) x T, global last
  Eigen::MatrixXd log_returns;      // (L+1) x (T-1)
};

IndexSeries build_index(const IndicatorPanel& positive_panel, double eps_low = 0.001);

}  // namespace dwi
