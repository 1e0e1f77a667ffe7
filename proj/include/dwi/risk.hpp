#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dwi {

// Empirical quantile convention: with x sorted ascending, VaR_a = -x_(k) where
// k = floor(n a) + 1 is the first order statistic whose empirical CDF exceeds a.
// Tail means include every observation tied with the threshold.
double value_at_risk(std::span<const double> sample, double alpha);
double cvar(std::span<const double> sample, double alpha);

struct Estimate {
  double value = 0.0;
  std::size_t tail_size = 0;  // observations the estimate is averaged or ranked over
  bool warning = false;
  std::string note;
};

// Tail-conditional measures of y given x in its own alpha-tail.
Estimate covar(std::span<const double> y, std::span<const double> x, double alpha);
Estimate coes(std::span<const double> y, std::span<const double> x, double alpha);
Estimate coetl(std::span<const double> y, std::span<const double> x, double alpha);

double pearson(std::span<const double> y, std::span<const double> x);

inline constexpr std::size_t kMinConditioningSet = 10;

struct RiskRow {
  std::string series;
  double pearson_r = 0.0;
  std::vector<double> var, cvar;                // one entry per alpha
  std::vector<Estimate> covar, coes;            // one entry per alpha
  std::vector<std::optional<Estimate>> coetl;   // empty joint tail -> nullopt
};

struct RiskReport {
  std::string kind;  // "historical" or "dynamic"
  std::size_t sample_size = 0;
  std::vector<double> alphas;
  std::vector<RiskRow> rows;
};

// Columns of `returns` are series; every column except `market` is measured
// against column `market`.
RiskReport risk_report(const Eigen::MatrixXd& returns, const std::vector<std::string>& labels, Eigen::Index market,
                       const std::string& kind, const std::vector<double>& alphas);

// "95" for alpha = 0.05.
std::string confidence_label(double alpha);

}  // namespace dwi
