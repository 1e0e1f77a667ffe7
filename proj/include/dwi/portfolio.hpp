#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dwi {

enum class RiskMeasure { Variance, Cvar95, Cvar99 };

std::string measure_name(RiskMeasure m);  // "variance", "cvar95", "cvar99"
RiskMeasure parse_measure(const std::string& name);
double measure_alpha(RiskMeasure m);      // 0.05 / 0.01; NaN for variance

struct PortfolioConstraints {
  bool allow_short = false;
};

struct FrontierPoint {
  double gamma = 0.0;
  Eigen::VectorXd weights;
  double expected_return = 0.0;
  double risk = 0.0;       // standard deviation, or CVaR at the measure's level
  double objective = 0.0;  // gamma * E - (1 - gamma) * risk term being optimized
  std::vector<std::string> warnings;
};

// Rockafellar-Uryasev CVaR: mean loss over the worst alpha*S scenarios,
// counting a fractional scenario when alpha*S is not an integer.
double scenario_cvar(std::span<const double> portfolio_returns, double alpha);

// Maximizes gamma * mean'w - (1 - gamma) * w'Sigma w with sum(w) = 1 and,
// unless shorting is allowed, w >= 0. Rows of `returns` are scenarios.
FrontierPoint mean_variance_point(const Eigen::MatrixXd& returns, double gamma, const PortfolioConstraints& c = {});

// Maximizes gamma * mean'w - (1 - gamma) * CVaR_alpha(R w) through the dual of
// the scenario linear program. `warm` is a previous solution used to choose
// the starting basis.
FrontierPoint mean_cvar_point(const Eigen::MatrixXd& returns, double gamma, double alpha,
                              const PortfolioConstraints& c = {}, const Eigen::VectorXd* warm = nullptr);

struct FrontierTrace {
  RiskMeasure measure = RiskMeasure::Variance;
  std::vector<std::string> universe;
  bool allow_short = false;
  std::vector<FrontierPoint> points;
};

std::vector<double> default_gamma_grid();  // 0, 0.01, ..., 0.99

FrontierTrace trace_frontier(const Eigen::MatrixXd& returns, const std::vector<std::string>& universe,
                             RiskMeasure measure, const std::vector<double>& gammas, const PortfolioConstraints& c = {});

// Linear interpolation of risk at a given expected return along a trace;
// nullopt outside the trace's return range.
std::optional<double> frontier_risk_at(const FrontierTrace& trace, double expected_return);

// Euclidean projection onto {w : w >= 0, sum w = 1}.
Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v);

}  // namespace dwi
