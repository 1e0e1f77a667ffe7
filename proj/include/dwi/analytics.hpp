#pragma once

#include <span>
#include <string>
#include <vector>

namespace dwi {

enum class RegressionMethod { Ols, Robust };

struct RegressionFit {
  RegressionMethod method = RegressionMethod::Ols;
  double intercept = 0.0;
  double slope = 0.0;
  double se_intercept = 0.0;
  double se_slope = 0.0;
  double p_intercept = 1.0;
  double p_slope = 1.0;
  double rmse = 0.0;
  std::vector<double> weights;  // robust fits only
  int iterations = 0;
  bool converged = true;
  std::vector<std::string> warnings;
};

// y = a + b x by least squares; p-values from Student t with n-2 df.
RegressionFit ols(std::span<const double> y, std::span<const double> x);

struct RobustOptions {
  double tuning = 4.685;  // bisquare constant
  int max_iter = 100;
  double tol = 1e-10;
};

// IRLS with Tukey bisquare weights; scale is the normalized MAD of the current
// residuals, re-estimated each iteration.
RegressionFit robust_regression(std::span<const double> y, std::span<const double> x, const RobustOptions& opt = {});

struct JensenAlpha {
  double alpha = 0.0;
  double beta = 0.0;
  double risk_free = 0.0;
};

JensenAlpha jensen_alpha(std::span<const double> asset, std::span<const double> market, double risk_free = 0.0);

}  // namespace dwi
