#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dwi {

enum class VolFamily { Arch1, Garch11, Egarch11 };

std::string family_name(VolFamily f);
VolFamily parse_family(const std::string& name);
// The mean equation R_t = phi0 + z_t + theta1 z_{t-1} carries a lagged shock,
// i.e. an MA(1) term.
inline constexpr const char* kMeanFamily = "MA1-mean";

struct MeanParams {
  double phi0 = 0.0;
  double theta1 = 0.0;
};

// ARCH1:   s2_t = alpha0 + alpha1 z_{t-1}^2
// GARCH11: s2_t = alpha0 + alpha1 z_{t-1}^2 + beta1 s2_{t-1}
// EGARCH11: ln s2_t = alpha0 + alpha1 (|e_{t-1}| - sqrt(2/pi)) + leverage e_{t-1} + beta1 ln s2_{t-1}
struct VolParams {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double beta1 = 0.0;
  double leverage = 0.0;
};

// Shock z and conditional variance of the most recent period.
struct FilterState {
  double z = 0.0;
  double sigma2 = 1.0;
};

double next_variance(VolFamily family, const VolParams& vol, const FilterState& prev);

struct FilterOutput {
  std::vector<double> residuals;  // standardized e_t = z_t / s_t
  std::vector<double> shocks;     // z_t
  std::vector<double> cond_var;   // s2_t
  double loglik = 0.0;
  FilterState terminal;
};

FilterOutput filter_series(std::span<const double> series, VolFamily family, const MeanParams& mean,
                           const VolParams& vol, const FilterState& init);

struct FittedVolModel {
  VolFamily family = VolFamily::Garch11;
  MeanParams mean;
  VolParams vol;
  double loglik = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  int n_obs = 0;
  int n_params = 0;
  std::vector<double> residuals;
  std::vector<double> cond_var;
  FilterState initial;
  FilterState terminal;
  double grad_norm = 0.0;
  std::vector<std::string> warnings;

  // One-step-ahead conditional mean and variance from the terminal state.
  double forecast_mean() const { return mean.phi0 + mean.theta1 * terminal.z; }
  double forecast_variance() const { return next_variance(family, vol, terminal); }
};

int parameter_count(VolFamily family);

// Gaussian MLE of the mean and variance equations. Starts from sigma0^2 = sample
// variance and z0 = 0.
FittedVolModel fit_mean_vol(std::span<const double> series, VolFamily family);

// Recursion driven by given standardized innovations; identical inputs give an
// identical path.
std::vector<double> simulate_path(const FittedVolModel& model, std::span<const double> innovations,
                                  const FilterState& init);

struct ModelSelection {
  FittedVolModel selected;
  std::vector<FittedVolModel> candidates;  // successful fits, in family order
  std::vector<std::string> failures;
};

struct InformationCriteria {
  double aic;
  double bic;
};

// Index of the preferred entry: minimal AIC, then minimal BIC, then position.
std::size_t select_by_criteria(std::span<const InformationCriteria> entries);

ModelSelection select_model(std::span<const double> series);

}  // namespace dwi
