#include "dwi/scenario.hpp"

#include <cmath>
#include <sstream>

#include "dwi/csv.hpp"
#include "dwi/error.hpp"

namespace dwi {

std::string describe_model(const FittedVolModel& m) {
  std::ostringstream os;
  os << family_name(m.family) << " " << kMeanFamily << " phi0=" << csv::format_number(m.mean.phi0)
     << " theta1=" << csv::format_number(m.mean.theta1) << " alpha0=" << csv::format_number(m.vol.alpha0)
     << " alpha1=" << csv::format_number(m.vol.alpha1);
  if (m.family != VolFamily::Arch1) os << " beta1=" << csv::format_number(m.vol.beta1);
  if (m.family == VolFamily::Egarch11) os << " leverage=" << csv::format_number(m.vol.leverage);
  return os.str();
}

ScenarioMatrix forecast_year(const std::vector<FittedVolModel>& models, const std::vector<std::string>& labels,
                             const MvNigParams& innovations, std::size_t s_count, std::uint64_t seed,
                             unsigned threads) {
  const auto d = static_cast<std::size_t>(innovations.dim());
  if (models.size() != d || labels.size() != d)
    throw ValidationError("forecast_year: " + std::to_string(models.size()) + " models and " +
                          std::to_string(labels.size()) + " labels for a " + std::to_string(d) +
                          "-dimensional innovation law");
  if (s_count < 1) throw ValidationError("forecast_year: scenario count must be positive");
  ScenarioMatrix out;
  out.labels = labels;
  out.seed = seed;
  out.returns = mvnig_sample(innovations, s_count, seed, threads);
  for (std::size_t j = 0; j < d; ++j) {
    const double mean = models[j].forecast_mean();
    const double sd = std::sqrt(models[j].forecast_variance());
    if (!std::isfinite(mean) || !std::isfinite(sd)) throw NumericalError("forecast_year: non-finite forecast for " + labels[j]);
    out.returns.col(static_cast<Eigen::Index>(j)) = (mean + sd * out.returns.col(static_cast<Eigen::Index>(j)).array()).matrix();
    out.provenance.push_back(describe_model(models[j]));
  }
  if (!out.returns.allFinite()) throw NumericalError("forecast_year: non-finite scenario values");
  return out;
}

}  // namespace dwi
