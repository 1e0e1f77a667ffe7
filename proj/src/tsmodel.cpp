#include "dwi/tsmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dwi/error.hpp"
#include "dwi/optim.hpp"

namespace dwi {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;
const double kAbsMean = std::sqrt(2.0 / std::numbers::pi);

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

struct Unpacked {
  MeanParams mean;
  VolParams vol;
};

Unpacked unpack(VolFamily family, const Eigen::VectorXd& u) {
  Unpacked p;
  p.mean.phi0 = u(0);
  p.mean.theta1 = std::tanh(u(1));
  switch (family) {
    case VolFamily::Arch1:
      p.vol.alpha0 = std::exp(u(2));
      p.vol.alpha1 = logistic(u(3));
      break;
    case VolFamily::Garch11: {
      p.vol.alpha0 = std::exp(u(2));
      const double s = logistic(u(3)), w = logistic(u(4));
      p.vol.alpha1 = s * w;
      p.vol.beta1 = s * (1.0 - w);
      break;
    }
    case VolFamily::Egarch11:
      p.vol.alpha0 = u(2);
      p.vol.alpha1 = u(3);
      p.vol.leverage = u(4);
      p.vol.beta1 = std::tanh(u(5));
      break;
  }
  return p;
}

Eigen::VectorXd pack(VolFamily family, const MeanParams& m, const VolParams& v) {
  Eigen::VectorXd u(parameter_count(family));
  u(0) = m.phi0;
  u(1) = std::atanh(std::clamp(m.theta1, -0.999, 0.999));
  switch (family) {
    case VolFamily::Arch1:
      u(2) = std::log(v.alpha0);
      u(3) = logit(std::clamp(v.alpha1, 1e-6, 1.0 - 1e-6));
      break;
    case VolFamily::Garch11: {
      const double s = std::clamp(v.alpha1 + v.beta1, 1e-6, 1.0 - 1e-6);
      u(2) = std::log(v.alpha0);
      u(3) = logit(s);
      u(4) = logit(std::clamp(v.alpha1 / (v.alpha1 + v.beta1), 1e-6, 1.0 - 1e-6));
      break;
    }
    case VolFamily::Egarch11:
      u(2) = v.alpha0;
      u(3) = v.alpha1;
      u(4) = v.leverage;
      u(5) = std::atanh(std::clamp(v.beta1, -0.999, 0.999));
      break;
  }
  return u;
}

double sample_variance(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

// Negative Gaussian log-likelihood without building the output vectors.
double neg_loglik(std::span<const double> y, VolFamily family, const MeanParams& m, const VolParams& v,
                  const FilterState& init) {
  FilterState st = init;
  double nll = 0.0;
  for (double r : y) {
    const double s2 = next_variance(family, v, st);
    if (!(s2 > 0.0) || !std::isfinite(s2)) return std::numeric_limits<double>::infinity();
    const double z = r - m.phi0 - m.theta1 * st.z;
    nll += 0.5 * (kLog2Pi + std::log(s2) + z * z / s2);
    st = {z, s2};
  }
  return std::isfinite(nll) ? nll : std::numeric_limits<double>::infinity();
}

std::vector<Eigen::VectorXd> starting_points(VolFamily family, double mean, double var) {
  static const double thetas[5] = {0.0, -0.2, 0.2, 0.1, -0.1};
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < 5; ++i) {
    MeanParams m{mean, thetas[i]};
    VolParams v;
    switch (family) {
      case VolFamily::Arch1: {
        static const double a1[5] = {0.2, 0.5, 0.05, 0.8, 0.35};
        v.alpha1 = a1[i];
        v.alpha0 = var * (1.0 - v.alpha1);
        break;
      }
      case VolFamily::Garch11: {
        static const double s[5] = {0.9, 0.5, 0.95, 0.7, 0.3};
        static const double w[5] = {0.1, 0.3, 0.05, 0.5, 0.5};
        v.alpha1 = s[i] * w[i];
        v.beta1 = s[i] * (1.0 - w[i]);
        v.alpha0 = var * (1.0 - s[i]);
        break;
      }
      case VolFamily::Egarch11: {
        static const double b1[5] = {0.9, 0.5, 0.0, 0.95, 0.3};
        static const double a1[5] = {0.1, 0.2, 0.1, 0.05, 0.3};
        v.beta1 = b1[i];
        v.alpha1 = a1[i];
        v.alpha0 = std::log(var) * (1.0 - v.beta1);
        break;
      }
    }
    out.push_back(pack(family, m, v));
  }
  return out;
}

}  // namespace

std::string family_name(VolFamily f) {
  switch (f) {
    case VolFamily::Arch1: return "ARCH1";
    case VolFamily::Garch11: return "GARCH11";
    case VolFamily::Egarch11: return "EGARCH11";
  }
  return "?";
}

VolFamily parse_family(const std::string& name) {
  if (name == "ARCH1") return VolFamily::Arch1;
  if (name == "GARCH11") return VolFamily::Garch11;
  if (name == "EGARCH11") return VolFamily::Egarch11;
  throw ValidationError("unknown volatility family '" + name + "'");
}

int parameter_count(VolFamily family) {
  switch (family) {
    case VolFamily::Arch1: return 4;
    case VolFamily::Garch11: return 5;
    case VolFamily::Egarch11: return 6;
  }
  return 0;
}

double next_variance(VolFamily family, const VolParams& v, const FilterState& prev) {
  switch (family) {
    case VolFamily::Arch1: return v.alpha0 + v.alpha1 * prev.z * prev.z;
    case VolFamily::Garch11: return v.alpha0 + v.alpha1 * prev.z * prev.z + v.beta1 * prev.sigma2;
    case VolFamily::Egarch11: {
      const double e = prev.z / std::sqrt(prev.sigma2);
      const double ls = v.alpha0 + v.alpha1 * (std::abs(e) - kAbsMean) + v.leverage * e + v.beta1 * std::log(prev.sigma2);
      return std::exp(std::clamp(ls, -60.0, 60.0));
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

FilterOutput filter_series(std::span<const double> y, VolFamily family, const MeanParams& m, const VolParams& v,
                           const FilterState& init) {
  if (!(init.sigma2 > 0.0)) throw DomainError("initial conditional variance must be positive");
  FilterOutput out;
  out.residuals.reserve(y.size());
  out.shocks.reserve(y.size());
  out.cond_var.reserve(y.size());
  FilterState st = init;
  for (double r : y) {
    const double s2 = next_variance(family, v, st);
    if (!(s2 > 0.0) || !std::isfinite(s2)) throw NumericalError("conditional variance became non-positive");
    const double z = r - m.phi0 - m.theta1 * st.z;
    out.loglik -= 0.5 * (kLog2Pi + std::log(s2) + z * z / s2);
    out.residuals.push_back(z / std::sqrt(s2));
    out.shocks.push_back(z);
    out.cond_var.push_back(s2);
    st = {z, s2};
  }
  out.terminal = st;
  return out;
}

FittedVolModel fit_mean_vol(std::span<const double> y, VolFamily family) {
  if (y.size() < 10) throw ValidationError("series needs at least 10 observations, got " + std::to_string(y.size()));
  for (double v : y)
    if (!std::isfinite(v)) throw ValidationError("series contains non-finite values");
  const double var = sample_variance(y);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(y.size());
  if (!(var > 1e-300) || var <= 1e-24 * (mean * mean)) throw DomainError("zero-variance input series");

  const FilterState init{0.0, var};
  auto objective = [&](const Eigen::VectorXd& u) {
    const auto p = unpack(family, u);
    return neg_loglik(y, family, p.mean, p.vol, init);
  };

  BfgsOptions opt;
  opt.max_iter = 1000;
  MinimizeResult best;
  best.f = std::numeric_limits<double>::infinity();
  bool any_converged = false;
  for (const auto& x0 : starting_points(family, mean, var)) {
    auto r = minimize_bfgs(Objective(objective), x0, opt);
    if (!std::isfinite(r.f)) continue;
    // Prefer converged runs; among those, the lowest objective.
    if ((r.converged && !any_converged) || (r.converged == any_converged && r.f < best.f)) {
      any_converged = any_converged || r.converged;
      best = r;
    }
  }
  if (!std::isfinite(best.f))
    throw ConvergenceError(family_name(family) + " fit: no finite likelihood from any start", {}, 0.0);
  if (!any_converged)
    throw ConvergenceError(family_name(family) + " fit did not converge",
                           std::vector<double>(best.x.data(), best.x.data() + best.x.size()), best.grad_norm);

  FittedVolModel fit;
  fit.family = family;
  const auto p = unpack(family, best.x);
  fit.mean = p.mean;
  fit.vol = p.vol;
  fit.n_obs = static_cast<int>(y.size());
  fit.n_params = parameter_count(family);
  fit.initial = init;
  fit.grad_norm = best.grad_norm;
  auto f = filter_series(y, family, fit.mean, fit.vol, init);
  fit.loglik = f.loglik;
  fit.residuals = std::move(f.residuals);
  fit.cond_var = std::move(f.cond_var);
  fit.terminal = f.terminal;
  const double n = static_cast<double>(y.size()), k = fit.n_params;
  fit.aic = (-2.0 * fit.loglik + 2.0 * k) / n;
  fit.bic = (-2.0 * fit.loglik + k * std::log(n)) / n;

  constexpr double edge = 1e-6;
  if (std::abs(fit.mean.theta1) > 1.0 - edge) fit.warnings.push_back("theta1 at the invertibility boundary");
  switch (family) {
    case VolFamily::Arch1:
      if (fit.vol.alpha1 > 1.0 - edge) fit.warnings.push_back("alpha1 projected to the stationarity boundary");
      if (fit.vol.alpha1 < edge) fit.warnings.push_back("alpha1 at its lower bound 0");
      break;
    case VolFamily::Garch11:
      if (fit.vol.alpha1 + fit.vol.beta1 > 1.0 - edge)
        fit.warnings.push_back("alpha1+beta1 projected to the stationarity boundary");
      if (fit.vol.alpha1 < edge) fit.warnings.push_back("alpha1 at its lower bound 0");
      if (fit.vol.beta1 < edge) fit.warnings.push_back("beta1 at its lower bound 0");
      break;
    case VolFamily::Egarch11:
      if (std::abs(fit.vol.beta1) > 1.0 - edge) fit.warnings.push_back("|beta1| projected to the boundary 1");
      break;
  }
  return fit;
}

std::vector<double> simulate_path(const FittedVolModel& model, std::span<const double> innovations,
                                  const FilterState& init) {
  if (!(init.sigma2 > 0.0)) throw DomainError("initial conditional variance must be positive");
  std::vector<double> path;
  path.reserve(innovations.size());
  FilterState st = init;
  for (double e : innovations) {
    if (!std::isfinite(e)) throw ValidationError("innovations must be finite");
    const double s2 = next_variance(model.family, model.vol, st);
    const double z = std::sqrt(s2) * e;
    path.push_back(model.mean.phi0 + z + model.mean.theta1 * st.z);
    st = {z, s2};
  }
  return path;
}

std::size_t select_by_criteria(std::span<const InformationCriteria> e) {
  if (e.empty()) throw ValidationError("no candidate models to select from");
  std::size_t best = 0;
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e[i].aic < e[best].aic || (e[i].aic == e[best].aic && e[i].bic < e[best].bic)) best = i;
  }
  return best;
}

ModelSelection select_model(std::span<const double> series) {
  ModelSelection out;
  for (VolFamily f : {VolFamily::Arch1, VolFamily::Garch11, VolFamily::Egarch11}) {
    try {
      out.candidates.push_back(fit_mean_vol(series, f));
    } catch (const NumericalError& e) {
      out.failures.push_back(family_name(f) + ": " + e.what());
    }
  }
  if (out.candidates.empty()) {
    std::string msg = "all volatility families failed:";
    for (const auto& f : out.failures) msg += " [" + f + "]";
    throw NumericalError(msg);
  }
  std::vector<InformationCriteria> ic;
  for (const auto& c : out.candidates) ic.push_back({c.aic, c.bic});
  out.selected = out.candidates[select_by_criteria(ic)];
  return out;
}

}  // namespace dwi
