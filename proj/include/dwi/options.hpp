#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dwi/nig.hpp"

namespace dwi {

enum class OptionKind { Call, Put };

std::string option_kind_name(OptionKind k);  // "call" / "put"
OptionKind parse_option_kind(const std::string& name);

// GARCH(1,1) with NIG innovations for log returns:
//   R_t = r' + m_t + sqrt(a_t) * eps_t,  m_t = lambda0 * sqrt(a_t) - a_t / 2,
//   a_{t+1} = alpha0 + alpha1 * a_t * (eps_t - E eps)^2 + beta1 * a_t.
struct OptionModelParams {
  double alpha0 = 0.0;
  double alpha1 = 0.0;
  double beta1 = 0.0;
  NigParams nig;
  double a1 = 0.0;  // conditional variance of the first simulated step
  double risk_free = 0.02;
  double lambda0 = 0.0;
  double spot = 1.0;
  // Upper bound applied to a_t during simulation; 0 leaves it unbounded.
  double variance_cap = 0.0;

  void validate() const;  // throws DomainError
};

struct NigGarchFit {
  OptionModelParams params;
  double loglik = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
};

// Maximum likelihood with the innovation law scaled to unit variance
// (delta = gamma^3 / alpha^2); location is free. The spot is the caller's.
NigGarchFit fit_nig_garch(std::span<const double> returns, double risk_free, double spot, double lambda0 = 0.0);

// Log-MGF of R_t under the physical law at conditional variance a.
double conditional_log_mgf(double u, const NigParams& p, double a, double risk_free, double lambda0 = 0.0);

// Esscher parameter making exp(R_t - r') a martingale increment, found by
// bracketed root search over the MGF domain. Throws NoRiskNeutralMeasure when
// the martingale condition has no root inside the domain.
double esscher_theta(const NigParams& p, double a, double risk_free, double lambda0 = 0.0);

// Largest conditional variance for which the martingale condition still has a
// root (the rate cancels out of it).
double esscher_variance_limit(const NigParams& p, double lambda0 = 0.0);

// DWI_t for t = 1..T along each path, row-major (path, step).
struct RiskNeutralPaths {
  std::size_t n_paths = 0;
  int horizon = 0;
  double spot = 0.0;
  double risk_free = 0.0;
  std::vector<double> values;
  std::size_t capped_steps = 0;  // steps where a_t hit the variance cap

  double at(std::size_t path, int t) const { return values[path * static_cast<std::size_t>(horizon) + (t - 1)]; }
  std::vector<double> terminal(int t) const;
};

// Paths are generated in fixed blocks with per-block seeds, so the output does
// not depend on `threads`.
RiskNeutralPaths simulate_risk_neutral(const OptionModelParams& p, int horizon, std::size_t n_paths,
                                       std::uint64_t seed, unsigned threads = 1);

struct OptionQuote {
  OptionKind kind = OptionKind::Call;
  double strike = 0.0;
  int maturity = 1;
  double price = 0.0;
  double mc_standard_error = 0.0;
  std::size_t path_count = 0;
};

OptionQuote price_option(const RiskNeutralPaths& paths, OptionKind kind, double strike, int maturity);
OptionQuote price_option(const OptionModelParams& p, OptionKind kind, double strike, int maturity,
                         std::size_t n_paths = 10000, std::uint64_t seed = 0, unsigned threads = 1);

// Lognormal (Black-Scholes) price with continuously compounded per-period rate.
double lognormal_price(OptionKind kind, double spot, double strike, double maturity, double rate, double sigma);

// Bisection on sigma in [1e-6, 5]; NaN when the price lies outside what that
// range can produce.
double implied_vol(OptionKind kind, double price, double spot, double strike, double maturity, double rate);

struct SurfaceCell {
  int maturity = 1;
  double moneyness = 1.0;  // spot / strike
  double strike = 0.0;
  double price = 0.0;
  double mc_standard_error = 0.0;
  double implied_vol = 0.0;
  bool valid = false;
};

struct VolSurface {
  double spot = 0.0;
  double risk_free = 0.0;
  std::vector<SurfaceCell> cells;
};

VolSurface implied_vol_surface(const std::vector<OptionQuote>& quotes, double spot, double risk_free);

std::vector<double> default_moneyness_grid();  // 0.5, 0.6, ..., 1.5
std::vector<int> default_maturities();         // 1..16

// Call quotes on a shared set of paths for every (maturity, moneyness) pair.
VolSurface call_surface(const RiskNeutralPaths& paths, const std::vector<double>& moneyness,
                        const std::vector<int>& maturities);

}  // namespace dwi
