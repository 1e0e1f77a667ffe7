#include "dwi/options.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "dwi/error.hpp"
#include "dwi/optim.hpp"
#include "dwi/parallel.hpp"

namespace dwi {

namespace {

constexpr std::size_t kPathBlock = 1024;
constexpr double kPersistenceCap = 0.9999;
// Keep the innovation law away from the |beta| = alpha edge, where short
// samples push the likelihood and the Esscher domain collapses.
constexpr double kMaxSkewRatio = 0.95;
constexpr double kMinShape = 0.05;

double logistic(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

std::string option_kind_name(OptionKind k) { return k == OptionKind::Call ? "call" : "put"; }

OptionKind parse_option_kind(const std::string& name) {
  if (name == "call") return OptionKind::Call;
  if (name == "put") return OptionKind::Put;
  throw ValidationError("unknown option kind '" + name + "' (expected call or put)");
}

void OptionModelParams::validate() const {
  if (!(alpha0 > 0.0) || !(alpha1 >= 0.0) || !(beta1 >= 0.0) || !std::isfinite(alpha0 + alpha1 + beta1))
    throw DomainError("GARCH parameters must satisfy alpha0 > 0, alpha1 >= 0, beta1 >= 0");
  nig.validate();
  if (!(alpha1 * nig.variance() + beta1 < 1.0)) throw DomainError("GARCH recursion is not stationary");
  if (!(a1 > 0.0) || !std::isfinite(a1)) throw DomainError("initial conditional variance must be positive");
  if (!(spot > 0.0) || !std::isfinite(spot)) throw DomainError("spot must be positive");
  if (!std::isfinite(risk_free) || !std::isfinite(lambda0)) throw DomainError("rate and price of risk must be finite");
  if (!(variance_cap >= 0.0)) throw DomainError("variance cap must be >= 0");
}

double conditional_log_mgf(double u, const NigParams& p, double a, double r, double lambda0) {
  const double sa = std::sqrt(a);
  const double m = lambda0 * sa - 0.5 * a;
  return u * (r + m) + nig_log_mgf(u * sa, p);
}

double esscher_theta(const NigParams& p, double a, double r, double lambda0) {
  p.validate();
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("esscher_theta: conditional variance must be positive");
  (void)r;  // the rate cancels in the martingale condition
  const double sa = std::sqrt(a);
  const double m = lambda0 * sa - 0.5 * a;
  const double al = p.alpha, be = p.beta, de = p.delta;
  const double lo = -(al + be) / sa, hi = (al - be) / sa - 1.0;
  if (!(hi > lo)) throw NoRiskNeutralMeasure("Esscher domain is empty: sqrt(a) >= 2 alpha", lo, hi);
  // log MGF(1 + theta) - log MGF(theta) - r', with the square-root difference
  // rewritten to avoid cancellation.
  auto h = [&](double th) {
    const double x1 = be + th * sa, x2 = be + (1.0 + th) * sa;
    const double s1 = std::sqrt(std::max(0.0, al * al - x1 * x1));
    const double s2 = std::sqrt(std::max(0.0, al * al - x2 * x2));
    return m + p.mu * sa + de * sa * (x1 + x2) / (s1 + s2);
  };
  const double margin = 1e-12 * (hi - lo);
  double a0 = lo + margin, b0 = hi - margin;
  const double fa = h(a0), fb = h(b0);
  if (fa == 0.0) return a0;
  if (fb == 0.0) return b0;
  if ((fa > 0.0) == (fb > 0.0))
    throw NoRiskNeutralMeasure("martingale condition has no root inside the MGF domain", lo, hi);
  std::uintmax_t iters = 200;
  const auto br = boost::math::tools::toms748_solve(h, a0, b0, fa, fb, boost::math::tools::eps_tolerance<double>(52),
                                                    iters);
  double best = 0.5 * (br.first + br.second);
  double fbest = std::abs(h(best));
  for (double c : {br.first, br.second}) {
    const double fc = std::abs(h(c));
    if (fc < fbest) best = c, fbest = fc;
  }
  return best;
}

namespace {

bool esscher_root_exists(const NigParams& p, double a, double lambda0) {
  try {
    esscher_theta(p, a, 0.0, lambda0);
    return true;
  } catch (const NoRiskNeutralMeasure&) {
    return false;
  }
}

}  // namespace

double esscher_variance_limit(const NigParams& p, double lambda0) {
  p.validate();
  double lo = 0.0, hi = 4.0 * p.alpha * p.alpha;
  if (esscher_root_exists(p, hi * (1.0 - 1e-12), lambda0)) return hi;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (esscher_root_exists(p, mid, lambda0) ? lo : hi) = mid;
  }
  return lo;
}

NigGarchFit fit_nig_garch(std::span<const double> r, double risk_free, double spot, double lambda0) {
  const std::size_t n = r.size();
  if (n < 10) throw ValidationError("NIG-GARCH fit needs at least 10 returns");
  for (double v : r)
    if (!std::isfinite(v)) throw ValidationError("NIG-GARCH fit: non-finite return");
  const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(n);
  double var0 = 0.0;
  for (double v : r) var0 += (v - mean) * (v - mean);
  var0 /= static_cast<double>(n - 1);
  if (!(var0 > 0.0)) throw DomainError("NIG-GARCH fit: zero-variance input");

  auto unpack = [&](const Eigen::VectorXd& u) {
    OptionModelParams p;
    const double s = kPersistenceCap * logistic(u(1)), w = logistic(u(2));
    p.alpha0 = std::exp(u(0));
    p.alpha1 = s * w;
    p.beta1 = s * (1.0 - w);
    p.nig.alpha = kMinShape + std::exp(u(3));
    const double rho = kMaxSkewRatio * std::tanh(u(4));
    p.nig.beta = p.nig.alpha * rho;
    const double g = p.nig.alpha * std::sqrt(1.0 - rho * rho);
    p.nig.delta = g * g * g / (p.nig.alpha * p.nig.alpha);
    p.nig.mu = u(5);
    p.risk_free = risk_free;
    p.lambda0 = lambda0;
    p.spot = spot;
    return p;
  };
  // Returns the negative log-likelihood and leaves the one-step-ahead variance in a_next.
  auto nll = [&](const OptionModelParams& p, double& a_next) {
    const double kappa = p.nig.mean();
    double a = var0, total = 0.0;
    for (double x : r) {
      if (!(a > 0.0) || !std::isfinite(a)) return std::numeric_limits<double>::infinity();
      const double sa = std::sqrt(a);
      const double e = (x - risk_free - lambda0 * sa + 0.5 * a) / sa;
      total -= nig_logpdf(e, p.nig) - 0.5 * std::log(a);
      a = p.alpha0 + p.alpha1 * a * (e - kappa) * (e - kappa) + p.beta1 * a;
    }
    a_next = a;
    return std::isfinite(total) ? total : std::numeric_limits<double>::infinity();
  };
  Objective f = [&](const Eigen::VectorXd& u) {
    double a_next;
    const auto p = unpack(u);
    if (!(p.nig.delta > 0.0) || !std::isfinite(p.nig.delta)) return std::numeric_limits<double>::infinity();
    return nll(p, a_next);
  };

  struct Start { double s, w, alpha; };
  const Start starts[] = {{0.9, 0.1, 2.0}, {0.5, 0.3, 2.0}, {0.9, 0.1, 8.0}, {0.2, 0.5, 1.5}};
  const double loc = (mean - risk_free + 0.5 * var0) / std::sqrt(var0);
  MinimizeResult best;
  best.f = std::numeric_limits<double>::infinity();
  for (const auto& st : starts) {
    Eigen::VectorXd u(6);
    u << std::log(var0 * (1.0 - st.s)), logit(st.s / kPersistenceCap), logit(st.w), std::log(st.alpha - kMinShape), 0.0, loc;
    if (!std::isfinite(f(u))) continue;
    auto res = minimize_bfgs(f, u);
    if (!std::isfinite(res.f)) continue;
    if ((res.converged && !best.converged) || (res.converged == best.converged && res.f < best.f)) best = res;
  }
  if (!std::isfinite(best.f))
    throw ConvergenceError("NIG-GARCH fit: no starting point produced a finite likelihood", {}, 0.0);

  NigGarchFit fit;
  fit.params = unpack(best.x);
  fit.loglik = -nll(fit.params, fit.params.a1);
  fit.converged = best.converged;
  if (!best.converged) fit.warnings.push_back("NIG-GARCH optimizer stopped before meeting its gradient tolerance");
  if (fit.params.alpha1 + fit.params.beta1 > 0.999 * kPersistenceCap)
    fit.warnings.push_back("GARCH persistence at its upper bound");
  return fit;
}

std::vector<double> RiskNeutralPaths::terminal(int t) const {
  if (t < 1 || t > horizon) throw ValidationError("maturity outside the simulated horizon");
  std::vector<double> out(n_paths);
  for (std::size_t i = 0; i < n_paths; ++i) out[i] = at(i, t);
  return out;
}

RiskNeutralPaths simulate_risk_neutral(const OptionModelParams& p, int horizon, std::size_t n_paths,
                                       std::uint64_t seed, unsigned threads) {
  p.validate();
  if (horizon < 1) throw ValidationError("horizon must be at least one period");
  if (n_paths < 1) throw ValidationError("need at least one path");
  RiskNeutralPaths out;
  out.n_paths = n_paths;
  out.horizon = horizon;
  out.spot = p.spot;
  out.risk_free = p.risk_free;
  out.values.assign(n_paths * static_cast<std::size_t>(horizon), 0.0);
  const double kappa = p.nig.mean();
  const std::size_t blocks = (n_paths + kPathBlock - 1) / kPathBlock;
  std::vector<std::size_t> capped(blocks, 0);
  parallel_blocks(blocks, threads, [&](std::size_t b) {
    Rng rng(derive_seed(seed, b));
    double cached_a = -1.0, cached_theta = 0.0;
    const std::size_t end = std::min(n_paths, (b + 1) * kPathBlock);
    for (std::size_t i = b * kPathBlock; i < end; ++i) {
      double a = p.a1, s = p.spot;
      for (int t = 1; t <= horizon; ++t) {
        if (p.variance_cap > 0.0 && a > p.variance_cap) {
          a = p.variance_cap;
          ++capped[b];
        }
        if (a != cached_a) {
          try {
            cached_theta = esscher_theta(p.nig, a, p.risk_free, p.lambda0);
          } catch (const NoRiskNeutralMeasure& e) {
            throw NoRiskNeutralMeasure("path " + std::to_string(i) + ", step " + std::to_string(t) + ": " + e.what(),
                                       e.lower(), e.upper());
          }
          cached_a = a;
        }
        const double sa = std::sqrt(a);
        NigParams q = p.nig;
        q.beta += sa * cached_theta;
        const double x = sample_nig(q, rng);
        s *= std::exp(p.risk_free + p.lambda0 * sa - 0.5 * a + sa * x);
        out.values[i * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(t - 1)] = s;
        a = p.alpha0 + p.alpha1 * a * (x - kappa) * (x - kappa) + p.beta1 * a;
      }
    }
  });
  out.capped_steps = std::accumulate(capped.begin(), capped.end(), std::size_t{0});
  return out;
}

OptionQuote price_option(const RiskNeutralPaths& paths, OptionKind kind, double strike, int maturity) {
  if (!(strike >= 0.0) || !std::isfinite(strike)) throw ValidationError("strike must be a finite value >= 0");
  if (maturity < 1 || maturity > paths.horizon) throw ValidationError("maturity outside the simulated horizon");
  if (paths.n_paths < 1000) throw ValidationError("pricing needs at least 1000 paths");
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < paths.n_paths; ++i) {
    const double st = paths.at(i, maturity);
    const double pay = kind == OptionKind::Call ? std::max(st - strike, 0.0) : std::max(strike - st, 0.0);
    sum += pay;
    sum2 += pay * pay;
  }
  const double nn = static_cast<double>(paths.n_paths);
  const double mean = sum / nn;
  const double var = std::max(0.0, (sum2 - nn * mean * mean) / (nn - 1.0));
  const double disc = std::exp(-paths.risk_free * maturity);
  OptionQuote q;
  q.kind = kind;
  q.strike = strike;
  q.maturity = maturity;
  q.price = disc * mean;
  q.mc_standard_error = disc * std::sqrt(var / nn);
  q.path_count = paths.n_paths;
  return q;
}

OptionQuote price_option(const OptionModelParams& p, OptionKind kind, double strike, int maturity,
                         std::size_t n_paths, std::uint64_t seed, unsigned threads) {
  if (!(strike >= 0.0)) throw ValidationError("strike must be >= 0");
  if (maturity < 1) throw ValidationError("maturity must be at least one period");
  if (n_paths < 1000) throw ValidationError("pricing needs at least 1000 paths");
  return price_option(simulate_risk_neutral(p, maturity, n_paths, seed, threads), kind, strike, maturity);
}

double lognormal_price(OptionKind kind, double s, double k, double t, double r, double sigma) {
  const double disc_k = k * std::exp(-r * t);
  if (k <= 0.0) return kind == OptionKind::Call ? s : 0.0;
  const double sd = sigma * std::sqrt(t);
  if (!(sd > 0.0)) return kind == OptionKind::Call ? std::max(s - disc_k, 0.0) : std::max(disc_k - s, 0.0);
  const double d1 = (std::log(s / k) + (r + 0.5 * sigma * sigma) * t) / sd;
  const double d2 = d1 - sd;
  if (kind == OptionKind::Call) return s * normal_cdf(d1) - disc_k * normal_cdf(d2);
  return disc_k * normal_cdf(-d2) - s * normal_cdf(-d1);
}

double implied_vol(OptionKind kind, double price, double s, double k, double t, double r) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!std::isfinite(price) || !(s > 0.0) || !(k > 0.0) || !(t > 0.0)) return nan;
  const double disc_k = k * std::exp(-r * t);
  const double lower = kind == OptionKind::Call ? std::max(s - disc_k, 0.0) : std::max(disc_k - s, 0.0);
  const double upper = kind == OptionKind::Call ? s : disc_k;
  if (!(price > lower && price < upper)) return nan;
  double lo = 1e-6, hi = 5.0;
  if (lognormal_price(kind, s, k, t, r, lo) > price || lognormal_price(kind, s, k, t, r, hi) < price) return nan;
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    (lognormal_price(kind, s, k, t, r, mid) < price ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

VolSurface implied_vol_surface(const std::vector<OptionQuote>& quotes, double spot, double risk_free) {
  if (!(spot > 0.0)) throw ValidationError("spot must be positive");
  VolSurface v;
  v.spot = spot;
  v.risk_free = risk_free;
  v.cells.reserve(quotes.size());
  for (const auto& q : quotes) {
    SurfaceCell c;
    c.maturity = q.maturity;
    c.strike = q.strike;
    c.moneyness = q.strike > 0.0 ? spot / q.strike : std::numeric_limits<double>::infinity();
    c.price = q.price;
    c.mc_standard_error = q.mc_standard_error;
    c.implied_vol = implied_vol(q.kind, q.price, spot, q.strike, q.maturity, risk_free);
    c.valid = std::isfinite(c.implied_vol);
    v.cells.push_back(c);
  }
  return v;
}

std::vector<double> default_moneyness_grid() {
  std::vector<double> m;
  for (int i = 5; i <= 15; ++i) m.push_back(i / 10.0);
  return m;
}

std::vector<int> default_maturities() {
  std::vector<int> t(16);
  std::iota(t.begin(), t.end(), 1);
  return t;
}

VolSurface call_surface(const RiskNeutralPaths& paths, const std::vector<double>& moneyness,
                        const std::vector<int>& maturities) {
  std::vector<OptionQuote> quotes;
  for (int t : maturities)
    for (double m : moneyness) {
      if (!(m > 0.0)) throw ValidationError("moneyness must be positive");
      quotes.push_back(price_option(paths, OptionKind::Call, paths.spot / m, t));
    }
  auto v = implied_vol_surface(quotes, paths.spot, paths.risk_free);
  for (std::size_t i = 0; i < v.cells.size(); ++i) v.cells[i].moneyness = moneyness[i % moneyness.size()];
  return v;
}

}  // namespace dwi
