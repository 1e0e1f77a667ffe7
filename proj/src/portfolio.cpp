#include "dwi/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dwi/error.hpp"
#include "dwi/lp.hpp"

namespace dwi {

std::string measure_name(RiskMeasure m) {
  switch (m) {
    case RiskMeasure::Variance: return "variance";
    case RiskMeasure::Cvar95: return "cvar95";
    case RiskMeasure::Cvar99: return "cvar99";
  }
  return "?";
}

RiskMeasure parse_measure(const std::string& name) {
  if (name == "variance") return RiskMeasure::Variance;
  if (name == "cvar95") return RiskMeasure::Cvar95;
  if (name == "cvar99") return RiskMeasure::Cvar99;
  throw ValidationError("unknown risk measure '" + name + "' (expected variance, cvar95 or cvar99)");
}

double measure_alpha(RiskMeasure m) {
  switch (m) {
    case RiskMeasure::Cvar95: return 0.05;
    case RiskMeasure::Cvar99: return 0.01;
    case RiskMeasure::Variance: break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
  // Sort-based projection (Duchi et al.).
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<>());
  double css = 0.0, theta = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    css += u[i];
    const double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[i] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

double scenario_cvar(std::span<const double> x, double alpha) {
  if (x.empty()) throw ValidationError("scenario_cvar: empty sample");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("scenario_cvar: alpha must lie in (0, 1)");
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double tail = alpha * static_cast<double>(s.size());
  double acc = 0.0, used = 0.0;
  for (std::size_t i = 0; i < s.size() && used < tail; ++i) {
    const double w = std::min(1.0, tail - used);
    acc += w * s[i];
    used += w;
  }
  return -acc / tail;
}

namespace {

void check_returns(const Eigen::MatrixXd& r, double gamma) {
  if (r.cols() < 1 || r.rows() < 2) throw ValidationError("portfolio: need at least one asset and two scenarios");
  if (!r.allFinite()) throw ValidationError("portfolio: returns contain non-finite values");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("portfolio: gamma must lie in [0, 1]");
}

Eigen::MatrixXd covariance(const Eigen::MatrixXd& r) {
  const Eigen::MatrixXd c = r.rowwise() - r.colwise().mean();
  return c.transpose() * c / static_cast<double>(r.rows() - 1);
}

FrontierPoint finish(const Eigen::MatrixXd& r, double gamma, Eigen::VectorXd w, RiskMeasure measure) {
  FrontierPoint p;
  p.gamma = gamma;
  p.weights = std::move(w);
  const Eigen::VectorXd mu = r.colwise().mean().transpose();
  p.expected_return = mu.dot(p.weights);
  if (measure == RiskMeasure::Variance) {
    const double var = std::max(0.0, p.weights.dot(covariance(r) * p.weights));
    p.risk = std::sqrt(var);
    p.objective = gamma * p.expected_return - (1.0 - gamma) * var;
  } else {
    const Eigen::VectorXd port = r * p.weights;
    p.risk = scenario_cvar({port.data(), static_cast<std::size_t>(port.size())}, measure_alpha(measure));
    p.objective = gamma * p.expected_return - (1.0 - gamma) * p.risk;
  }
  return p;
}

// Equality-constrained optimum on a support set; false if the KKT system is singular.
bool solve_on_support(const Eigen::MatrixXd& sigma, const Eigen::VectorXd& mu, double gamma,
                      const std::vector<Eigen::Index>& support, Eigen::VectorXd& w, double& nu) {
  const auto k = static_cast<Eigen::Index>(support.size());
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs(k + 1);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) K(a, b) = 2.0 * (1.0 - gamma) * sigma(support[a], support[b]);
    K(a, k) = K(k, a) = 1.0;
    rhs(a) = gamma * mu(support[a]);
  }
  rhs(k) = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
  if (!lu.isInvertible()) return false;
  const Eigen::VectorXd sol = lu.solve(rhs);
  if (!sol.allFinite()) return false;
  w = Eigen::VectorXd::Zero(mu.size());
  for (Eigen::Index a = 0; a < k; ++a) w(support[a]) = sol(a);
  nu = sol(k);
  return true;
}

}  // namespace

FrontierPoint mean_variance_point(const Eigen::MatrixXd& r, double gamma, const PortfolioConstraints& c) {
  check_returns(r, gamma);
  const Eigen::Index n = r.cols();
  if (n == 1) return finish(r, gamma, Eigen::VectorXd::Ones(1), RiskMeasure::Variance);
  const Eigen::MatrixXd sigma = covariance(r);
  const Eigen::VectorXd mu = r.colwise().mean().transpose();
  std::vector<std::string> warnings;

  if (c.allow_short) {
    if (gamma >= 1.0) throw ValidationError("mean-variance with shorting is unbounded at gamma = 1");
    Eigen::MatrixXd s = sigma;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma, Eigen::EigenvaluesOnly);
    if (!(es.eigenvalues()(0) > 1e-12 * std::max(1e-300, es.eigenvalues()(n - 1)))) {
      s.diagonal().array() += 1e-8;
      warnings.push_back("singular covariance: added a 1e-8 ridge to the diagonal");
    }
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    Eigen::VectorXd w;
    double nu;
    if (!solve_on_support(s, mu, gamma, all, w, nu)) throw NumericalError("mean-variance KKT system is singular");
    auto p = finish(r, gamma, w, RiskMeasure::Variance);
    p.warnings = warnings;
    return p;
  }

  if (gamma >= 1.0) {
    Eigen::Index best = 0;
    mu.maxCoeff(&best);
    return finish(r, gamma, Eigen::VectorXd::Unit(n, best), RiskMeasure::Variance);
  }

  // Projected gradient with exact line search along the projected direction.
  const double lmax = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(sigma, Eigen::EigenvaluesOnly).eigenvalues()(n - 1);
  const double lip = 2.0 * (1.0 - gamma) * lmax;
  const double t = lip > 0.0 ? 1.0 / lip : 1.0;
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  for (int it = 0; it < 20000; ++it) {
    const Eigen::VectorXd g = 2.0 * (1.0 - gamma) * sigma * w - gamma * mu;
    const Eigen::VectorXd d = project_to_simplex(w - t * g) - w;
    if (d.lpNorm<Eigen::Infinity>() < 1e-15) break;
    const double gd = g.dot(d);
    const double curv = 2.0 * (1.0 - gamma) * d.dot(sigma * d);
    double s = curv > 0.0 ? -gd / curv : 1.0;
    s = std::clamp(s, 0.0, 1.0);
    if (s == 0.0) break;
    w += s * d;
  }
  auto objective = [&](const Eigen::VectorXd& v) { return (1.0 - gamma) * v.dot(sigma * v) - gamma * mu.dot(v); };

  // Active-set polish: solve the KKT system exactly on the support, adjusting
  // the support until primal and dual feasibility both hold.
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < n; ++i)
    if (w(i) > 1e-9) support.push_back(i);
  for (int round = 0; round < 4 * n && !support.empty(); ++round) {
    Eigen::VectorXd ws;
    double nu;
    if (!solve_on_support(sigma, mu, gamma, support, ws, nu)) break;
    Eigen::Index worst = -1;
    for (Eigen::Index i : support)
      if (ws(i) < -1e-12 && (worst < 0 || ws(i) < ws(worst))) worst = i;
    if (worst >= 0) {
      support.erase(std::find(support.begin(), support.end(), worst));
      continue;
    }
    const Eigen::VectorXd grad = 2.0 * (1.0 - gamma) * sigma * ws - gamma * mu;
    Eigen::Index add = -1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::find(support.begin(), support.end(), i) != support.end()) continue;
      const double eta = grad(i) + nu;
      if (eta < -1e-12 && (add < 0 || eta < grad(add) + nu)) add = i;
    }
    if (add >= 0) {
      support.push_back(add);
      std::sort(support.begin(), support.end());
      continue;
    }
    ws = ws.cwiseMax(0.0);
    ws /= ws.sum();
    if (objective(ws) <= objective(w) + 1e-15 * (1.0 + std::abs(objective(w)))) w = ws;
    break;
  }
  return finish(r, gamma, w, RiskMeasure::Variance);
}

FrontierPoint mean_cvar_point(const Eigen::MatrixXd& r, double gamma, double alpha, const PortfolioConstraints& c,
                              const Eigen::VectorXd* warm) {
  check_returns(r, gamma);
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("mean-CVaR: alpha must lie in (0, 1)");
  const Eigen::Index S = r.rows(), n = r.cols();
  if (static_cast<double>(S) * alpha < 1.0 - 1e-9)
    throw ValidationError("mean-CVaR needs at least 1/alpha = " + std::to_string(1.0 / alpha) + " scenarios, got " +
                          std::to_string(S));
  auto finish_cvar = [&](Eigen::VectorXd w) {
    FrontierPoint p = finish(r, gamma, std::move(w), RiskMeasure::Cvar95);
    const Eigen::VectorXd port = r * p.weights;
    p.risk = scenario_cvar({port.data(), static_cast<std::size_t>(port.size())}, alpha);
    p.objective = gamma * p.expected_return - (1.0 - gamma) * p.risk;
    return p;
  };
  if (n == 1) return finish_cvar(Eigen::VectorXd::Ones(1));

  const Eigen::VectorXd mu = r.colwise().mean().transpose();
  const Eigen::Index slack = c.allow_short ? 0 : n;
  const Eigen::Index nv = S + 1 + slack;
  LpProblem lp;
  lp.A = Eigen::MatrixXd::Zero(n + 1, nv);
  lp.A.topLeftCorner(n, S) = r.transpose();
  lp.A.block(0, S, n, 1).setOnes();
  if (slack) lp.A.block(0, S + 1, n, n).setIdentity();
  lp.A.block(n, 0, 1, S).setOnes();
  lp.b.resize(n + 1);
  lp.b.head(n) = -gamma * mu;
  lp.b(n) = 1.0 - gamma;
  lp.c = Eigen::VectorXd::Zero(nv);
  lp.c(S) = -1.0;
  const double cap = (1.0 - gamma) / (alpha * static_cast<double>(S));
  lp.lower = Eigen::VectorXd::Zero(nv);
  lp.upper = Eigen::VectorXd::Constant(nv, std::numeric_limits<double>::infinity());
  lp.upper.head(S).setConstant(cap);
  lp.lower(S) = -std::numeric_limits<double>::infinity();

  // Start with the worst scenarios of the warm portfolio at their cap.
  Eigen::VectorXd w0 = warm && warm->size() == n ? *warm : Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  const Eigen::VectorXd port0 = r * w0;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(S));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return port0(a) < port0(b); });
  std::vector<std::uint8_t> at_upper(static_cast<std::size_t>(nv), 0);
  const auto k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(S) + 1e-9));
  if (cap > 0.0)
    for (std::size_t i = 0; i < k; ++i) at_upper[static_cast<std::size_t>(order[i])] = 1;

  const LpResult res = solve_lp(lp, {}, &at_upper);
  if (res.status == LpStatus::Infeasible) throw NumericalError("mean-CVaR linear program is infeasible");
  if (res.status == LpStatus::Unbounded)
    throw NumericalError("mean-CVaR linear program is unbounded (gamma = 1 with shorting has no finite optimum)");
  if (res.status != LpStatus::Optimal) throw NumericalError("mean-CVaR linear program hit its iteration limit");

  Eigen::VectorXd w = -res.duals.head(n);
  if (!c.allow_short) {
    w = w.cwiseMax(0.0).array() + 0.0;  // also maps -0 to +0
  }
  const double total = w.sum();
  if (!(std::abs(total) > 1e-12)) throw NumericalError("mean-CVaR: degenerate dual weights");
  w /= total;
  return finish_cvar(w);
}

std::vector<double> default_gamma_grid() {
  std::vector<double> g(100);
  for (int i = 0; i < 100; ++i) g[static_cast<std::size_t>(i)] = i / 100.0;
  return g;
}

FrontierTrace trace_frontier(const Eigen::MatrixXd& returns, const std::vector<std::string>& universe,
                             RiskMeasure measure, const std::vector<double>& gammas, const PortfolioConstraints& c) {
  if (static_cast<std::size_t>(returns.cols()) != universe.size())
    throw ValidationError("trace_frontier: universe labels do not match return columns");
  FrontierTrace trace;
  trace.measure = measure;
  trace.universe = universe;
  trace.allow_short = c.allow_short;
  Eigen::VectorXd prev;
  for (double g : gammas) {
    if (measure == RiskMeasure::Variance) {
      trace.points.push_back(mean_variance_point(returns, g, c));
    } else {
      trace.points.push_back(mean_cvar_point(returns, g, measure_alpha(measure), c, prev.size() ? &prev : nullptr));
      prev = trace.points.back().weights;
    }
  }
  return trace;
}

std::optional<double> frontier_risk_at(const FrontierTrace& trace, double er) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : trace.points) pts.emplace_back(p.expected_return, p.risk);
  std::sort(pts.begin(), pts.end());
  if (pts.empty() || er < pts.front().first || er > pts.back().first) return std::nullopt;
  std::optional<double> best;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].first == er) best = best ? std::min(*best, pts[i].second) : pts[i].second;
    if (i + 1 < pts.size() && pts[i].first < er && er < pts[i + 1].first) {
      const double w = (er - pts[i].first) / (pts[i + 1].first - pts[i].first);
      const double v = pts[i].second + w * (pts[i + 1].second - pts[i].second);
      best = best ? std::min(*best, v) : v;
    }
  }
  return best;
}

}  // namespace dwi
