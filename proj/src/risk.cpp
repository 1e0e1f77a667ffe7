#include "dwi/risk.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dwi/csv.hpp"
#include "dwi/error.hpp"

namespace dwi {

namespace {

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("risk level alpha must lie in (0, 1)");
}

// The order statistic x_(k) that defines -VaR.
double tail_threshold(std::span<const double> sample, double alpha) {
  check_alpha(alpha);
  if (sample.empty()) throw ValidationError("risk measure of an empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  const auto n = s.size();
  std::size_t k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * alpha + 1e-9));  // 0-based index
  k = std::min(k, n - 1);
  std::nth_element(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k), s.end());
  return s[k];
}

void check_pair(std::span<const double> y, std::span<const double> x) {
  if (y.size() != x.size()) throw ValidationError("paired samples must have equal length");
  if (y.empty()) throw ValidationError("risk measure of an empty sample");
}

std::vector<double> conditioned(std::span<const double> y, std::span<const double> x, double alpha) {
  const double thr = tail_threshold(x, alpha);
  std::vector<double> out;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] <= thr) out.push_back(y[i]);
  return out;
}

void flag_small(Estimate& e, std::size_t conditioning) {
  if (conditioning < kMinConditioningSet) {
    e.warning = true;
    e.note = "conditioning set has " + std::to_string(conditioning) + " observations";
  }
}

}  // namespace

double value_at_risk(std::span<const double> sample, double alpha) { return -tail_threshold(sample, alpha); }

double cvar(std::span<const double> sample, double alpha) {
  const double thr = tail_threshold(sample, alpha);
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : sample)
    if (v <= thr) {
      sum += v;
      ++n;
    }
  return -sum / static_cast<double>(n);
}

Estimate covar(std::span<const double> y, std::span<const double> x, double alpha) {
  check_pair(y, x);
  const auto cond = conditioned(y, x, alpha);
  Estimate e;
  e.value = value_at_risk(cond, alpha);
  e.tail_size = cond.size();
  flag_small(e, cond.size());
  return e;
}

Estimate coes(std::span<const double> y, std::span<const double> x, double alpha) {
  check_pair(y, x);
  const auto cond = conditioned(y, x, alpha);
  const double thr = tail_threshold(cond, alpha);
  double sum = 0.0;
  std::size_t n = 0;
  for (double v : cond)
    if (v <= thr) {
      sum += v;
      ++n;
    }
  Estimate e;
  e.value = -sum / static_cast<double>(n);
  e.tail_size = n;
  flag_small(e, cond.size());
  return e;
}

Estimate coetl(std::span<const double> y, std::span<const double> x, double alpha) {
  check_pair(y, x);
  const double ty = tail_threshold(y, alpha);
  const double tx = tail_threshold(x, alpha);
  double sum = 0.0;
  std::size_t n = 0, cond = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (x[i] > tx) continue;
    ++cond;
    if (y[i] <= ty) {
      sum += y[i];
      ++n;
    }
  }
  if (n == 0) {
    std::ostringstream os;
    os << "CoETL: empty joint tail (Y <= " << csv::format_number(ty) << " and X <= " << csv::format_number(tx) << ")";
    throw DomainError(os.str());
  }
  Estimate e;
  e.value = -sum / static_cast<double>(n);
  e.tail_size = n;
  flag_small(e, cond);
  return e;
}

double pearson(std::span<const double> y, std::span<const double> x) {
  check_pair(y, x);
  const double n = static_cast<double>(y.size());
  double my = 0.0, mx = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    my += y[i];
    mx += x[i];
  }
  my /= n;
  mx /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    sxy += (y[i] - my) * (x[i] - mx);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw DomainError("pearson: a sample has zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::string confidence_label(double alpha) {
  const double c = 100.0 * (1.0 - alpha);
  if (std::abs(c - std::round(c)) < 1e-9) return std::to_string(static_cast<int>(std::round(c)));
  return csv::format_number(c);
}

RiskReport risk_report(const Eigen::MatrixXd& returns, const std::vector<std::string>& labels, Eigen::Index market,
                       const std::string& kind, const std::vector<double>& alphas) {
  if (static_cast<std::size_t>(returns.cols()) != labels.size())
    throw ValidationError("risk_report: label count does not match return columns");
  if (market < 0 || market >= returns.cols()) throw ValidationError("risk_report: market column out of range");
  for (double a : alphas)
    if (!(a > 0.0 && a < 0.5)) throw ValidationError("risk levels must lie in (0, 0.5)");
  RiskReport rep;
  rep.kind = kind;
  rep.sample_size = static_cast<std::size_t>(returns.rows());
  rep.alphas = alphas;
  const Eigen::VectorXd xm = returns.col(market);
  const std::span<const double> x(xm.data(), static_cast<std::size_t>(xm.size()));
  for (Eigen::Index j = 0; j < returns.cols(); ++j) {
    if (j == market) continue;
    const Eigen::VectorXd ym = returns.col(j);
    const std::span<const double> y(ym.data(), static_cast<std::size_t>(ym.size()));
    RiskRow row;
    row.series = labels[static_cast<std::size_t>(j)];
    row.pearson_r = pearson(y, x);
    for (double a : alphas) {
      row.var.push_back(value_at_risk(y, a));
      row.cvar.push_back(cvar(y, a));
      row.covar.push_back(covar(y, x, a));
      row.coes.push_back(coes(y, x, a));
      try {
        row.coetl.emplace_back(coetl(y, x, a));
      } catch (const DomainError&) {
        row.coetl.emplace_back(std::nullopt);
      }
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace dwi
