#include "dwi/nig.hpp"

#include <algorithm>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "dwi/error.hpp"
#include "dwi/optim.hpp"
#include "dwi/parallel.hpp"

namespace dwi {

namespace {

constexpr double kAsymptoticFrom = 600.0;
constexpr std::size_t kBlockRows = 4096;

}  // namespace

double NigParams::gamma() const { return std::sqrt(alpha * alpha - beta * beta); }

void NigParams::validate() const {
  if (!(alpha > 0.0) || !(delta > 0.0) || !(std::abs(beta) < alpha) || !std::isfinite(mu) || !std::isfinite(alpha) ||
      !std::isfinite(delta))
    throw DomainError("invalid NIG parameters: need alpha > |beta| and delta > 0 (alpha=" + std::to_string(alpha) +
                      ", beta=" + std::to_string(beta) + ", delta=" + std::to_string(delta) + ")");
}

double NigParams::mean() const { return mu + delta * beta / gamma(); }
double NigParams::variance() const {
  const double g = gamma();
  return delta * alpha * alpha / (g * g * g);
}
double NigParams::skewness() const { return 3.0 * beta / (alpha * std::sqrt(delta * gamma())); }
double NigParams::excess_kurtosis() const {
  return 3.0 * (1.0 + 4.0 * beta * beta / (alpha * alpha)) / (delta * gamma());
}

double log_bessel_k1(double z) {
  if (z < kAsymptoticFrom) return std::log(boost::math::cyl_bessel_k(1, z));
  const double s = 1.0 + 3.0 / (8.0 * z) - 15.0 / (128.0 * z * z) + 315.0 / (3072.0 * z * z * z);
  return -z + 0.5 * std::log(std::numbers::pi / (2.0 * z)) + std::log(s);
}

double bessel_k0_over_k1(double z) {
  if (z < kAsymptoticFrom) return boost::math::cyl_bessel_k(0, z) / boost::math::cyl_bessel_k(1, z);
  const double k0 = 1.0 - 1.0 / (8.0 * z) + 9.0 / (128.0 * z * z) - 225.0 / (3072.0 * z * z * z);
  const double k1 = 1.0 + 3.0 / (8.0 * z) - 15.0 / (128.0 * z * z) + 315.0 / (3072.0 * z * z * z);
  return k0 / k1;
}

double nig_logpdf(double x, const NigParams& p) {
  p.validate();
  const double d = x - p.mu;
  const double q = std::hypot(p.delta, d);
  return std::log(p.alpha * p.delta / std::numbers::pi) + log_bessel_k1(p.alpha * q) - std::log(q) +
         p.delta * p.gamma() + p.beta * d;
}

double nig_pdf(double x, const NigParams& p) { return std::exp(nig_logpdf(x, p)); }

double nig_log_mgf(double u, const NigParams& p) {
  p.validate();
  const double b = p.beta + u;
  if (!(std::abs(b) < p.alpha))
    throw DomainError("NIG MGF undefined at u=" + std::to_string(u) + ": |beta+u| must be below alpha");
  // gamma - sqrt(alpha^2 - b^2) written to avoid cancellation for small u.
  const double g = p.gamma();
  const double r = std::sqrt((p.alpha - b) * (p.alpha + b));
  const double diff = (b * b - p.beta * p.beta) / (g + r);
  return p.mu * u + p.delta * diff;
}

double nig_mgf(double u, const NigParams& p) { return std::exp(nig_log_mgf(u, p)); }

double sample_inverse_gaussian(double m, double shape, Rng& rng) {
  const double nu = rng.normal();
  const double y = nu * nu;
  const double my = m * y;
  // Root of the quadratic in its cancellation-free form.
  const double x = m - 2.0 * m * my / (my + std::sqrt(4.0 * shape * my + my * my));
  if (rng.uniform() * (m + x) <= m) return x;
  return m * m / x;
}

double sample_nig(const NigParams& p, Rng& rng) {
  const double g = p.gamma();
  const double v = sample_inverse_gaussian(p.delta / g, p.delta * p.delta, rng);
  return p.mu + p.beta * v + std::sqrt(v) * rng.normal();
}

std::vector<double> nig_sample(const NigParams& p, std::size_t n, std::uint64_t seed) {
  p.validate();
  if (n < 1) throw ValidationError("nig_sample: n must be at least 1");
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = sample_nig(p, rng);
  return out;
}

double nig_loglik(std::span<const double> data, const NigParams& p) {
  p.validate();
  double ll = 0.0;
  for (double x : data) ll += nig_logpdf(x, p);
  return ll;
}

namespace {

struct Moments {
  double mean, var, skew, kurt;
};

Moments sample_moments(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  double m = 0.0;
  for (double v : x) m += v;
  m /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = v - m, d2 = d * d;
    m2 += d2;
    m3 += d2 * d;
    m4 += d2 * d2;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  return {m, m2, m3 / std::pow(m2, 1.5), m4 / (m2 * m2) - 3.0};
}

NigParams unpack(const Eigen::VectorXd& u) {
  NigParams p;
  p.alpha = std::exp(u(0));
  p.beta = p.alpha * std::tanh(u(1));
  p.delta = std::exp(u(2));
  p.mu = u(3);
  return p;
}

// Negative log-likelihood and its gradient in (log alpha, atanh(beta/alpha), log delta, mu).
double nig_nll_grad(std::span<const double> data, const Eigen::VectorXd& u, Eigen::VectorXd& grad) {
  const NigParams p = unpack(u);
  const double a = p.alpha, b = p.beta, dl = p.delta, g = std::sqrt((a - b) * (a + b));
  if (!(g > 0.0) || !std::isfinite(g) || !std::isfinite(dl)) return std::numeric_limits<double>::infinity();
  double ll = 0.0, ga = 0.0, gb = 0.0, gd = 0.0, gm = 0.0;
  const double base = std::log(a * dl / std::numbers::pi) + dl * g;
  for (double x : data) {
    const double d = x - p.mu;
    const double q = std::hypot(dl, d);
    const double z = a * q;
    ll += base + log_bessel_k1(z) - std::log(q) + b * d;
    const double dlogk = -bessel_k0_over_k1(z) - 1.0 / z;
    ga += 1.0 / a + dlogk * q + dl * a / g;
    gb += -dl * b / g + d;
    gd += 1.0 / dl + dlogk * a * dl / q - dl / (q * q) + g;
    gm += -dlogk * a * d / q + d / (q * q) - b;
  }
  const double th = std::tanh(u(1));
  grad.resize(4);
  grad(0) = -(a * (ga + gb * th));
  grad(1) = -(gb * a * (1.0 - th * th));
  grad(2) = -(gd * dl);
  grad(3) = -gm;
  return std::isfinite(ll) ? -ll : std::numeric_limits<double>::infinity();
}

}  // namespace

NigFit nig_fit(std::span<const double> data) {
  if (data.size() < 20) throw ValidationError("nig_fit needs at least 20 observations, got " + std::to_string(data.size()));
  for (double v : data)
    if (!std::isfinite(v)) throw ValidationError("nig_fit: data contains non-finite values");
  const Moments mo = sample_moments(data);
  if (!(mo.var > 0.0)) throw DomainError("nig_fit: zero sample variance");

  NigFit fit;
  double zeta, rho;
  const double denom = mo.kurt - 4.0 * mo.skew * mo.skew / 3.0;
  if (denom > 1e-8) {
    zeta = 3.0 / denom;
    rho = std::clamp(mo.skew * std::sqrt(zeta) / 3.0, -0.95, 0.95);
  } else {
    zeta = 100.0;
    rho = 0.0;
    fit.warnings.push_back("sample kurtosis too low for NIG moments; starting from a near-Gaussian law");
  }
  NigParams m0;
  m0.alpha = std::sqrt(zeta / mo.var) / (1.0 - rho * rho);
  m0.beta = rho * m0.alpha;
  const double g0 = m0.gamma();
  m0.delta = zeta / g0;
  m0.mu = mo.mean - m0.delta * m0.beta / g0;
  fit.moment_params = m0;
  fit.moment_loglik = nig_loglik(data, m0);

  Eigen::VectorXd u0(4);
  u0 << std::log(m0.alpha), std::atanh(m0.beta / m0.alpha), std::log(m0.delta), m0.mu;
  BfgsOptions opt;
  opt.max_iter = 400;
  auto res = minimize_bfgs(
      ObjectiveWithGradient([&](const Eigen::VectorXd& u, Eigen::VectorXd& g) { return nig_nll_grad(data, u, g); }),
      u0, opt);
  fit.converged = res.converged;
  const NigParams refined = unpack(res.x);
  const double ll = std::isfinite(res.f) ? -res.f : -std::numeric_limits<double>::infinity();
  if (ll >= fit.moment_loglik) {
    fit.params = refined;
    fit.loglik = ll;
  } else {
    fit.params = m0;
    fit.loglik = fit.moment_loglik;
  }
  if (!res.converged) fit.warnings.push_back("NIG likelihood maximization stopped before convergence");
  return fit;
}

double MvNigParams::gamma() const { return std::sqrt(alpha * alpha - beta.dot(structure * beta)); }

void MvNigParams::validate() const {
  const int d = dim();
  if (d < 1 || beta.size() != d || structure.rows() != d || structure.cols() != d)
    throw DomainError("multivariate NIG: inconsistent dimensions");
  if (!(alpha > 0.0) || !(delta > 0.0)) throw DomainError("multivariate NIG: alpha and delta must be positive");
  if (!structure.isApprox(structure.transpose(), 1e-12)) throw DomainError("multivariate NIG: Delta must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(structure);
  if (llt.info() != Eigen::Success) throw DomainError("multivariate NIG: Delta must be positive definite");
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  if (std::abs(logdet) > 1e-8) throw DomainError("multivariate NIG: det(Delta) must be 1");
  if (!(alpha * alpha > beta.dot(structure * beta))) throw DomainError("multivariate NIG: need alpha^2 > beta' Delta beta");
}

NigParams MvNigParams::marginal(int i) const {
  const double dii = structure(i, i);
  const double g = gamma();
  NigParams p;
  p.delta = delta * std::sqrt(dii);
  p.beta = (structure * beta)(i) / dii;
  p.alpha = std::sqrt(g * g / dii + p.beta * p.beta);
  p.mu = mu(i);
  return p;
}

namespace {
constexpr double kMaxSkewRatio = 0.99;
}  // namespace

MvNigFit mvnig_fit(const Eigen::MatrixXd& data) {
  const Eigen::Index n = data.rows(), d = data.cols();
  if (d < 2) throw ValidationError("mvnig_fit needs at least 2 coordinates");
  if (n <= d) throw ValidationError("mvnig_fit needs more observations than coordinates");
  if (!data.allFinite()) throw ValidationError("mvnig_fit: data contains non-finite values");

  const Eigen::VectorXd m = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - m.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  const double top = es.eigenvalues().maxCoeff();
  if (!(es.eigenvalues()(0) > 1e-12 * top)) {
    const Eigen::VectorXd v = es.eigenvectors().col(0);
    const double vmax = v.cwiseAbs().maxCoeff();
    std::vector<int> coords;
    std::string names;
    for (Eigen::Index i = 0; i < d; ++i)
      if (std::abs(v(i)) >= 0.05 * vmax) {
        coords.push_back(static_cast<int>(i));
        names += (names.empty() ? "" : ", ") + std::to_string(i);
      }
    throw SingularMatrixError("mvnig_fit: singular covariance; collinear coordinates {" + names + "}", coords);
  }

  MvNigFit out;
  double log_zeta = 0.0;
  std::vector<double> marginal_beta(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<double> col(data.col(j).data(), data.col(j).data() + n);
    out.marginals.push_back(nig_fit(col));
    NigFit& mf = out.marginals.back();
    // With few observations the likelihood often runs off to |beta| -> alpha;
    // such a marginal would leave no room for the others in alpha^2 > beta' Delta beta.
    if (std::abs(mf.params.beta) > kMaxSkewRatio * mf.params.alpha) {
      mf.warnings.push_back("likelihood maximum at the |beta| = alpha boundary; using the moment estimate");
      mf.params = mf.moment_params;
      mf.loglik = mf.moment_loglik;
    }
    const NigParams& p = mf.params;
    log_zeta += std::log(p.delta * p.gamma());
    marginal_beta[static_cast<std::size_t>(j)] = p.beta;
    for (const auto& w : out.marginals.back().warnings) out.warnings.push_back("coordinate " + std::to_string(j) + ": " + w);
  }
  const double zeta = std::exp(log_zeta / static_cast<double>(d));

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const double c = std::exp(logdet / static_cast<double>(d));

  MvNigParams& p = out.params;
  p.structure = cov / c;
  p.structure = 0.5 * (p.structure + p.structure.transpose());
  p.delta = std::sqrt(zeta * c);
  const double g = std::sqrt(zeta / c);
  Eigen::VectorXd b(d);
  for (Eigen::Index i = 0; i < d; ++i) b(i) = marginal_beta[static_cast<std::size_t>(i)] * p.structure(i, i);
  p.beta = p.structure.ldlt().solve(b);
  p.alpha = std::sqrt(g * g + p.beta.dot(b));
  p.mu = m - c * b;
  return out;
}

Eigen::MatrixXd mvnig_sample(const MvNigParams& p, std::size_t n, std::uint64_t seed, unsigned threads) {
  p.validate();
  if (n < 1) throw ValidationError("mvnig_sample: n must be at least 1");
  const int d = p.dim();
  const Eigen::MatrixXd L = p.structure.llt().matrixL();
  const Eigen::VectorXd skew = p.structure * p.beta;
  const double g = p.gamma();
  const double ig_mean = p.delta / g, ig_shape = p.delta * p.delta;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(n), d);
  const std::size_t blocks = (n + kBlockRows - 1) / kBlockRows;
  parallel_blocks(blocks, threads, [&](std::size_t blk) {
    Rng rng(derive_seed(seed, blk));
    Eigen::VectorXd z(d);
    const std::size_t end = std::min(n, (blk + 1) * kBlockRows);
    for (std::size_t r = blk * kBlockRows; r < end; ++r) {
      const double v = sample_inverse_gaussian(ig_mean, ig_shape, rng);
      for (int j = 0; j < d; ++j) z(j) = rng.normal();
      out.row(static_cast<Eigen::Index>(r)) = (p.mu + v * skew + std::sqrt(v) * (L * z)).transpose();
    }
  });
  return out;
}

}  // namespace dwi
