#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dwi/rng.hpp"

namespace dwi {

// Normal-inverse Gaussian law (generalized hyperbolic with lambda = -1/2).
struct NigParams {
  static constexpr double lambda = -0.5;
  double alpha = 1.0;
  double beta = 0.0;
  double delta = 1.0;
  double mu = 0.0;

  double gamma() const;
  void validate() const;  // throws DomainError
  double mean() const;
  double variance() const;
  double skewness() const;
  double excess_kurtosis() const;
};

// log K1 and the ratio K0/K1, switching to the large-argument expansion where
// the direct Bessel values underflow.
double log_bessel_k1(double z);
double bessel_k0_over_k1(double z);

double nig_logpdf(double x, const NigParams& p);
double nig_pdf(double x, const NigParams& p);
// Log of E[exp(uX)]; requires |beta + u| < alpha.
double nig_log_mgf(double u, const NigParams& p);
double nig_mgf(double u, const NigParams& p);

// Inverse Gaussian with the given mean and shape, by transformation with
// rejection (Michael, Schucany and Haas).
double sample_inverse_gaussian(double mean, double shape, Rng& rng);
double sample_nig(const NigParams& p, Rng& rng);
std::vector<double> nig_sample(const NigParams& p, std::size_t n, std::uint64_t seed);

struct NigFit {
  NigParams params;
  NigParams moment_params;
  double loglik = 0.0;
  double moment_loglik = 0.0;
  bool converged = false;
  std::vector<std::string> warnings;
};

double nig_loglik(std::span<const double> data, const NigParams& p);
// Method-of-moments start refined by maximum likelihood.
NigFit nig_fit(std::span<const double> data);

// X = mu + V * Delta beta + sqrt(V) * chol(Delta) Z with one shared V ~ IG.
struct MvNigParams {
  double alpha = 1.0;
  double delta = 1.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd mu;
  Eigen::MatrixXd structure;  // Delta, det = 1

  int dim() const { return static_cast<int>(mu.size()); }
  double gamma() const;
  void validate() const;
  NigParams marginal(int i) const;
};

struct MvNigFit {
  MvNigParams params;
  std::vector<NigFit> marginals;
  std::vector<std::string> warnings;
};

// Rows are observations. Marginal NIG fits fix the mixing law; Delta is the
// sample covariance rescaled to unit determinant.
MvNigFit mvnig_fit(const Eigen::MatrixXd& data);

// Rows are draws. Generated in fixed blocks with per-block seeds, so the result
// does not depend on `threads`.
Eigen::MatrixXd mvnig_sample(const MvNigParams& p, std::size_t n, std::uint64_t seed, unsigned threads = 1);

}  // namespace dwi
