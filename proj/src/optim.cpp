#include "dwi/optim.hpp"

#include <cmath>
#include <limits>

namespace dwi {

namespace {

double sanitize(double v) { return std::isfinite(v) ? v : std::numeric_limits<double>::infinity(); }

}  // namespace

Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + h;
    const double fp = sanitize(f(xp));
    xp(i) = x(i) - h;
    const double fm = sanitize(f(xp));
    xp(i) = x(i);
    if (std::isfinite(fp) && std::isfinite(fm)) {
      g(i) = (fp - fm) / (2.0 * h);
    } else {
      // One-sided difference toward the feasible side.
      const double f0 = sanitize(f(x));
      g(i) = std::isfinite(fp) ? (fp - f0) / h : std::isfinite(fm) ? (f0 - fm) / h : 0.0;
    }
  }
  return g;
}

namespace {

using ValueFn = std::function<double(const Eigen::VectorXd&)>;
using GradFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

MinimizeResult bfgs_impl(const ValueFn& value, const GradFn& grad, Eigen::VectorXd x, const BfgsOptions& opt) {
  const Eigen::Index n = x.size();
  MinimizeResult res;
  Eigen::VectorXd g(n);
  double fx = sanitize(value(x));
  if (std::isfinite(fx)) grad(x, g);
  if (!std::isfinite(fx) || !g.allFinite()) {
    res.x = x;
    res.f = fx;
    res.grad_norm = std::numeric_limits<double>::infinity();
    return res;
  }
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  int small_steps = 0;
  Eigen::VectorXd gn(n), xn(n);
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    if (g.lpNorm<Eigen::Infinity>() <= opt.grad_tol * (1.0 + std::abs(fx))) {
      res.converged = true;
      break;
    }
    Eigen::VectorXd d = -H * g;
    double slope = g.dot(d);
    if (!(slope < 0.0)) {
      H.setIdentity();
      d = -g;
      slope = -g.squaredNorm();
    }
    // First iteration: keep the trial step modest in parameter space.
    double t = 1.0;
    if (it == 0) t = std::min(1.0, 1.0 / std::max(1e-12, d.lpNorm<Eigen::Infinity>()));
    double fn = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      xn = x + t * d;
      fn = sanitize(value(xn));
      if (std::isfinite(fn) && fn <= fx + 1e-4 * t * slope) {
        grad(xn, gn);
        if (gn.allFinite()) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (H.isIdentity()) break;
      H.setIdentity();
      continue;
    }
    const Eigen::VectorXd s = xn - x;
    const Eigen::VectorXd y = gn - g;
    const double fchange = std::abs(fx - fn);
    x = xn;
    g = gn;
    const double f_old = fx;
    fx = fn;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (it == 0) H *= sy / y.squaredNorm();
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
      H = (I - rho * s * y.transpose()) * H * (I - rho * y * s.transpose()) + rho * s * s.transpose();
    }
    const bool tiny = fchange <= opt.f_tol * (1.0 + std::abs(f_old)) ||
                      s.lpNorm<Eigen::Infinity>() <= opt.step_tol * (1.0 + x.lpNorm<Eigen::Infinity>());
    small_steps = tiny ? small_steps + 1 : 0;
    if (small_steps >= 3) {
      res.converged = true;
      break;
    }
  }
  res.x = x;
  res.f = fx;
  res.grad_norm = g.lpNorm<Eigen::Infinity>();
  if (!res.converged && res.grad_norm <= opt.grad_tol * (1.0 + std::abs(fx))) res.converged = true;
  return res;
}

}  // namespace

MinimizeResult minimize_bfgs(const ObjectiveWithGradient& f, Eigen::VectorXd x0, const BfgsOptions& opt) {
  Eigen::VectorXd scratch(x0.size());
  return bfgs_impl([&](const Eigen::VectorXd& x) { return f(x, scratch); },
                   [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) { f(x, g); }, std::move(x0), opt);
}

MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opt) {
  return bfgs_impl(f, [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) { g = numeric_gradient(f, x, opt.fd_step); },
                   std::move(x0), opt);
}

}  // namespace dwi
