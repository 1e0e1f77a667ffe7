#pragma once

#include <Eigen/Dense>
#include <functional>

namespace dwi {

struct BfgsOptions {
  int max_iter = 500;
  double grad_tol = 1e-6;     // on the infinity norm, scaled by 1 + |f|
  double f_tol = 1e-13;       // relative function change
  double step_tol = 1e-12;
  double fd_step = 1e-5;      // relative central-difference step
};

struct MinimizeResult {
  Eigen::VectorXd x;
  double f = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

using Objective = std::function<double(const Eigen::VectorXd&)>;
using ObjectiveWithGradient = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

// Central differences; non-finite evaluations are treated as +infinity.
Eigen::VectorXd numeric_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-5);

// Quasi-Newton minimization with Armijo backtracking. The objective may return
// +inf (or NaN) for infeasible points; the line search backs away from them.
MinimizeResult minimize_bfgs(const ObjectiveWithGradient& f, Eigen::VectorXd x0, const BfgsOptions& opt = {});
MinimizeResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opt = {});

}  // namespace dwi
