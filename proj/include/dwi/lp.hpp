#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace dwi {

// minimize c'x  subject to  A x = b,  lower <= x <= upper  (bounds may be infinite)
struct LpProblem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::IterationLimit;
  Eigen::VectorXd x;
  Eigen::VectorXd duals;  // y with c - A'y >= 0 at lower bounds, <= 0 at upper bounds
  double objective = 0.0;
  int iterations = 0;
};

struct LpOptions {
  int max_iter = 200000;
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-9;
  int refactor_every = 64;
  int stall_limit = 50;  // degenerate pivots before switching to Bland's rule
};

// Two-phase bounded-variable revised simplex with an explicit basis inverse,
// product-form updates and periodic refactorization. `start_at_upper`, when
// given, lists structural variables that begin nonbasic at their upper bound.
LpResult solve_lp(const LpProblem& lp, const LpOptions& opt = {}, const std::vector<std::uint8_t>* start_at_upper = nullptr);

}  // namespace dwi
