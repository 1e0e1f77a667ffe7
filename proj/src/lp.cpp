#include "dwi/lp.hpp"

#include <cmath>
#include <limits>

#include "dwi/error.hpp"

namespace dwi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;

enum class Pos : std::uint8_t { Basic, Lower, Upper, Free };

class Simplex {
 public:
  Simplex(const LpProblem& lp, const LpOptions& opt) : lp_(lp), opt_(opt) {
    m_ = lp.A.rows();
    n_ = lp.A.cols();
    total_ = n_ + m_;
    lo_.resize(total_);
    hi_.resize(total_);
    lo_.head(n_) = lp.lower;
    hi_.head(n_) = lp.upper;
    lo_.tail(m_).setZero();
    hi_.tail(m_).setConstant(kInf);
    x_.setZero(total_);
    pos_.assign(static_cast<std::size_t>(total_), Pos::Lower);
    basis_.resize(static_cast<std::size_t>(m_));
    art_sign_.resize(m_);
  }

  void start(const std::vector<std::uint8_t>* at_upper) {
    for (Eigen::Index j = 0; j < n_; ++j) {
      const bool want_upper = at_upper && static_cast<std::size_t>(j) < at_upper->size() && (*at_upper)[static_cast<std::size_t>(j)];
      if (want_upper && std::isfinite(hi_(j))) {
        x_(j) = hi_(j);
        pos_[static_cast<std::size_t>(j)] = Pos::Upper;
      } else if (std::isfinite(lo_(j))) {
        x_(j) = lo_(j);
        pos_[static_cast<std::size_t>(j)] = Pos::Lower;
      } else if (std::isfinite(hi_(j))) {
        x_(j) = hi_(j);
        pos_[static_cast<std::size_t>(j)] = Pos::Upper;
      } else {
        x_(j) = 0.0;
        pos_[static_cast<std::size_t>(j)] = Pos::Free;
      }
    }
    const Eigen::VectorXd r = lp_.b - lp_.A * x_.head(n_);
    binv_ = Eigen::MatrixXd::Zero(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      art_sign_(i) = r(i) >= 0.0 ? 1.0 : -1.0;
      x_(n_ + i) = std::abs(r(i));
      basis_[static_cast<std::size_t>(i)] = n_ + i;
      pos_[static_cast<std::size_t>(n_ + i)] = Pos::Basic;
      binv_(i, i) = art_sign_(i);
    }
  }

  LpStatus run(const Eigen::VectorXd& cost) {
    int degenerate = 0;
    bool bland = false;
    Eigen::VectorXd y(m_), alpha(m_), reduced(total_);
    const double cscale = 1.0 + cost.cwiseAbs().maxCoeff();
    while (true) {
      if (iterations_ >= opt_.max_iter) return LpStatus::IterationLimit;
      if (since_refactor_ >= opt_.refactor_every) refactor();

      Eigen::VectorXd cb(m_);
      for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
      y.noalias() = binv_.transpose() * cb;
      reduced.head(n_).noalias() = lp_.A.transpose() * y;
      reduced.head(n_) = cost.head(n_) - reduced.head(n_);
      for (Eigen::Index i = 0; i < m_; ++i) reduced(n_ + i) = cost(n_ + i) - art_sign_(i) * y(i);

      Eigen::Index enter = -1;
      double best = 0.0;
      const double tol = opt_.optimality_tol * cscale;
      for (Eigen::Index j = 0; j < total_; ++j) {
        const Pos p = pos_[static_cast<std::size_t>(j)];
        if (p == Pos::Basic || lo_(j) == hi_(j)) continue;
        const double d = reduced(j);
        const bool ok = (p == Pos::Lower && d < -tol) || (p == Pos::Upper && d > tol) || (p == Pos::Free && std::abs(d) > tol);
        if (!ok) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (std::abs(d) > best) {
          best = std::abs(d);
          enter = j;
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      const double dir = reduced(enter) < 0.0 ? 1.0 : -1.0;
      column(enter, alpha);

      double step = hi_(enter) - lo_(enter);  // bound flip
      Eigen::Index leave = -1;
      double leave_pivot = 0.0;
      for (Eigen::Index i = 0; i < m_; ++i) {
        const double delta = dir * alpha(i);
        if (std::abs(delta) <= kPivotTol) continue;
        const Eigen::Index bv = basis_[static_cast<std::size_t>(i)];
        double ratio;
        if (delta > 0.0) {
          if (!std::isfinite(lo_(bv))) continue;
          ratio = (x_(bv) - lo_(bv)) / delta;
        } else {
          if (!std::isfinite(hi_(bv))) continue;
          ratio = (hi_(bv) - x_(bv)) / -delta;
        }
        ratio = std::max(ratio, 0.0);
        const bool tie_better =
            leave >= 0 && ratio <= step + 1e-12 &&
            (bland ? bv < basis_[static_cast<std::size_t>(leave)] : std::abs(delta) > std::abs(leave_pivot));
        if (ratio < step - 1e-12 || tie_better) {
          step = ratio;
          leave = i;
          leave_pivot = delta;
        }
      }
      if (!std::isfinite(step)) return LpStatus::Unbounded;

      ++iterations_;
      x_(enter) += dir * step;
      for (Eigen::Index i = 0; i < m_; ++i) x_(basis_[static_cast<std::size_t>(i)]) -= dir * step * alpha(i);

      if (step * std::abs(reduced(enter)) <= 1e-14 * cscale) {
        if (++degenerate > opt_.stall_limit) bland = true;
      } else {
        degenerate = 0;
        bland = false;
      }

      if (leave < 0) {
        pos_[static_cast<std::size_t>(enter)] = dir > 0.0 ? Pos::Upper : Pos::Lower;
        x_(enter) = dir > 0.0 ? hi_(enter) : lo_(enter);
        continue;
      }
      const Eigen::Index out = basis_[static_cast<std::size_t>(leave)];
      if (leave_pivot > 0.0) {
        x_(out) = lo_(out);
        pos_[static_cast<std::size_t>(out)] = Pos::Lower;
      } else {
        x_(out) = hi_(out);
        pos_[static_cast<std::size_t>(out)] = Pos::Upper;
      }
      basis_[static_cast<std::size_t>(leave)] = enter;
      pos_[static_cast<std::size_t>(enter)] = Pos::Basic;
      pivot(leave, alpha);
    }
  }

  // Phase-1 cleanup: pivot zero-valued artificials out of the basis where a
  // structural column can replace them, then fix all artificials at zero.
  void drive_out_artificials() {
    refactor();
    Eigen::VectorXd alpha(m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[static_cast<std::size_t>(i)] < n_) continue;
      const Eigen::RowVectorXd row = binv_.row(i) * lp_.A;
      Eigen::Index best = -1;
      double mag = 1e-7;
      for (Eigen::Index j = 0; j < n_; ++j) {
        if (pos_[static_cast<std::size_t>(j)] == Pos::Basic) continue;
        if (std::abs(row(j)) > mag) {
          mag = std::abs(row(j));
          best = j;
        }
      }
      if (best < 0) continue;  // redundant row
      column(best, alpha);
      const Eigen::Index out = basis_[static_cast<std::size_t>(i)];
      x_(out) = 0.0;
      pos_[static_cast<std::size_t>(out)] = Pos::Lower;
      basis_[static_cast<std::size_t>(i)] = best;
      pos_[static_cast<std::size_t>(best)] = Pos::Basic;
      pivot(i, alpha);
    }
    for (Eigen::Index i = 0; i < m_; ++i) hi_(n_ + i) = 0.0;
    refactor();
  }

  void refactor() {
    Eigen::MatrixXd B(m_, m_);
    for (Eigen::Index i = 0; i < m_; ++i) {
      const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
      if (j < n_) {
        B.col(i) = lp_.A.col(j);
      } else {
        B.col(i).setZero();
        B(j - n_, i) = art_sign_(j - n_);
      }
    }
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
    binv_ = lu.inverse();
    if (!binv_.allFinite()) throw NumericalError("simplex: basis matrix became singular");
    Eigen::VectorXd rhs = lp_.b;
    for (Eigen::Index j = 0; j < total_; ++j) {
      if (pos_[static_cast<std::size_t>(j)] == Pos::Basic || x_(j) == 0.0) continue;
      if (j < n_)
        rhs -= lp_.A.col(j) * x_(j);
      else
        rhs(j - n_) -= art_sign_(j - n_) * x_(j);
    }
    const Eigen::VectorXd xb = binv_ * rhs;
    for (Eigen::Index i = 0; i < m_; ++i) x_(basis_[static_cast<std::size_t>(i)]) = xb(i);
    since_refactor_ = 0;
  }

  double artificial_sum() const { return x_.tail(m_).sum(); }
  Eigen::VectorXd duals(const Eigen::VectorXd& cost) const {
    Eigen::VectorXd cb(m_);
    for (Eigen::Index i = 0; i < m_; ++i) cb(i) = cost(basis_[static_cast<std::size_t>(i)]);
    return binv_.transpose() * cb;
  }
  const Eigen::VectorXd& x() const { return x_; }
  int iterations() const { return iterations_; }
  Eigen::Index n() const { return n_; }
  Eigen::Index m() const { return m_; }

 private:
  void column(Eigen::Index j, Eigen::VectorXd& out) const {
    if (j < n_)
      out.noalias() = binv_ * lp_.A.col(j);
    else
      out = binv_.col(j - n_) * art_sign_(j - n_);
  }

  void pivot(Eigen::Index r, const Eigen::VectorXd& alpha) {
    const double piv = alpha(r);
    binv_.row(r) /= piv;
    for (Eigen::Index i = 0; i < m_; ++i)
      if (i != r && alpha(i) != 0.0) binv_.row(i) -= alpha(i) * binv_.row(r);
    ++since_refactor_;
  }

  const LpProblem& lp_;
  const LpOptions& opt_;
  Eigen::Index m_ = 0, n_ = 0, total_ = 0;
  Eigen::VectorXd lo_, hi_, x_, art_sign_;
  std::vector<Pos> pos_;
  std::vector<Eigen::Index> basis_;
  Eigen::MatrixXd binv_;
  int iterations_ = 0;
  int since_refactor_ = 0;
};

}  // namespace

LpResult solve_lp(const LpProblem& lp, const LpOptions& opt, const std::vector<std::uint8_t>* start_at_upper) {
  const Eigen::Index m = lp.A.rows(), n = lp.A.cols();
  if (lp.b.size() != m || lp.c.size() != n || lp.lower.size() != n || lp.upper.size() != n)
    throw ValidationError("solve_lp: inconsistent problem dimensions");
  for (Eigen::Index j = 0; j < n; ++j)
    if (lp.lower(j) > lp.upper(j)) throw ValidationError("solve_lp: lower bound exceeds upper bound");

  Simplex sx(lp, opt);
  sx.start(start_at_upper);
  LpResult res;

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  LpStatus st = sx.run(phase1);
  sx.refactor();
  const double infeas_tol = opt.feasibility_tol * (1.0 + lp.b.cwiseAbs().maxCoeff());
  if (st == LpStatus::IterationLimit) {
    res.status = st;
  } else if (sx.artificial_sum() > infeas_tol) {
    res.status = LpStatus::Infeasible;
  } else {
    sx.drive_out_artificials();
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
    phase2.head(n) = lp.c;
    res.status = sx.run(phase2);
    sx.refactor();
    res.duals = sx.duals(phase2);
  }
  res.iterations = sx.iterations();
  res.x = sx.x().head(n);
  res.objective = lp.c.dot(res.x);
  return res;
}

}  // namespace dwi
