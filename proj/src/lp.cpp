// SPDX-License-Identifier: Apache-2.0
#include "doafoundry/lp.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doafoundry/error.hpp"

namespace doafoundry {

namespace {

constexpr double kEps = 1e-10;
constexpr double kRayEps = 1e-6;

// Tableau rows 0..m-1 are constraints, row m the reduced costs; last column is the rhs.
class Tableau {
 public:
  // `system` holds the untransformed constraint rows (rhs last) and `cost` the
  // matching objective row; both are used to rebuild the tableau from scratch.
  Tableau(Eigen::MatrixXd t, std::vector<Eigen::Index> basis, Eigen::MatrixXd system = {},
          Eigen::RowVectorXd cost = {})
      : t_(std::move(t)), basis_(std::move(basis)), system_(std::move(system)), cost_(std::move(cost)) {}

  Eigen::MatrixXd& data() { return t_; }
  std::vector<Eigen::Index>& basis() { return basis_; }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index rhs() const { return t_.cols() - 1; }

  void pivot(Eigen::Index r, Eigen::Index col) {
    t_.row(r) /= t_(r, col);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i != r && t_(i, col) != 0.0) t_.row(i) -= t_(i, col) * t_.row(r);
    }
    basis_[static_cast<std::size_t>(r)] = col;
  }

  // Recomputes B^-1 [A | b] and the reduced costs for the current basis,
  // discarding accumulated round-off. False when no system is attached.
  bool refactor() {
    const Eigen::Index m = rows();
    if (system_.rows() != m || m == 0) return false;
    Eigen::MatrixXd b(m, m);
    Eigen::RowVectorXd cb(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      b.col(i) = system_.col(basis_[static_cast<std::size_t>(i)]);
      cb(i) = cost_(basis_[static_cast<std::size_t>(i)]);
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(b);
    const Eigen::MatrixXd x = lu.solve(system_);
    if (!x.allFinite()) return false;
    t_.topRows(m) = x;
    t_.row(m) = cost_ - cb * x;
    return true;
  }

  // Runs until optimal over the first `columns` columns; returns pivots used.
  int optimize(Eigen::Index columns, int max_pivots) {
    const Eigen::Index m = rows();
    bool fresh = false;
    for (int it = 0; it < max_pivots; ++it) {
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < columns; ++j) {
        if (t_(m, j) < -kEps) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return it;
      Eigen::Index leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < m; ++i) {
        if (t_(i, enter) > kEps) {
          const double ratio = t_(i, rhs()) / t_(i, enter);
          if (leave < 0 || ratio < best - kEps) {
            best = ratio;
            leave = i;
          } else if (ratio <= best + kEps &&
                     basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)]) {
            best = std::min(best, ratio);
            leave = i;
          }
        }
      }
      if (leave < 0) {
        if (!fresh && refactor()) {
          fresh = true;
          continue;
        }
        // A ray with round-off sized cost is not an improving direction.
        if (t_(m, enter) > -kRayEps) {
          t_(m, enter) = 0.0;
          continue;
        }
        throw Error(ErrorCode::SolverFailed, "linear program is unbounded");
      }
      pivot(leave, enter);
      fresh = false;
    }
    throw Error(ErrorCode::SolverFailed, "simplex pivot cap reached");
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  Eigen::MatrixXd system_;
  Eigen::RowVectorXd cost_;
};

}  // namespace

LpSolution simplex_minimize(const Eigen::VectorXd& c, const Eigen::MatrixXd& a,
                            const Eigen::VectorXd& b, int max_pivots) {
  const Eigen::Index m = a.rows(), n = a.cols();
  if (c.size() != n || b.size() != m) throw Error(ErrorCode::InvalidArgument, "LP dimensions disagree");

  // Phase one: artificial variables n..n+m-1 on rows with b >= 0.
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    t.row(i).head(n) = sign * a.row(i);
    t(i, n + i) = 1.0;
    t(i, n + m) = sign * b(i);
    basis[static_cast<std::size_t>(i)] = n + i;
  }
  Eigen::RowVectorXd cost1 = Eigen::RowVectorXd::Zero(n + m + 1);
  cost1.segment(n, m).setOnes();
  Eigen::MatrixXd system1 = t.topRows(m);
  for (Eigen::Index i = 0; i < m; ++i) t.row(m) -= t.row(i);
  for (Eigen::Index i = 0; i < m; ++i) t(m, n + i) = 0.0;

  Tableau tab(std::move(t), std::move(basis), system1, cost1);
  int pivots = tab.optimize(n + m, max_pivots);
  if (-tab.data()(m, n + m) > 1e-8 * std::max(1.0, b.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::SolverFailed, "linear program is infeasible");
  }
  // Drive remaining artificials out of the basis; rows where that is impossible are redundant.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (tab.basis()[static_cast<std::size_t>(i)] >= n) {
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (std::abs(tab.data()(i, j)) > 1e-9) {
          col = j;
          break;
        }
      }
      if (col < 0) continue;
      tab.pivot(i, col);
      ++pivots;
    }
    keep.push_back(i);
  }

  // Phase two on the reduced tableau without artificial columns.
  const auto rows = static_cast<Eigen::Index>(keep.size());
  Eigen::MatrixXd t2 = Eigen::MatrixXd::Zero(rows + 1, n + 1);
  std::vector<Eigen::Index> basis2;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index i = keep[static_cast<std::size_t>(r)];
    t2.row(r).head(n) = tab.data().row(i).head(n);
    t2(r, n) = tab.data()(i, n + m);
    basis2.push_back(tab.basis()[static_cast<std::size_t>(i)]);
  }
  t2.row(rows).head(n) = c.transpose();
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index j = basis2[static_cast<std::size_t>(r)];
    t2.row(rows) -= c(j) * t2.row(r);
  }
  Eigen::MatrixXd system2;
  Eigen::RowVectorXd cost2;
  if (rows == m) {
    // No redundant rows: the sign-adjusted original rows describe phase two exactly.
    system2.resize(m, n + 1);
    system2 << system1.leftCols(n), system1.col(n + m);
    cost2 = Eigen::RowVectorXd::Zero(n + 1);
    cost2.head(n) = c.transpose();
  }
  Tableau tab2(std::move(t2), std::move(basis2), std::move(system2), std::move(cost2));
  pivots += tab2.optimize(n, max_pivots);

  LpSolution sol;
  sol.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index r = 0; r < rows; ++r) {
    sol.x(tab2.basis()[static_cast<std::size_t>(r)]) = tab2.data()(r, n);
  }
  sol.objective = c.dot(sol.x);
  sol.iterations = pivots;
  return sol;
}

}  // namespace doafoundry
