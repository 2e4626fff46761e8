// SPDX-License-Identifier: Apache-2.0
//
// Dense two-phase simplex for small linear programs in standard form.
#pragma once

#include <Eigen/Core>

namespace doafoundry {

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
};

/// min c^T x  s.t.  A x = b, x >= 0. Bland's rule keeps it cycle-free.
/// Throws SolverFailed when infeasible, unbounded, or past the pivot cap.
LpSolution simplex_minimize(const Eigen::VectorXd& c, const Eigen::MatrixXd& a,
                            const Eigen::VectorXd& b, int max_pivots = 100000);

}  // namespace doafoundry
