#pragma once

#include <Eigen/Dense>

namespace corrlasso {

struct LpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  bool optimal = false;
};

// minimize c'x subject to a x <= b, x >= 0.
// Dense two-phase tableau simplex with Bland's rule, intended for the small
// symmetrization programs only. Throws on infeasibility or iteration cap.
LpResult solve_lp(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                  const Eigen::VectorXd& c);

}  // namespace corrlasso
