#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace corrlasso {

// Euclidean projection onto the l1 ball of the given radius, exact
// sort-and-threshold method.
Eigen::VectorXd project_l1(const Eigen::VectorXd& v, double radius);

// argmin_x 0.5||x - v||^2 + shift * ||x||_1 over the l1 ball: soft-threshold
// at shift, then, if still infeasible, raise the threshold by the smallest
// extra amount that lands on the ball (monotone bisection on the shift).
Eigen::VectorXd prox_l1_in_ball(const Eigen::VectorXd& v, double shift,
                                double radius);

enum class EtaPolicy {
  theory,    // 4 * lambda_max of the population design covariance
  spectral,  // operator norm of the quadratic coefficient, power iteration
};

double choose_eta(const Eigen::MatrixXd& m, EtaPolicy policy);

struct PgdOptions {
  double eta = 0.0;  // <= 0 means choose spectrally from the quadratic term
  double tol = 1e-9;
  int max_iter = 10000;
  bool store_iterates = false;
  Eigen::VectorXd beta0;      // empty = start at zero
  Eigen::VectorXd reference;  // empty = no per-iterate distances
};

struct OptimizerTrace {
  std::vector<double> objective;          // one entry per iterate incl. start
  std::vector<double> dist_to_reference;  // filled when a reference is given
  std::vector<Eigen::VectorXd> iterates;  // filled when requested
  int iterations = 0;
  bool converged = false;
  double gamma_hat = std::numeric_limits<double>::quiet_NaN();
  int plateau_index = -1;
};

struct PgdResult {
  Eigen::VectorXd beta;
  OptimizerTrace trace;
};

PgdResult pgd_constrained(const Eigen::MatrixXd& g, const Eigen::VectorXd& c,
                          double radius, const PgdOptions& opts = {});

// composite objective: adds lambda * ||beta||_1 inside a side ball that keeps
// iterates bounded even when the quadratic term is indefinite
PgdResult pgd_lagrangian(const Eigen::MatrixXd& g, const Eigen::VectorXd& c,
                         double lambda, double radius,
                         const PgdOptions& opts = {});

struct ContractionFit {
  double gamma = 0.0;
  int plateau_index = 0;
};

// Geometric-decay fit of a distance trace: the plateau starts at the first
// step that fails to shrink the distance by at least 1%, the contraction
// factor is exp of the least-squares slope of the log distances before it.
// Needs at least 10 pre-plateau points.
ContractionFit fit_contraction(const std::vector<double>& dist);

}  // namespace corrlasso
