#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "corrlasso/data.hpp"
#include "corrlasso/optimizer.hpp"
#include "corrlasso/surrogates.hpp"

namespace corrlasso {

enum class GraphFamily { chain, star, erdos_renyi };

// Sparse precision matrices rescaled to operator norm 1. chain: unit
// diagonal with 0.1 on the super/subdiagonal. star: one hub adjacent to
// ceil(0.1 p) leaves, edge weight 0.1. erdos_renyi: off-diagonal entries
// 0.5 with probability k/p, then a ridge delta chosen by bisection so the
// condition number equals p before rescaling.
Eigen::MatrixXd make_graph_precision(GraphFamily family, int p, int k,
                                     SplitMix64& rng);

// max absolute column sum
double l1_operator_norm(const Eigen::MatrixXd& m);

// Coefficient pair for regressing column j of the design on the rest,
// corrected for the dataset's corruption. Indices in the returned pair skip
// column j.
SurrogatePair column_surrogates(const Eigen::MatrixXd& z,
                                const CorruptionModel& model, int j);

enum class SymmetrizePolicy { automatic, lp, average };

// Nearest symmetric matrix in l1 operator norm, solved as a linear program.
Eigen::MatrixXd symmetrize_l1op(const Eigen::MatrixXd& m);

struct PrecisionOptions {
  // oracle radii need the true precision matrix; otherwise one shared
  // lagrangian penalty is used for every column regression
  const Eigen::MatrixXd* truth = nullptr;
  double lambda = 0.0;
  SymmetrizePolicy symmetrize = SymmetrizePolicy::automatic;
  int lp_max_p = 20;  // automatic switches to averaging above this
  PgdOptions pgd;
};

struct PrecisionEstimate {
  Eigen::MatrixXd theta_raw;  // column-wise assembly before symmetrization
  Eigen::MatrixXd theta;
  std::vector<int> iterations;  // per column regression
  bool used_lp = false;
};

// Column-by-column recovery of the inverse covariance from corrupted
// observations: sparse regression of each column on the rest, conversion
// through the inverse residual variance, then symmetrization.
PrecisionEstimate estimate_precision(const Eigen::MatrixXd& z,
                                     const CorruptionModel& model,
                                     const PrecisionOptions& opts);

}  // namespace corrlasso
