#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corrlasso/data.hpp"

namespace corrlasso {

enum class PairKind {
  lasso,
  additive,
  additive_estimated,
  missing_scalar,
  missing_general,
  missing_estimated,
  multiplicative,
};

// The quadratic/linear coefficient pair of the corrected least-squares
// objective 0.5 b' cov b - cross' b. cov is symmetric by construction but
// can be indefinite whenever n < p and the corruption subtracts mass.
struct SurrogatePair {
  Eigen::MatrixXd cov;
  Eigen::VectorXd cross;
  PairKind kind = PairKind::lasso;
  int n_used = 0;
};

SurrogatePair lasso_pair(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

SurrogatePair additive_pair(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& sigma_w);

// sigma_w replaced by W0' W0 / n0 from an independent sample of pure noise
SurrogatePair additive_pair_estimated(const Eigen::MatrixXd& z,
                                      const Eigen::VectorXd& y,
                                      const Eigen::MatrixXd& w0);

// Pooled within-subject scatter from replicate measurements; each group is
// k_i x p with k_i >= 2, denominator sum_i (k_i - 1).
Eigen::MatrixXd replicate_covariance(const std::vector<Eigen::MatrixXd>& groups);

SurrogatePair missing_pair(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                           double rho);

SurrogatePair missing_pair_general(const Eigen::MatrixXd& z,
                                   const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& rho);

struct EstimatedMissingPair {
  SurrogatePair pair;
  Eigen::VectorXd rho_hat;
};

// rho estimated per column from observed counts in the mask
EstimatedMissingPair missing_pair_estimated(const Eigen::MatrixXd& z,
                                            const Eigen::MatrixXd& mask,
                                            const Eigen::VectorXd& y);

SurrogatePair multiplicative_pair(const Eigen::MatrixXd& z,
                                  const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& mult_mean,
                                  const Eigen::MatrixXd& mult_second);

struct DeviationReport {
  double lhs_combined = 0.0;   // max-norm of cross - cov * beta
  double lhs_cov_part = 0.0;   // max-norm of (cov - sigma_x) * beta
  double lhs_cross_part = 0.0; // max-norm of cross - sigma_x * beta
  double bound = 0.0;          // phi * sqrt(log(p) / n)
  bool combined_ok = false;
  bool split_ok = false;
};

DeviationReport check_deviation(const SurrogatePair& pair,
                                const Eigen::VectorXd& beta_star,
                                const Eigen::MatrixXd& sigma_x, double phi);

// Deviation scale phi for the standard corruption settings, all of the form
// c0 * (noise scale) * ||beta*||_2. sigma_x is the sub-gaussian scale of the
// clean design (sqrt of its covariance operator norm).
double phi_additive_iid(double sigma_x, double sigma_w, double sigma_eps,
                        double beta_norm, double c0);
double phi_missing_iid(double sigma_x, double rho_max, double sigma_eps,
                       double beta_norm, double c0);
double phi_additive_var(double sigma_x_op, double sigma_w_op, double a_op,
                        double sigma_eps, double beta_norm, double c0);
double phi_missing_var(double sigma_x_op, double a_op, double rho_max,
                       double sigma_eps, double beta_norm, double c0);

}  // namespace corrlasso
