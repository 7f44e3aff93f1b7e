#include "corrlasso/surrogates.hpp"

#include <cmath>
#include <stdexcept>

namespace corrlasso {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kDivisorFloor = 1e-12;

void check_xy(const MatrixXd& x, const VectorXd& y) {
  if (x.rows() == 0) throw std::invalid_argument("design has no rows");
  if (y.size() != x.rows())
    throw std::invalid_argument("response length must match row count");
}

MatrixXd symmetrized_gram(const MatrixXd& z) {
  MatrixXd g = z.transpose() * z / static_cast<double>(z.rows());
  return 0.5 * (g + g.transpose());
}

void check_symmetric(const MatrixXd& m, const char* what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument(std::string(what) + " must be symmetric");
}

double checked_divisor(double d, const char* what) {
  if (std::abs(d) < kDivisorFloor)
    throw std::invalid_argument(std::string(what) +
                                " has an entry too close to zero");
  return d;
}

}  // namespace

SurrogatePair lasso_pair(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  check_xy(x, y);
  SurrogatePair out;
  out.cov = symmetrized_gram(x);
  out.cross = x.transpose() * y / static_cast<double>(x.rows());
  out.kind = PairKind::lasso;
  out.n_used = static_cast<int>(x.rows());
  return out;
}

SurrogatePair additive_pair(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                            const Eigen::MatrixXd& sigma_w) {
  check_xy(z, y);
  if (sigma_w.rows() != z.cols() || sigma_w.cols() != z.cols())
    throw std::invalid_argument("sigma_w must be p x p");
  check_symmetric(sigma_w, "sigma_w");
  SurrogatePair out;
  out.cov = symmetrized_gram(z) - 0.5 * (sigma_w + sigma_w.transpose());
  out.cross = z.transpose() * y / static_cast<double>(z.rows());
  out.kind = PairKind::additive;
  out.n_used = static_cast<int>(z.rows());
  return out;
}

SurrogatePair additive_pair_estimated(const Eigen::MatrixXd& z,
                                      const Eigen::VectorXd& y,
                                      const Eigen::MatrixXd& w0) {
  if (w0.rows() < 2) throw std::invalid_argument("noise sample needs rows");
  if (w0.cols() != z.cols())
    throw std::invalid_argument("noise sample column count must match design");
  SurrogatePair out = additive_pair(z, y, symmetrized_gram(w0));
  out.kind = PairKind::additive_estimated;
  return out;
}

Eigen::MatrixXd replicate_covariance(
    const std::vector<Eigen::MatrixXd>& groups) {
  if (groups.empty()) throw std::invalid_argument("no replicate groups");
  const auto p = groups.front().cols();
  MatrixXd scatter = MatrixXd::Zero(p, p);
  long denom = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const MatrixXd& g = groups[i];
    if (g.cols() != p)
      throw std::invalid_argument("replicate groups must share column count");
    if (g.rows() < 2)
      throw std::invalid_argument("replicate group " + std::to_string(i) +
                                  " has fewer than 2 rows");
    const Eigen::RowVectorXd mean = g.colwise().mean();
    const MatrixXd centered = g.rowwise() - mean;
    scatter += centered.transpose() * centered;
    denom += g.rows() - 1;
  }
  return scatter / static_cast<double>(denom);
}

SurrogatePair missing_pair(const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
                           double rho) {
  check_xy(z, y);
  if (rho < 0.0 || rho >= 1.0)
    throw std::invalid_argument("rho must lie in [0, 1)");
  checked_divisor(1.0 - rho, "1 - rho");
  const MatrixXd zt = z / (1.0 - rho);
  MatrixXd m = symmetrized_gram(zt);
  SurrogatePair out;
  out.cov = m - rho * MatrixXd(m.diagonal().asDiagonal());
  out.cross = zt.transpose() * y / static_cast<double>(z.rows());
  out.kind = PairKind::missing_scalar;
  out.n_used = static_cast<int>(z.rows());
  return out;
}

SurrogatePair missing_pair_general(const Eigen::MatrixXd& z,
                                   const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& rho) {
  check_xy(z, y);
  if (rho.size() != z.cols())
    throw std::invalid_argument("rho must have one entry per column");
  for (int j = 0; j < rho.size(); ++j)
    if (rho[j] < 0.0 || rho[j] >= 1.0)
      throw std::invalid_argument("rho entries must lie in [0, 1)");

  const int p = static_cast<int>(z.cols());
  SurrogatePair out;
  out.cov = symmetrized_gram(z);
  out.cross = z.transpose() * y / static_cast<double>(z.rows());
  for (int j = 0; j < p; ++j) {
    const double dj = checked_divisor(1.0 - rho[j], "1 - rho");
    for (int i = 0; i < p; ++i) {
      const double dij =
          (i == j) ? dj : checked_divisor((1.0 - rho[i]) * dj, "observation probability product");
      out.cov(i, j) /= dij;
    }
    out.cross[j] /= dj;
  }
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  out.kind = PairKind::missing_general;
  out.n_used = static_cast<int>(z.rows());
  return out;
}

EstimatedMissingPair missing_pair_estimated(const Eigen::MatrixXd& z,
                                            const Eigen::MatrixXd& mask,
                                            const Eigen::VectorXd& y) {
  if (mask.rows() != z.rows() || mask.cols() != z.cols())
    throw std::invalid_argument("mask shape must match design");
  const double n = static_cast<double>(z.rows());
  VectorXd rho_hat(z.cols());
  for (int j = 0; j < z.cols(); ++j) {
    const double observed = mask.col(j).sum();
    if (observed <= 0.0)
      throw std::invalid_argument("column " + std::to_string(j) +
                                  " is never observed");
    rho_hat[j] = 1.0 - observed / n;
  }
  EstimatedMissingPair out{missing_pair_general(z, y, rho_hat), rho_hat};
  out.pair.kind = PairKind::missing_estimated;
  return out;
}

SurrogatePair multiplicative_pair(const Eigen::MatrixXd& z,
                                  const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& mult_mean,
                                  const Eigen::MatrixXd& mult_second) {
  check_xy(z, y);
  const int p = static_cast<int>(z.cols());
  if (mult_mean.size() != p || mult_second.rows() != p || mult_second.cols() != p)
    throw std::invalid_argument("moment shapes must match design columns");
  check_symmetric(mult_second, "second moment matrix");

  SurrogatePair out;
  out.cov = symmetrized_gram(z);
  out.cross = z.transpose() * y / static_cast<double>(z.rows());
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i)
      out.cov(i, j) /= checked_divisor(mult_second(i, j), "second moment matrix");
    out.cross[j] /= checked_divisor(mult_mean[j], "mean mask vector");
  }
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  out.kind = PairKind::multiplicative;
  out.n_used = static_cast<int>(z.rows());
  return out;
}

DeviationReport check_deviation(const SurrogatePair& pair,
                                const Eigen::VectorXd& beta_star,
                                const Eigen::MatrixXd& sigma_x, double phi) {
  if (beta_star.size() != pair.cov.rows())
    throw std::invalid_argument("beta dimension must match the pair");
  if (sigma_x.rows() != pair.cov.rows() || sigma_x.cols() != pair.cov.cols())
    throw std::invalid_argument("sigma_x dimension must match the pair");
  if (pair.n_used <= 0) throw std::invalid_argument("pair has no sample size");

  const double p = static_cast<double>(pair.cov.rows());
  DeviationReport rep;
  rep.lhs_combined =
      (pair.cross - pair.cov * beta_star).cwiseAbs().maxCoeff();
  rep.lhs_cov_part =
      ((pair.cov - sigma_x) * beta_star).cwiseAbs().maxCoeff();
  rep.lhs_cross_part =
      (pair.cross - sigma_x * beta_star).cwiseAbs().maxCoeff();
  rep.bound = phi * std::sqrt(std::log(p) / pair.n_used);
  rep.combined_ok = rep.lhs_combined <= rep.bound;
  rep.split_ok = rep.lhs_cov_part <= rep.bound && rep.lhs_cross_part <= rep.bound;
  return rep;
}

double phi_additive_iid(double sigma_x, double sigma_w, double sigma_eps,
                        double beta_norm, double c0) {
  const double sigma_z = std::sqrt(sigma_x * sigma_x + sigma_w * sigma_w);
  return c0 * sigma_z * (sigma_w + sigma_eps) * beta_norm;
}

double phi_missing_iid(double sigma_x, double rho_max, double sigma_eps,
                       double beta_norm, double c0) {
  const double s = sigma_x / (1.0 - rho_max);
  return c0 * s * (sigma_eps + s) * beta_norm;
}

double phi_additive_var(double sigma_x_op, double sigma_w_op, double a_op,
                        double sigma_eps, double beta_norm, double c0) {
  const double zeta2 = sigma_w_op + 2.0 * sigma_x_op / (1.0 - a_op);
  const double zeta = std::sqrt(zeta2);
  return c0 * (sigma_eps * zeta + zeta2) * beta_norm;
}

double phi_missing_var(double sigma_x_op, double a_op, double rho_max,
                       double sigma_eps, double beta_norm, double c0) {
  const double zeta2 =
      2.0 * sigma_x_op / ((1.0 - a_op) * (1.0 - rho_max) * (1.0 - rho_max));
  const double zeta = std::sqrt(zeta2);
  return c0 * (sigma_eps * zeta + zeta2) * beta_norm;
}

}  // namespace corrlasso
