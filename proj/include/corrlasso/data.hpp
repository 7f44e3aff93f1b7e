#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "corrlasso/rng.hpp"

namespace corrlasso {

enum class DesignMode { iid, var };
enum class CorruptionKind { none, additive, missing, multiplicative };

// Design distribution for the clean covariates. In var mode rows follow
// x_{i+1} = A x_i + v_i with v_i ~ N(0, sigma_v), started from the
// stationary distribution; sigma_x must then solve
// sigma_x = A sigma_x A^T + sigma_v.
struct DesignSpec {
  int n = 0;
  int p = 0;
  DesignMode mode = DesignMode::iid;
  Eigen::MatrixXd sigma_x;
  Eigen::MatrixXd var_a;    // var mode only, operator norm < 1
  Eigen::MatrixXd sigma_v;  // var mode only
};

struct GroundTruth {
  Eigen::VectorXd beta;  // k-sparse, equal magnitudes, random signs
  int k = 0;
  double sigma_eps = 0.0;
  std::uint64_t seed = 0;
};

// i.i.d. uniform[lo, hi] multiplicative mask entries
struct MultiplicativeSpec {
  double lo = 0.0;
  double hi = 1.0;
  double mean() const { return 0.5 * (lo + hi); }
  double second_moment() const { return (lo * lo + lo * hi + hi * hi) / 3.0; }
};

struct CorruptionModel {
  CorruptionKind kind = CorruptionKind::none;
  Eigen::MatrixXd sigma_w;  // additive observation noise covariance
  Eigen::VectorXd rho;      // per-column missing probability, entries in [0,1)
  MultiplicativeSpec mult;
};

struct CorruptedDataset {
  Eigen::MatrixXd x;     // clean design, kept for diagnostics only
  Eigen::MatrixXd z;     // observed design; missing entries stored as 0
  Eigen::VectorXd y;
  Eigen::MatrixXd mask;  // n x p of 0/1 for missing corruption, else 0 x 0
  CorruptionModel model;
  std::uint64_t seed = 0;
};

// Fixed-point iteration S <- A S A^T + sigma_v from S = sigma_v.
// Throws if the drift has operator norm >= 1 or the iteration stalls.
Eigen::MatrixXd solve_stationary_covariance(const Eigen::MatrixXd& a,
                                            const Eigen::MatrixXd& sigma_v);

double operator_norm(const Eigen::MatrixXd& m);

Eigen::MatrixXd generate_design(const DesignSpec& spec, SplitMix64& rng);

Eigen::VectorXd generate_sparse_beta(int p, int k, double norm_target,
                                     SplitMix64& rng);

Eigen::VectorXd generate_response(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& beta,
                                  double sigma_eps, SplitMix64& rng);

Eigen::MatrixXd apply_additive_noise(const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& sigma_w,
                                     SplitMix64& rng);

// Observed entries keep their value, missing entries are zeroed and recorded
// in the mask (1 = observed). Column j is missing with probability rho[j].
void apply_missing(const Eigen::MatrixXd& x, const Eigen::VectorXd& rho,
                   SplitMix64& rng, Eigen::MatrixXd* z, Eigen::MatrixXd* mask);

Eigen::MatrixXd apply_multiplicative(const Eigen::MatrixXd& x,
                                     const MultiplicativeSpec& mult,
                                     SplitMix64& rng);

// Flat config with the documented keys:
// n, p, k, mode, sigma_eps, sigma_w, rho, A_norm, seed.
// Corruption is inferred: sigma_w > 0 selects additive, rho > 0 missing.
struct DatasetConfig {
  int n = 0;
  int p = 0;
  int k = 0;
  std::string mode = "iid";  // "iid" or "var"
  double sigma_eps = 0.0;
  double sigma_w = 0.0;
  double rho = 0.0;
  double a_norm = 0.0;  // serialized as "A_norm"
  std::uint64_t seed = 0;
};

DatasetConfig dataset_config_from_json(const std::string& text);
std::string dataset_config_to_json(const DatasetConfig& cfg);

struct Instance {
  DesignSpec design;
  GroundTruth truth;
  CorruptedDataset data;
};

// Builds the whole instance from the config: identity sigma_x (var mode:
// orthogonal drift scaled to A_norm, sigma_v = (1 - A_norm^2) I so the
// stationary covariance stays the identity), beta on a uniform random
// support, then the selected corruption. Sub-streams are split off the seed
// so the draws are independent of each other.
Instance make_dataset(const DatasetConfig& cfg);

// z columns first, then one 0/1 column per design column with suffix "_mask"
// when the dataset carries one. y goes to its own single-column file.
void write_design_csv(const CorruptedDataset& data, const std::string& path);
void write_response_csv(const CorruptedDataset& data, const std::string& path);

}  // namespace corrlasso
