#pragma once

#include <Eigen/Dense>
#include <vector>

#include "corrlasso/rng.hpp"

namespace corrlasso {

// Curvature summary for the quadratic term: on sparse directions the form
// behaves like alpha * ||theta||_2^2 up to a tau * ||theta||_1^2 slack,
// from below (alpha_lower, tau_lower) and above (alpha_upper, tau_upper).
struct ReConstants {
  double alpha_lower = 0.0;
  double alpha_upper = 0.0;
  double tau_lower = 0.0;
  double tau_upper = 0.0;
  enum class Method { exact_enumeration, sampled } method = Method::sampled;
  int probes_used = 0;
};

struct ReCheck {
  int violations = 0;
  int total = 0;
  double worst_margin = 0.0;  // most negative slack seen, 0 if none
  Eigen::VectorXd worst_theta;
};

double quadratic_form(const Eigen::MatrixXd& g, const Eigen::VectorXd& theta);

// eigenvalues in ascending order; the input must be symmetric
Eigen::VectorXd spectrum(const Eigen::MatrixXd& g);

// unit-norm probe directions, cycling k-sparse, k-sparse, dense,
// difference-of-two-k-sparse so any prefix keeps the advertised mix
std::vector<Eigen::VectorXd> make_probes(int p, int k, int count,
                                         SplitMix64& rng);

ReCheck verify_lower_re(const Eigen::MatrixXd& g, double alpha_lower,
                        double tau_lower,
                        const std::vector<Eigen::VectorXd>& probes);

// exact_enumeration scans every k-support eigenvalue extreme (guarded by a
// one-million support budget); sampled takes Rayleigh extremes over the
// k-sparse probes. tau fitted by nonnegative least squares of the leftover
// residual against ||theta||_1^2 over the full probe mix in both modes.
ReConstants estimate_re_constants(const Eigen::MatrixXd& g, int k,
                                  ReConstants::Method method, int probe_count,
                                  SplitMix64& rng);

}  // namespace corrlasso
