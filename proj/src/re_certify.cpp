#include "corrlasso/re_certify.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace corrlasso {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd random_sparse_unit(int p, int k, SplitMix64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v = VectorXd::Zero(p);
  // reservoir-free support draw, fine for k << p and harmless otherwise
  std::vector<int> idx(p);
  for (int i = 0; i < p; ++i) idx[i] = i;
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, p - 1);
    std::swap(idx[i], idx[pick(rng)]);
    v[idx[i]] = normal(rng);
  }
  const double nrm = v.norm();
  if (nrm == 0.0) v[idx[0]] = 1.0;
  return nrm == 0.0 ? v : VectorXd(v / nrm);
}

VectorXd random_dense_unit(int p, SplitMix64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(p);
  for (int i = 0; i < p; ++i) v[i] = normal(rng);
  const double nrm = v.norm();
  return nrm == 0.0 ? VectorXd::Unit(p, 0) : VectorXd(v / nrm);
}

double binomial_guarded(int p, int k) {
  double c = 1.0;
  for (int i = 0; i < k; ++i) {
    c *= static_cast<double>(p - i) / static_cast<double>(i + 1);
    if (c > 1e6) return c;
  }
  return c;
}

}  // namespace

double quadratic_form(const Eigen::MatrixXd& g, const Eigen::VectorXd& theta) {
  if (g.rows() != g.cols() || g.rows() != theta.size())
    throw std::invalid_argument("dimension mismatch in quadratic form");
  return theta.dot(g * theta);
}

Eigen::VectorXd spectrum(const Eigen::MatrixXd& g) {
  if (g.rows() != g.cols()) throw std::invalid_argument("matrix must be square");
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw std::invalid_argument("matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(g);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  return es.eigenvalues();
}

std::vector<Eigen::VectorXd> make_probes(int p, int k, int count,
                                         SplitMix64& rng) {
  if (k < 1 || k > p) throw std::invalid_argument("need 1 <= k <= p");
  if (count < 1) throw std::invalid_argument("need at least one probe");
  std::vector<VectorXd> probes;
  probes.reserve(count);
  for (int i = 0; i < count; ++i) {
    switch (i % 4) {
      case 0:
      case 1:
        probes.push_back(random_sparse_unit(p, k, rng));
        break;
      case 2:
        probes.push_back(random_dense_unit(p, rng));
        break;
      default: {
        VectorXd d = random_sparse_unit(p, k, rng) - random_sparse_unit(p, k, rng);
        const double nrm = d.norm();
        probes.push_back(nrm < 1e-12 ? random_sparse_unit(p, k, rng)
                                     : VectorXd(d / nrm));
      }
    }
  }
  return probes;
}

ReCheck verify_lower_re(const Eigen::MatrixXd& g, double alpha_lower,
                        double tau_lower,
                        const std::vector<Eigen::VectorXd>& probes) {
  ReCheck out;
  out.total = static_cast<int>(probes.size());
  for (const auto& theta : probes) {
    const double lhs = quadratic_form(g, theta);
    const double l1 = theta.lpNorm<1>();
    const double rhs =
        alpha_lower * theta.squaredNorm() - tau_lower * l1 * l1;
    const double margin = lhs - rhs;
    if (margin < -1e-12) {
      ++out.violations;
      if (margin < out.worst_margin) {
        out.worst_margin = margin;
        out.worst_theta = theta;
      }
    }
  }
  return out;
}

ReConstants estimate_re_constants(const Eigen::MatrixXd& g, int k,
                                  ReConstants::Method method, int probe_count,
                                  SplitMix64& rng) {
  const int p = static_cast<int>(g.rows());
  if (g.rows() != g.cols()) throw std::invalid_argument("matrix must be square");
  if (k < 1 || k > p) throw std::invalid_argument("need 1 <= k <= p");

  ReConstants out;
  out.method = method;
  const auto probes = make_probes(p, k, probe_count, rng);
  out.probes_used = static_cast<int>(probes.size());

  if (method == ReConstants::Method::exact_enumeration) {
    if (binomial_guarded(p, k) > 1e6)
      throw std::invalid_argument("support enumeration budget exceeded");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    std::vector<int> support(k);
    for (int i = 0; i < k; ++i) support[i] = i;
    MatrixXd sub(k, k);
    while (true) {
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b) sub(a, b) = g(support[a], support[b]);
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(sub);
      lo = std::min(lo, es.eigenvalues().minCoeff());
      hi = std::max(hi, es.eigenvalues().maxCoeff());
      // next combination in lexicographic order
      int i = k - 1;
      while (i >= 0 && support[i] == p - k + i) --i;
      if (i < 0) break;
      ++support[i];
      for (int j = i + 1; j < k; ++j) support[j] = support[j - 1] + 1;
    }
    out.alpha_lower = lo;
    out.alpha_upper = hi;
  } else {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < probes.size(); ++i) {
      if (i % 4 >= 2) continue;  // Rayleigh extremes over k-sparse probes only
      const double q = quadratic_form(g, probes[i]);
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    out.alpha_lower = lo;
    out.alpha_upper = hi;
  }

  // residual fits over the full mix; tau clamped at zero
  double num_lo = 0.0, num_hi = 0.0, den = 0.0;
  for (const auto& theta : probes) {
    const double q = quadratic_form(g, theta);
    const double l1sq = std::pow(theta.lpNorm<1>(), 2);
    num_lo += (out.alpha_lower * theta.squaredNorm() - q) * l1sq;
    num_hi += (q - out.alpha_upper * theta.squaredNorm()) * l1sq;
    den += l1sq * l1sq;
  }
  out.tau_lower = std::max(0.0, num_lo / den);
  out.tau_upper = std::max(0.0, num_hi / den);
  return out;
}

}  // namespace corrlasso
