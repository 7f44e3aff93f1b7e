#include "corrlasso/graphical.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "corrlasso/lp.hpp"

namespace corrlasso {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd drop_row_col(const MatrixXd& m, int j) {
  const int p = static_cast<int>(m.rows());
  MatrixXd out(p - 1, p - 1);
  for (int c = 0, cc = 0; c < p; ++c) {
    if (c == j) continue;
    for (int r = 0, rr = 0; r < p; ++r) {
      if (r == j) continue;
      out(rr++, cc) = m(r, c);
    }
    ++cc;
  }
  return out;
}

VectorXd drop_entry(const VectorXd& v, int j) {
  VectorXd out(v.size() - 1);
  for (int i = 0, k = 0; i < v.size(); ++i)
    if (i != j) out[k++] = v[i];
  return out;
}

MatrixXd drop_column(const MatrixXd& m, int j) {
  MatrixXd out(m.rows(), m.cols() - 1);
  for (int c = 0, cc = 0; c < m.cols(); ++c)
    if (c != j) out.col(cc++) = m.col(c);
  return out;
}

// corrected estimate of the full covariance, shared by every column step
MatrixXd corrected_covariance(const MatrixXd& z, const CorruptionModel& model) {
  const double n = static_cast<double>(z.rows());
  MatrixXd s = z.transpose() * z / n;
  s = 0.5 * (s + s.transpose()).eval();
  const int p = static_cast<int>(z.cols());
  switch (model.kind) {
    case CorruptionKind::none:
      return s;
    case CorruptionKind::additive:
      return s - 0.5 * (model.sigma_w + model.sigma_w.transpose());
    case CorruptionKind::missing:
      for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) {
          const double d = (i == j) ? 1.0 - model.rho[j]
                                    : (1.0 - model.rho[i]) * (1.0 - model.rho[j]);
          if (std::abs(d) < 1e-12)
            throw std::invalid_argument("observation probability too small");
          s(i, j) /= d;
        }
      return 0.5 * (s + s.transpose()).eval();
    case CorruptionKind::multiplicative: {
      const double mean = model.mult.mean();
      const double second = model.mult.second_moment();
      if (std::abs(mean) < 1e-12 || std::abs(second) < 1e-12)
        throw std::invalid_argument("multiplicative moments too small");
      for (int j = 0; j < p; ++j)
        for (int i = 0; i < p; ++i) s(i, j) /= (i == j) ? second : mean * mean;
      return 0.5 * (s + s.transpose()).eval();
    }
  }
  throw std::logic_error("unknown corruption kind");
}

}  // namespace

Eigen::MatrixXd make_graph_precision(GraphFamily family, int p, int k,
                                     SplitMix64& rng) {
  if (p < 2) throw std::invalid_argument("need p >= 2");
  MatrixXd theta = MatrixXd::Identity(p, p);

  switch (family) {
    case GraphFamily::chain:
      for (int i = 0; i + 1 < p; ++i) theta(i, i + 1) = theta(i + 1, i) = 0.1;
      break;
    case GraphFamily::star: {
      const int degree = static_cast<int>(std::ceil(0.1 * p));
      for (int i = 1; i <= degree && i < p; ++i)
        theta(0, i) = theta(i, 0) = 0.1;
      break;
    }
    case GraphFamily::erdos_renyi: {
      if (k < 1 || k > p) throw std::invalid_argument("need 1 <= k <= p");
      MatrixXd b = MatrixXd::Zero(p, p);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j)
          if (unif(rng) < static_cast<double>(k) / p) b(i, j) = b(j, i) = 0.5;
      Eigen::SelfAdjointEigenSolver<MatrixXd> es(b);
      const double lo = es.eigenvalues().minCoeff();
      const double hi = es.eigenvalues().maxCoeff();
      if (hi - lo < 1e-12)
        throw std::runtime_error("graph draw has no edges, condition target unreachable");
      // ridge so that the condition number hits p exactly
      const double target = static_cast<double>(p);
      double dlo = -lo + 1e-12 * std::max(1.0, std::abs(lo));
      double dhi = std::max(1.0, -lo + 1.0);
      while ((hi + dhi) / (lo + dhi) > target) dhi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (dlo + dhi);
        if ((hi + mid) / (lo + mid) > target)
          dlo = mid;
        else
          dhi = mid;
      }
      const double delta = 0.5 * (dlo + dhi);
      const double cond = (hi + delta) / (lo + delta);
      if (std::abs(cond - target) > 1e-6 * target)
        throw std::runtime_error("condition number bisection failed");
      theta = b + delta * MatrixXd::Identity(p, p);
      break;
    }
  }

  theta /= operator_norm(theta);
  return theta;
}

double l1_operator_norm(const Eigen::MatrixXd& m) {
  double best = 0.0;
  for (int j = 0; j < m.cols(); ++j)
    best = std::max(best, m.col(j).cwiseAbs().sum());
  return best;
}

SurrogatePair column_surrogates(const Eigen::MatrixXd& z,
                                const CorruptionModel& model, int j) {
  const int p = static_cast<int>(z.cols());
  if (j < 0 || j >= p) throw std::invalid_argument("column index out of range");
  const MatrixXd z_rest = drop_column(z, j);
  const VectorXd zj = z.col(j);

  switch (model.kind) {
    case CorruptionKind::none:
      return lasso_pair(z_rest, zj);
    case CorruptionKind::additive:
      return additive_pair(z_rest, zj, drop_row_col(model.sigma_w, j));
    case CorruptionKind::missing: {
      SurrogatePair pair =
          missing_pair_general(z_rest, zj, drop_entry(model.rho, j));
      // the response column is itself subsampled
      const double dj = 1.0 - model.rho[j];
      if (std::abs(dj) < 1e-12)
        throw std::invalid_argument("observation probability too small");
      pair.cross /= dj;
      return pair;
    }
    case CorruptionKind::multiplicative: {
      const int q = p - 1;
      const VectorXd mean = VectorXd::Constant(q, model.mult.mean());
      MatrixXd second =
          MatrixXd::Constant(q, q, model.mult.mean() * model.mult.mean());
      second.diagonal().setConstant(model.mult.second_moment());
      SurrogatePair pair = multiplicative_pair(z_rest, zj, mean, second);
      const double dj = model.mult.mean();
      if (std::abs(dj) < 1e-12)
        throw std::invalid_argument("multiplicative mean too small");
      pair.cross /= dj;
      return pair;
    }
  }
  throw std::logic_error("unknown corruption kind");
}

Eigen::MatrixXd symmetrize_l1op(const Eigen::MatrixXd& m) {
  const int p = static_cast<int>(m.rows());
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix must be square");

  // variables: upper-triangle entries split into positive and negative
  // parts, one absolute-deviation slack per matrix cell, and the bound t
  const int n_pairs = p * (p + 1) / 2;
  const int n_vars = 2 * n_pairs + p * p + 1;
  const int n_rows = 2 * p * p + p;
  const int e0 = 2 * n_pairs;
  const int t0 = n_vars - 1;

  auto pair_index = [p](int i, int j) {
    const int a = std::min(i, j), b = std::max(i, j);
    return a * p - a * (a + 1) / 2 + b;
  };
  auto cell = [p](int i, int j) { return i + j * p; };

  MatrixXd a = MatrixXd::Zero(n_rows, n_vars);
  VectorXd rhs(n_rows);
  int r = 0;
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < p; ++i) {
      const int q = pair_index(i, j);
      a(r, q) = 1.0;
      a(r, n_pairs + q) = -1.0;
      a(r, e0 + cell(i, j)) = -1.0;
      rhs[r++] = m(i, j);
      a(r, q) = -1.0;
      a(r, n_pairs + q) = 1.0;
      a(r, e0 + cell(i, j)) = -1.0;
      rhs[r++] = -m(i, j);
    }
  for (int j = 0; j < p; ++j) {
    for (int i = 0; i < p; ++i) a(r, e0 + cell(i, j)) = 1.0;
    a(r, t0) = -1.0;
    rhs[r++] = 0.0;
  }

  VectorXd c = VectorXd::Zero(n_vars);
  c[t0] = 1.0;
  const LpResult sol = solve_lp(a, rhs, c);

  MatrixXd theta(p, p);
  for (int i = 0; i < p; ++i)
    for (int j = i; j < p; ++j) {
      const int q = pair_index(i, j);
      theta(i, j) = theta(j, i) = sol.x[q] - sol.x[n_pairs + q];
    }
  return theta;
}

PrecisionEstimate estimate_precision(const Eigen::MatrixXd& z,
                                     const CorruptionModel& model,
                                     const PrecisionOptions& opts) {
  const int p = static_cast<int>(z.cols());
  if (p < 2) throw std::invalid_argument("need at least two columns");
  if (opts.truth == nullptr && !(opts.lambda > 0.0))
    throw std::invalid_argument("need either the true precision or a penalty");
  if (opts.truth != nullptr &&
      (opts.truth->rows() != p || opts.truth->cols() != p))
    throw std::invalid_argument("true precision has the wrong shape");

  const MatrixXd s = corrected_covariance(z, model);
  PrecisionEstimate out;
  out.theta_raw.setZero(p, p);
  out.iterations.assign(p, 0);
  std::string failures;

  for (int j = 0; j < p; ++j) {
    const SurrogatePair pair = column_surrogates(z, model, j);
    PgdResult fit;
    if (opts.truth != nullptr) {
      const VectorXd tj =
          drop_entry(opts.truth->col(j), j) / -(*opts.truth)(j, j);
      const double radius = std::max(tj.lpNorm<1>(), 1e-8);
      fit = pgd_constrained(pair.cov, pair.cross, radius, opts.pgd);
    } else {
      const double radius = std::sqrt(static_cast<double>(p));
      fit = pgd_lagrangian(pair.cov, pair.cross, opts.lambda, radius, opts.pgd);
    }
    out.iterations[j] = fit.trace.iterations;

    const VectorXd s_j = drop_entry(s.col(j), j);
    const double denom = s(j, j) - s_j.dot(fit.beta);
    if (std::abs(denom) < 1e-10) {
      failures += (failures.empty() ? "" : ", ") + std::to_string(j);
      continue;
    }
    const double aj = -1.0 / denom;
    for (int i = 0, k = 0; i < p; ++i) {
      if (i == j) continue;
      out.theta_raw(j, i) = aj * fit.beta[k++];
    }
    out.theta_raw(j, j) = -aj;
  }
  if (!failures.empty())
    throw std::runtime_error("residual variance is singular in columns " +
                             failures);

  const bool lp = opts.symmetrize == SymmetrizePolicy::lp ||
                  (opts.symmetrize == SymmetrizePolicy::automatic &&
                   p <= opts.lp_max_p);
  if (lp) {
    out.theta = symmetrize_l1op(out.theta_raw);
    out.used_lp = true;
  } else {
    if (opts.symmetrize == SymmetrizePolicy::automatic)
      std::fprintf(stderr,
                   "symmetrize: p=%d above lp cutoff %d, using transpose "
                   "averaging\n",
                   p, opts.lp_max_p);
    out.theta = 0.5 * (out.theta_raw + out.theta_raw.transpose());
  }
  return out;
}

}  // namespace corrlasso
