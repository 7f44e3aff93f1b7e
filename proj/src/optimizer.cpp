#include "corrlasso/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace corrlasso {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_finite(const VectorXd& v, const char* what) {
  if (!v.allFinite())
    throw std::invalid_argument(std::string(what) + " contains NaN or Inf");
}

VectorXd soft_threshold(const VectorXd& v, double t) {
  VectorXd out(v.size());
  for (int i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - t;
    out[i] = a > 0.0 ? (v[i] > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

}  // namespace

Eigen::VectorXd project_l1(const Eigen::VectorXd& v, double radius) {
  check_finite(v, "input vector");
  if (radius < 0.0) throw std::invalid_argument("radius must be >= 0");
  if (radius == 0.0) return VectorXd::Zero(v.size());
  if (v.lpNorm<1>() <= radius) return v;

  // threshold from the sorted absolute values
  VectorXd u = v.cwiseAbs();
  std::sort(u.data(), u.data() + u.size(), std::greater<double>());
  double css = 0.0;
  double theta = 0.0;
  for (int j = 0; j < u.size(); ++j) {
    css += u[j];
    const double cand = (css - radius) / (j + 1);
    if (j + 1 == u.size() || u[j + 1] <= cand) {
      theta = cand;
      break;
    }
  }
  return soft_threshold(v, theta);
}

Eigen::VectorXd prox_l1_in_ball(const Eigen::VectorXd& v, double shift,
                                double radius) {
  check_finite(v, "input vector");
  if (shift < 0.0) throw std::invalid_argument("shift must be >= 0");
  if (radius < 0.0) throw std::invalid_argument("radius must be >= 0");
  if (radius == 0.0) return VectorXd::Zero(v.size());

  VectorXd s = soft_threshold(v, shift);
  if (s.lpNorm<1>() <= radius) return s;

  // smallest extra threshold that reaches the ball boundary
  double lo = 0.0;
  double hi = s.cwiseAbs().maxCoeff();
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (soft_threshold(s, mid).lpNorm<1>() > radius)
      lo = mid;
    else
      hi = mid;
  }
  // the upper end keeps the iterate feasible
  return soft_threshold(s, hi);
}

double choose_eta(const Eigen::MatrixXd& m, EtaPolicy policy) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix must be square");
  if (policy == EtaPolicy::theory) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(0.5 * (m + m.transpose()));
    return 4.0 * es.eigenvalues().maxCoeff();
  }

  // operator norm by power iteration on m^T m, deterministic ramp start
  const int p = static_cast<int>(m.rows());
  VectorXd v(p);
  for (int i = 0; i < p; ++i) v[i] = 1.0 + 0.01 * i;
  v /= v.norm();
  double est = 0.0;
  for (int it = 0; it < 200; ++it) {
    VectorXd w = m.transpose() * (m * v);
    const double nrm = w.norm();
    if (nrm <= 1e-300)
      throw std::invalid_argument("quadratic coefficient is numerically zero");
    const double next = std::sqrt(v.dot(w) < 0.0 ? 0.0 : v.dot(w));
    v = w / nrm;
    if (it > 0 && std::abs(next - est) <= 1e-8 * std::max(1.0, next)) {
      est = next;
      break;
    }
    est = next;
  }
  if (est <= 1e-300)
    throw std::invalid_argument("quadratic coefficient is numerically zero");
  return est;
}

namespace {

PgdResult pgd_core(const MatrixXd& g, const VectorXd& c, bool composite,
                   double lambda, double radius, const PgdOptions& opts) {
  const int p = static_cast<int>(g.rows());
  if (g.rows() != g.cols()) throw std::invalid_argument("quadratic term must be square");
  if (c.size() != p) throw std::invalid_argument("linear term size mismatch");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be > 0");
  if (composite && lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (opts.beta0.size() != 0 && opts.beta0.size() != p)
    throw std::invalid_argument("starting point size mismatch");
  if (opts.reference.size() != 0 && opts.reference.size() != p)
    throw std::invalid_argument("reference size mismatch");

  const double eta =
      opts.eta > 0.0 ? opts.eta : choose_eta(g, EtaPolicy::spectral);

  const auto objective = [&](const VectorXd& b) {
    double val = 0.5 * b.dot(g * b) - c.dot(b);
    if (composite) val += lambda * b.lpNorm<1>();
    return val;
  };

  VectorXd beta = opts.beta0.size() ? opts.beta0 : VectorXd::Zero(p);
  beta = project_l1(beta, radius);  // feasible start no matter what was given

  PgdResult out;
  out.trace.objective.push_back(objective(beta));
  if (opts.reference.size())
    out.trace.dist_to_reference.push_back((beta - opts.reference).norm());
  if (opts.store_iterates) out.trace.iterates.push_back(beta);

  for (int t = 0; t < opts.max_iter; ++t) {
    VectorXd grad = g * beta - c;
    if (!grad.allFinite())
      throw std::runtime_error("gradient diverged (NaN or Inf)");
    VectorXd step = beta - grad / eta;
    VectorXd next = composite ? prox_l1_in_ball(step, lambda / eta, radius)
                              : project_l1(step, radius);
    const double rel =
        (next - beta).norm() / std::max(1.0, beta.norm());
    beta.swap(next);
    out.trace.objective.push_back(objective(beta));
    if (opts.reference.size())
      out.trace.dist_to_reference.push_back((beta - opts.reference).norm());
    if (opts.store_iterates) out.trace.iterates.push_back(beta);
    out.trace.iterations = t + 1;
    if (rel <= opts.tol) {
      out.trace.converged = true;
      break;
    }
  }

  if (opts.reference.size()) {
    try {
      const ContractionFit fit = fit_contraction(out.trace.dist_to_reference);
      out.trace.gamma_hat = fit.gamma;
      out.trace.plateau_index = fit.plateau_index;
    } catch (const std::exception&) {
      // trace too short or no geometric phase, leave the NaN marker
    }
  }

  out.beta = beta;
  return out;
}

}  // namespace

PgdResult pgd_constrained(const Eigen::MatrixXd& g, const Eigen::VectorXd& c,
                          double radius, const PgdOptions& opts) {
  return pgd_core(g, c, false, 0.0, radius, opts);
}

PgdResult pgd_lagrangian(const Eigen::MatrixXd& g, const Eigen::VectorXd& c,
                         double lambda, double radius, const PgdOptions& opts) {
  return pgd_core(g, c, true, lambda, radius, opts);
}

ContractionFit fit_contraction(const std::vector<double>& dist) {
  const int len = static_cast<int>(dist.size());
  int plateau = len;
  for (int t = 1; t < len; ++t) {
    if (dist[t] <= 0.0 || dist[t - 1] <= 0.0 || dist[t] > 0.99 * dist[t - 1]) {
      plateau = t;
      break;
    }
  }
  if (plateau < 10)
    throw std::runtime_error("no geometric phase detected (fewer than 10 shrinking steps)");

  // least-squares slope of log distance over the geometric phase
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int t = 0; t < plateau; ++t) {
    const double y = std::log(dist[t]);
    sx += t;
    sy += y;
    sxx += static_cast<double>(t) * t;
    sxy += t * y;
  }
  const double n = plateau;
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  ContractionFit fit;
  fit.gamma = std::exp(slope);
  fit.plateau_index = plateau == len ? len - 1 : plateau;
  return fit;
}

}  // namespace corrlasso
