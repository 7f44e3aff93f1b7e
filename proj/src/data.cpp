#include "corrlasso/data.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace corrlasso {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd gaussian_matrix(int rows, int cols, SplitMix64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd g(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) g(r, c) = normal(rng);
  return g;
}

// factor B with B B^T = sigma; LLT when SPD, eigen square root otherwise
MatrixXd covariance_factor(const MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols())
    throw std::invalid_argument("covariance matrix must be square");
  Eigen::LLT<MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return MatrixXd(llt.matrixL());
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sigma);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("covariance factorization failed");
  VectorXd ev = es.eigenvalues();
  const double floor = -1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i] < floor)
      throw std::invalid_argument("covariance matrix is not positive semidefinite");
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace

double operator_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.transpose() * m);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Eigen::MatrixXd solve_stationary_covariance(const Eigen::MatrixXd& a,
                                            const Eigen::MatrixXd& sigma_v) {
  if (a.rows() != a.cols() || sigma_v.rows() != sigma_v.cols() ||
      a.rows() != sigma_v.rows())
    throw std::invalid_argument("drift and innovation covariance must be square and same size");
  if (operator_norm(a) >= 1.0)
    throw std::invalid_argument("drift operator norm must be < 1 for a stationary solution");

  MatrixXd s = sigma_v;
  const int cap = 100000;
  for (int it = 0; it < cap; ++it) {
    MatrixXd next = a * s * a.transpose() + sigma_v;
    const double step = (next - s).cwiseAbs().maxCoeff();
    s.swap(next);
    if (step <= 1e-12) break;
  }
  const double residual =
      (s - (a * s * a.transpose() + sigma_v)).cwiseAbs().maxCoeff();
  if (residual > 1e-10)
    throw std::runtime_error("stationary covariance iteration did not converge");
  return s;
}

Eigen::MatrixXd generate_design(const DesignSpec& spec, SplitMix64& rng) {
  if (spec.n <= 0 || spec.p <= 0)
    throw std::invalid_argument("design needs n > 0 and p > 0");
  if (spec.sigma_x.rows() != spec.p || spec.sigma_x.cols() != spec.p)
    throw std::invalid_argument("sigma_x must be p x p");

  if (spec.mode == DesignMode::iid) {
    const MatrixXd b = covariance_factor(spec.sigma_x);
    return gaussian_matrix(spec.n, spec.p, rng) * b.transpose();
  }

  // var mode: start at stationarity, then run the recursion row by row
  if (spec.var_a.rows() != spec.p || spec.var_a.cols() != spec.p ||
      spec.sigma_v.rows() != spec.p || spec.sigma_v.cols() != spec.p)
    throw std::invalid_argument("var mode needs p x p drift and innovation covariance");
  const double check =
      (spec.sigma_x -
       (spec.var_a * spec.sigma_x * spec.var_a.transpose() + spec.sigma_v))
          .cwiseAbs()
          .maxCoeff();
  if (check > 1e-8)
    throw std::invalid_argument("sigma_x is not stationary for the given drift");

  const MatrixXd bx = covariance_factor(spec.sigma_x);
  const MatrixXd bv = covariance_factor(spec.sigma_v);
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd x(spec.n, spec.p);
  VectorXd g(spec.p);
  for (int j = 0; j < spec.p; ++j) g[j] = normal(rng);
  x.row(0) = (bx * g).transpose();
  for (int i = 1; i < spec.n; ++i) {
    for (int j = 0; j < spec.p; ++j) g[j] = normal(rng);
    x.row(i) = (spec.var_a * x.row(i - 1).transpose() + bv * g).transpose();
  }
  return x;
}

Eigen::VectorXd generate_sparse_beta(int p, int k, double norm_target,
                                     SplitMix64& rng) {
  if (k < 1 || k > p) throw std::invalid_argument("need 1 <= k <= p");
  if (!(norm_target > 0.0)) throw std::invalid_argument("norm_target must be > 0");

  std::vector<int> idx(p);
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates, first k entries become the support
  for (int i = 0; i < k; ++i) {
    std::uniform_int_distribution<int> pick(i, p - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  std::uniform_int_distribution<int> coin(0, 1);
  const double mag = norm_target / std::sqrt(static_cast<double>(k));
  VectorXd beta = VectorXd::Zero(p);
  for (int i = 0; i < k; ++i) beta[idx[i]] = coin(rng) ? mag : -mag;
  return beta;
}

Eigen::VectorXd generate_response(const Eigen::MatrixXd& x,
                                  const Eigen::VectorXd& beta,
                                  double sigma_eps, SplitMix64& rng) {
  if (x.cols() != beta.size())
    throw std::invalid_argument("design and coefficient dimensions differ");
  if (sigma_eps < 0.0) throw std::invalid_argument("sigma_eps must be >= 0");
  VectorXd y = x * beta;
  if (sigma_eps > 0.0) {
    std::normal_distribution<double> normal(0.0, sigma_eps);
    for (int i = 0; i < y.size(); ++i) y[i] += normal(rng);
  }
  return y;
}

Eigen::MatrixXd apply_additive_noise(const Eigen::MatrixXd& x,
                                     const Eigen::MatrixXd& sigma_w,
                                     SplitMix64& rng) {
  if (sigma_w.rows() != x.cols() || sigma_w.cols() != x.cols())
    throw std::invalid_argument("sigma_w must be p x p");
  const MatrixXd b = covariance_factor(sigma_w);
  return x + gaussian_matrix(static_cast<int>(x.rows()),
                             static_cast<int>(x.cols()), rng) *
                 b.transpose();
}

void apply_missing(const Eigen::MatrixXd& x, const Eigen::VectorXd& rho,
                   SplitMix64& rng, Eigen::MatrixXd* z, Eigen::MatrixXd* mask) {
  if (rho.size() != x.cols())
    throw std::invalid_argument("rho must have one entry per column");
  for (int j = 0; j < rho.size(); ++j)
    if (rho[j] < 0.0 || rho[j] >= 1.0)
      throw std::invalid_argument("rho entries must lie in [0, 1)");
  if (z == nullptr || mask == nullptr)
    throw std::invalid_argument("z and mask outputs are required");

  std::uniform_real_distribution<double> unif(0.0, 1.0);
  *z = x;
  mask->setOnes(x.rows(), x.cols());
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i < x.rows(); ++i)
      if (unif(rng) < rho[j]) {
        (*z)(i, j) = 0.0;
        (*mask)(i, j) = 0.0;
      }
}

Eigen::MatrixXd apply_multiplicative(const Eigen::MatrixXd& x,
                                     const MultiplicativeSpec& mult,
                                     SplitMix64& rng) {
  if (!(mult.lo <= mult.hi))
    throw std::invalid_argument("multiplicative range needs lo <= hi");
  std::uniform_real_distribution<double> unif(mult.lo, mult.hi);
  MatrixXd z(x.rows(), x.cols());
  for (int j = 0; j < x.cols(); ++j)
    for (int i = 0; i < x.rows(); ++i) z(i, j) = x(i, j) * unif(rng);
  return z;
}

DatasetConfig dataset_config_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  DatasetConfig cfg;
  cfg.n = j.at("n").get<int>();
  cfg.p = j.at("p").get<int>();
  cfg.k = j.at("k").get<int>();
  cfg.mode = j.value("mode", std::string("iid"));
  cfg.sigma_eps = j.value("sigma_eps", 0.0);
  cfg.sigma_w = j.value("sigma_w", 0.0);
  cfg.rho = j.value("rho", 0.0);
  cfg.a_norm = j.value("A_norm", 0.0);
  cfg.seed = j.value("seed", std::uint64_t{0});
  return cfg;
}

std::string dataset_config_to_json(const DatasetConfig& cfg) {
  nlohmann::json j;
  j["n"] = cfg.n;
  j["p"] = cfg.p;
  j["k"] = cfg.k;
  j["mode"] = cfg.mode;
  j["sigma_eps"] = cfg.sigma_eps;
  j["sigma_w"] = cfg.sigma_w;
  j["rho"] = cfg.rho;
  j["A_norm"] = cfg.a_norm;
  j["seed"] = cfg.seed;
  return j.dump(2);
}

Instance make_dataset(const DatasetConfig& cfg) {
  if (cfg.mode != "iid" && cfg.mode != "var")
    throw std::invalid_argument("mode must be \"iid\" or \"var\"");
  if (cfg.sigma_w > 0.0 && cfg.rho > 0.0)
    throw std::invalid_argument("pick one corruption: sigma_w or rho");

  Instance inst;
  inst.design.n = cfg.n;
  inst.design.p = cfg.p;
  inst.design.sigma_x = Eigen::MatrixXd::Identity(cfg.p, cfg.p);

  SplitMix64 base(cfg.seed);
  SplitMix64 beta_rng = base.split(1);
  SplitMix64 design_rng = base.split(2);
  SplitMix64 eps_rng = base.split(3);
  SplitMix64 corrupt_rng = base.split(4);

  if (cfg.mode == "var") {
    if (!(cfg.a_norm > 0.0 && cfg.a_norm < 1.0))
      throw std::invalid_argument("var mode needs 0 < A_norm < 1");
    inst.design.mode = DesignMode::var;
    // random orthogonal factor scaled to the requested operator norm
    SplitMix64 drift_rng = base.split(5);
    Eigen::HouseholderQR<MatrixXd> qr(gaussian_matrix(cfg.p, cfg.p, drift_rng));
    MatrixXd q = qr.householderQ() * MatrixXd::Identity(cfg.p, cfg.p);
    inst.design.var_a = cfg.a_norm * q;
    inst.design.sigma_v =
        (1.0 - cfg.a_norm * cfg.a_norm) * MatrixXd::Identity(cfg.p, cfg.p);
    inst.design.sigma_x =
        solve_stationary_covariance(inst.design.var_a, inst.design.sigma_v);
  }

  inst.truth.beta = generate_sparse_beta(cfg.p, cfg.k, 1.0, beta_rng);
  inst.truth.k = cfg.k;
  inst.truth.sigma_eps = cfg.sigma_eps;
  inst.truth.seed = cfg.seed;

  inst.data.x = generate_design(inst.design, design_rng);
  inst.data.y =
      generate_response(inst.data.x, inst.truth.beta, cfg.sigma_eps, eps_rng);
  inst.data.seed = cfg.seed;

  if (cfg.sigma_w > 0.0) {
    inst.data.model.kind = CorruptionKind::additive;
    inst.data.model.sigma_w =
        cfg.sigma_w * cfg.sigma_w * MatrixXd::Identity(cfg.p, cfg.p);
    inst.data.z =
        apply_additive_noise(inst.data.x, inst.data.model.sigma_w, corrupt_rng);
  } else if (cfg.rho > 0.0) {
    inst.data.model.kind = CorruptionKind::missing;
    inst.data.model.rho = VectorXd::Constant(cfg.p, cfg.rho);
    apply_missing(inst.data.x, inst.data.model.rho, corrupt_rng, &inst.data.z,
                  &inst.data.mask);
  } else {
    inst.data.model.kind = CorruptionKind::none;
    inst.data.z = inst.data.x;
  }
  return inst;
}

namespace {

void write_matrix_csv(const MatrixXd& z, const MatrixXd& mask,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  const bool has_mask = mask.size() > 0;
  char buf[64];
  for (int j = 0; j < z.cols(); ++j) out << (j ? "," : "") << "z" << (j + 1);
  if (has_mask)
    for (int j = 0; j < z.cols(); ++j) out << ",z" << (j + 1) << "_mask";
  out << "\n";
  for (int i = 0; i < z.rows(); ++i) {
    for (int j = 0; j < z.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", z(i, j));
      out << (j ? "," : "") << buf;
    }
    if (has_mask)
      for (int j = 0; j < z.cols(); ++j)
        out << "," << (mask(i, j) != 0.0 ? 1 : 0);
    out << "\n";
  }
}

}  // namespace

void write_design_csv(const CorruptedDataset& data, const std::string& path) {
  write_matrix_csv(data.z, data.mask, path);
}

void write_response_csv(const CorruptedDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[64];
  out << "y\n";
  for (int i = 0; i < data.y.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", data.y[i]);
    out << buf << "\n";
  }
}

}  // namespace corrlasso
