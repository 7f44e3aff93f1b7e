#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
#include <string>

#include "corrlasso/data.hpp"
#include "corrlasso/graphical.hpp"
#include "corrlasso/optimizer.hpp"
#include "corrlasso/surrogates.hpp"

namespace py = pybind11;
using namespace corrlasso;

namespace {

py::tuple pair_tuple(const SurrogatePair& pair) {
  return py::make_tuple(pair.cov, pair.cross);
}

Eigen::VectorXd solve_constrained_py(const Eigen::MatrixXd& g,
                                     const Eigen::VectorXd& c, double radius,
                                     double eta, double tol, int max_iter) {
  PgdOptions opts;
  opts.eta = eta;
  opts.tol = tol;
  opts.max_iter = max_iter;
  return pgd_constrained(g, c, radius, opts).beta;
}

Eigen::VectorXd solve_lagrangian_py(const Eigen::MatrixXd& g,
                                    const Eigen::VectorXd& c, double lam,
                                    double radius, double eta, double tol,
                                    int max_iter) {
  PgdOptions opts;
  opts.eta = eta;
  opts.tol = tol;
  opts.max_iter = max_iter;
  return pgd_lagrangian(g, c, lam, radius, opts).beta;
}

py::dict make_dataset_py(const std::string& config_json) {
  Instance inst = make_dataset(dataset_config_from_json(config_json));
  py::dict out;
  out["x"] = inst.data.x;
  out["z"] = inst.data.z;
  out["y"] = inst.data.y;
  out["mask"] = inst.data.mask;
  out["beta"] = inst.truth.beta;
  out["seed"] = inst.data.seed;
  return out;
}

py::dict estimate_precision_py(const Eigen::MatrixXd& z,
                               const std::string& kind,
                               std::optional<Eigen::MatrixXd> sigma_w,
                               std::optional<Eigen::VectorXd> rho,
                               double mult_lo, double mult_hi,
                               std::optional<Eigen::MatrixXd> truth,
                               double lam, const std::string& symmetrize,
                               double tol, int max_iter) {
  CorruptionModel model;
  if (kind == "none") {
    model.kind = CorruptionKind::none;
  } else if (kind == "additive") {
    model.kind = CorruptionKind::additive;
    if (!sigma_w) throw std::invalid_argument("additive needs sigma_w");
    model.sigma_w = *sigma_w;
  } else if (kind == "missing") {
    model.kind = CorruptionKind::missing;
    if (!rho) throw std::invalid_argument("missing needs rho");
    model.rho = *rho;
  } else if (kind == "multiplicative") {
    model.kind = CorruptionKind::multiplicative;
    model.mult = MultiplicativeSpec{mult_lo, mult_hi};
  } else {
    throw std::invalid_argument("unknown corruption kind: " + kind);
  }
  PrecisionOptions opts;
  if (truth) opts.truth = &*truth;
  opts.lambda = lam;
  if (symmetrize == "auto") {
    opts.symmetrize = SymmetrizePolicy::automatic;
  } else if (symmetrize == "lp") {
    opts.symmetrize = SymmetrizePolicy::lp;
  } else if (symmetrize == "average") {
    opts.symmetrize = SymmetrizePolicy::average;
  } else {
    throw std::invalid_argument("unknown symmetrize policy: " + symmetrize);
  }
  opts.pgd.tol = tol;
  opts.pgd.max_iter = max_iter;
  PrecisionEstimate est = estimate_precision(z, model, opts);
  py::dict out;
  out["theta"] = est.theta;
  out["theta_raw"] = est.theta_raw;
  out["iterations"] = est.iterations;
  out["used_lp"] = est.used_lp;
  return out;
}

}  // namespace

PYBIND11_MODULE(_corrlasso, m) {
  m.doc() = "sparse regression with corrupted covariates";

  m.def("project_l1", &project_l1, py::arg("v"), py::arg("radius"),
        "euclidean projection onto the l1 ball");
  m.def("prox_l1_in_ball", &prox_l1_in_ball, py::arg("v"), py::arg("shift"),
        py::arg("radius"),
        "l1 prox restricted to the l1 ball of the given radius");

  m.def("lasso_pair",
        [](const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
          return pair_tuple(lasso_pair(x, y));
        },
        py::arg("x"), py::arg("y"));
  m.def("additive_pair",
        [](const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
           const Eigen::MatrixXd& sigma_w) {
          return pair_tuple(additive_pair(z, y, sigma_w));
        },
        py::arg("z"), py::arg("y"), py::arg("sigma_w"));
  m.def("missing_pair",
        [](const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
           const Eigen::VectorXd& rho) {
          return pair_tuple(missing_pair_general(z, y, rho));
        },
        py::arg("z"), py::arg("y"), py::arg("rho"));
  m.def("multiplicative_pair",
        [](const Eigen::MatrixXd& z, const Eigen::VectorXd& y,
           const Eigen::VectorXd& mean, const Eigen::MatrixXd& second) {
          return pair_tuple(multiplicative_pair(z, y, mean, second));
        },
        py::arg("z"), py::arg("y"), py::arg("mean"), py::arg("second"));

  m.def("solve_constrained", &solve_constrained_py, py::arg("g"), py::arg("c"),
        py::arg("radius"), py::arg("eta") = 0.0, py::arg("tol") = 1e-9,
        py::arg("max_iter") = 10000,
        "projected gradient minimizer of 0.5 b'Gb - c'b on the l1 ball");
  m.def("solve_lagrangian", &solve_lagrangian_py, py::arg("g"), py::arg("c"),
        py::arg("lam"), py::arg("radius"), py::arg("eta") = 0.0,
        py::arg("tol") = 1e-9, py::arg("max_iter") = 10000,
        "composite gradient minimizer with an l1 penalty and side ball");

  m.def("make_dataset", &make_dataset_py, py::arg("config_json"),
        "build a corrupted regression instance from a json config string");

  m.def("stationary_covariance", &solve_stationary_covariance, py::arg("a"),
        py::arg("sigma_v"),
        "row covariance of the stationary autoregressive process");
  m.def("operator_norm", &operator_norm, py::arg("m"));

  m.def("estimate_precision", &estimate_precision_py, py::arg("z"),
        py::arg("kind") = "none", py::arg("sigma_w") = std::nullopt,
        py::arg("rho") = std::nullopt, py::arg("mult_lo") = 0.8,
        py::arg("mult_hi") = 1.2, py::arg("truth") = std::nullopt,
        py::arg("lam") = 0.0, py::arg("symmetrize") = "auto",
        py::arg("tol") = 1e-9, py::arg("max_iter") = 10000,
        "column-regression estimate of the inverse covariance");
}
