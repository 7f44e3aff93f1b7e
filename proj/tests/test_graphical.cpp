#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "corrlasso/data.hpp"
#include "corrlasso/graphical.hpp"
#include "corrlasso/lp.hpp"
#include "corrlasso/rng.hpp"
#include "oracles.hpp"

using namespace corrlasso;

TEST_CASE("linear programs with known solutions") {
  // min -x - 2y subject to x + y <= 4, x <= 3, y <= 2 at (2, 2)
  Eigen::MatrixXd a(3, 2);
  a << 1.0, 1.0, 1.0, 0.0, 0.0, 1.0;
  Eigen::VectorXd b(3);
  b << 4.0, 3.0, 2.0;
  Eigen::VectorXd c(2);
  c << -1.0, -2.0;
  LpResult res = solve_lp(a, b, c);
  CHECK(res.optimal);
  CHECK(res.x[0] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(res.x[1] == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(res.objective == doctest::Approx(-6.0).epsilon(1e-8));
}

TEST_CASE("linear program with a negative right-hand side") {
  // min x subject to -x <= -2, x <= 5: feasible range [2, 5]
  Eigen::MatrixXd a(2, 1);
  a << -1.0, 1.0;
  Eigen::VectorXd b(2);
  b << -2.0, 5.0;
  Eigen::VectorXd c(1);
  c << 1.0;
  LpResult res = solve_lp(a, b, c);
  CHECK(res.optimal);
  CHECK(res.x[0] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("unbounded and infeasible programs are reported") {
  Eigen::MatrixXd a(1, 1);
  a << -1.0;
  Eigen::VectorXd b(1);
  b << 0.0;
  Eigen::VectorXd c(1);
  c << -1.0;  // min -x with x >= 0 only
  CHECK_THROWS(solve_lp(a, b, c));

  Eigen::MatrixXd a2(2, 1);
  a2 << 1.0, -1.0;
  Eigen::VectorXd b2(2);
  b2 << 1.0, -3.0;  // x <= 1 and x >= 3
  Eigen::VectorXd c2(1);
  c2 << 0.0;
  CHECK_THROWS(solve_lp(a2, b2, c2));
}

TEST_CASE("random feasible programs match a vertex enumeration") {
  SplitMix64 rng(61);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.5, 2.0);
  for (int rep = 0; rep < 30; ++rep) {
    const int n = 2, m = 4;
    Eigen::MatrixXd a(m, n);
    for (int i = 0; i < m * n; ++i) a(i / n, i % n) = gauss(rng);
    Eigen::VectorXd b(m);
    for (int i = 0; i < m; ++i) b[i] = unif(rng);  // origin feasible
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c[i] = gauss(rng);

    // brute force over the polytope on a fine grid
    double best = 0.0;  // origin value
    const int grid = 400;
    for (int i = 0; i <= grid; ++i) {
      for (int j = 0; j <= grid; ++j) {
        Eigen::VectorXd x(2);
        x << 6.0 * i / grid, 6.0 * j / grid;
        if (((a * x - b).array() > 1e-12).any()) continue;
        best = std::min(best, c.dot(x));
      }
    }
    bool bounded = true;
    LpResult res;
    try {
      res = solve_lp(a, b, c);
    } catch (const std::exception&) {
      bounded = false;  // grid cannot see unboundedness, skip those draws
    }
    if (bounded && res.x.cwiseAbs().maxCoeff() < 5.5) {
      CHECK(res.objective <= best + 1e-6);
      CHECK(((a * res.x - b).array() <= 1e-8).all());
      CHECK((res.x.array() >= -1e-12).all());
    }
  }
}

TEST_CASE("chain precision matrix and its scaling") {
  SplitMix64 rng(1);
  Eigen::MatrixXd theta = make_graph_precision(GraphFamily::chain, 4, 2, rng);
  const double scale = 1.0 + 0.2 * std::cos(M_PI / 5.0);
  CHECK(theta(0, 0) == doctest::Approx(1.0 / scale).epsilon(1e-10));
  CHECK(theta(0, 1) == doctest::Approx(0.1 / scale).epsilon(1e-10));
  CHECK(theta(0, 2) == 0.0);
  CHECK(operator_norm(theta) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("star precision matrix touches the hub only") {
  SplitMix64 rng(2);
  Eigen::MatrixXd theta = make_graph_precision(GraphFamily::star, 10, 3, rng);
  CHECK(operator_norm(theta) == doctest::Approx(1.0).epsilon(1e-10));
  int hub_links = 0, other_links = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j) {
      if (theta(i, j) != 0.0) {
        if (i == 0) {
          ++hub_links;
        } else {
          ++other_links;
        }
      }
    }
  }
  CHECK(hub_links == 1);  // ceil(0.1 * 10) leaves
  CHECK(other_links == 0);
}

TEST_CASE("random graph has the requested conditioning") {
  SplitMix64 rng(3);
  Eigen::MatrixXd theta =
      make_graph_precision(GraphFamily::erdos_renyi, 12, 3, rng);
  CHECK((theta - theta.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(operator_norm(theta) == doctest::Approx(1.0).epsilon(1e-8));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(theta);
  double cond = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  CHECK(cond == doctest::Approx(12.0).epsilon(1e-3));
}

TEST_CASE("max column sum norm") {
  Eigen::MatrixXd m(2, 2);
  m << 1.0, -3.0, 2.0, 0.5;
  CHECK(l1_operator_norm(m) == doctest::Approx(3.5).epsilon(1e-14));
}

TEST_CASE("column regressions see the corrected minor") {
  SplitMix64 rng(71);
  std::normal_distribution<double> gauss;
  const int n = 30, p = 5;
  Eigen::MatrixXd z(n, p);
  for (int i = 0; i < n * p; ++i) z(i / p, i % p) = gauss(rng);

  CorruptionModel clean;
  clean.kind = CorruptionKind::none;
  SurrogatePair pair = column_surrogates(z, clean, 2);
  Eigen::MatrixXd rest(n, p - 1);
  rest << z.col(0), z.col(1), z.col(3), z.col(4);
  SurrogatePair manual = lasso_pair(rest, z.col(2));
  CHECK(oracles::max_abs_diff(pair.cov, manual.cov) < 1e-14);
  CHECK((pair.cross - manual.cross).cwiseAbs().maxCoeff() < 1e-14);

  CorruptionModel miss;
  miss.kind = CorruptionKind::missing;
  miss.rho = Eigen::VectorXd::Constant(p, 0.2);
  SurrogatePair pm = column_surrogates(z, miss, 2);
  Eigen::VectorXd rho_rest = Eigen::VectorXd::Constant(p - 1, 0.2);
  SurrogatePair manual_m = missing_pair_general(rest, z.col(2), rho_rest);
  CHECK(oracles::max_abs_diff(pm.cov, manual_m.cov) < 1e-14);
  // response column is corrupted too, cross moment gains its own correction
  CHECK((pm.cross - manual_m.cross / 0.8).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("symmetrization solves the matrix nearness problem") {
  Eigen::MatrixXd m(2, 2);
  m << 0.0, 1.0, 0.0, 0.0;
  Eigen::MatrixXd s = symmetrize_l1op(m);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(l1_operator_norm(s - m) == doctest::Approx(0.5).epsilon(1e-6));

  SplitMix64 rng(73);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 10; ++rep) {
    Eigen::MatrixXd r(2, 2);
    for (int i = 0; i < 4; ++i) r(i / 2, i % 2) = gauss(rng);
    Eigen::MatrixXd sym = symmetrize_l1op(r);
    CHECK((sym - sym.transpose()).cwiseAbs().maxCoeff() < 1e-9);
    double lp_obj = l1_operator_norm(sym - r);
    double ref = oracles::symmetrize_2x2_objective(r);
    CHECK(lp_obj <= ref + 1e-6);
    CHECK(lp_obj >= ref - 1e-6);
  }
}

TEST_CASE("symmetrization never loses to simple averaging") {
  SplitMix64 rng(79);
  std::normal_distribution<double> gauss;
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd r(4, 4);
    for (int i = 0; i < 16; ++i) r(i / 4, i % 4) = gauss(rng);
    Eigen::MatrixXd lp_sym = symmetrize_l1op(r);
    Eigen::MatrixXd avg = 0.5 * (r + r.transpose());
    CHECK(l1_operator_norm(lp_sym - r) <=
          l1_operator_norm(avg - r) + 1e-8);
  }
}

TEST_CASE("symmetric input passes through symmetrization unchanged") {
  Eigen::MatrixXd m(3, 3);
  m << 1.0, 0.2, 0.0, 0.2, -1.0, 0.4, 0.0, 0.4, 0.7;
  Eigen::MatrixXd s = symmetrize_l1op(m);
  CHECK(oracles::max_abs_diff(s, m) < 1e-8);
}

TEST_CASE("exact moments reproduce the precision matrix") {
  SplitMix64 rng(83);
  const int p = 5;
  Eigen::MatrixXd theta = make_graph_precision(GraphFamily::chain, p, 2, rng);
  Eigen::MatrixXd sigma = theta.llt().solve(Eigen::MatrixXd::Identity(p, p));
  // rows built so the empirical second moment equals sigma exactly
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  Eigen::MatrixXd l = llt.matrixL();
  Eigen::MatrixXd z = std::sqrt(static_cast<double>(p)) *
                      Eigen::MatrixXd(l.transpose());

  CorruptionModel clean;
  clean.kind = CorruptionKind::none;
  PrecisionOptions opts;
  opts.truth = &theta;
  opts.pgd.tol = 1e-13;
  opts.pgd.max_iter = 200000;
  PrecisionEstimate est = estimate_precision(z, clean, opts);
  CHECK(est.used_lp);
  CHECK(oracles::max_abs_diff(est.theta_raw, theta) < 1e-7);
  CHECK(oracles::max_abs_diff(est.theta, theta) < 1e-7);
}

TEST_CASE("column recovery degrades gracefully on corrupted samples") {
  SplitMix64 rng(89);
  const int p = 8, n = 2500;
  Eigen::MatrixXd theta = make_graph_precision(GraphFamily::chain, p, 2, rng);
  Eigen::MatrixXd sigma = theta.llt().solve(Eigen::MatrixXd::Identity(p, p));
  DesignSpec spec;
  spec.n = n;
  spec.p = p;
  spec.mode = DesignMode::iid;
  spec.sigma_x = sigma;
  Eigen::MatrixXd x = generate_design(spec, rng);
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(p, 0.2);
  Eigen::MatrixXd z, mask;
  apply_missing(x, rho, rng, &z, &mask);

  CorruptionModel model;
  model.kind = CorruptionKind::missing;
  model.rho = rho;
  PrecisionOptions opts;
  opts.truth = &theta;
  PrecisionEstimate est = estimate_precision(z, model, opts);
  CHECK(operator_norm(est.theta - theta) < 0.25);
  CHECK((est.theta - est.theta.transpose()).cwiseAbs().maxCoeff() < 1e-9);
}
