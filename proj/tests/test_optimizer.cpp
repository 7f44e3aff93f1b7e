#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "corrlasso/optimizer.hpp"
#include "corrlasso/rng.hpp"
#include "oracles.hpp"

using namespace corrlasso;

TEST_CASE("l1 projection on worked examples") {
  Eigen::VectorXd v(2);
  v << 3.0, 1.0;
  Eigen::VectorXd proj = project_l1(v, 2.0);
  CHECK(proj[0] == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(proj[1] == doctest::Approx(0.0).epsilon(1e-12));

  v << 1.0, 1.0;
  proj = project_l1(v, 1.0);
  CHECK(proj[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(proj[1] == doctest::Approx(0.5).epsilon(1e-12));

  v << -0.2, 0.1;
  proj = project_l1(v, 1.0);
  CHECK((proj - v).cwiseAbs().maxCoeff() == 0.0);

  proj = project_l1(v, 0.0);
  CHECK(proj.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("l1 projection agrees with threshold bisection on random input") {
  SplitMix64 rng(101);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.2, 3.0);
  for (int rep = 0; rep < 100; ++rep) {
    int p = 1 + static_cast<int>(rng() % 5);
    Eigen::VectorXd v(p);
    for (int i = 0; i < p; ++i) v[i] = 3.0 * gauss(rng);
    double radius = unif(rng);
    Eigen::VectorXd mine = project_l1(v, radius);
    Eigen::VectorXd ref = oracles::project_l1_bisect(v, radius);
    CHECK((mine - ref).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(mine.lpNorm<1>() <= radius + 1e-9);
  }
}

TEST_CASE("in-ball shrinkage on a worked example") {
  Eigen::VectorXd v(2);
  v << 3.0, 3.0;
  Eigen::VectorXd x = prox_l1_in_ball(v, 0.5, 2.0);
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(x.lpNorm<1>() <= 2.0 + 1e-9);

  // unconstrained case reduces to plain soft-thresholding
  Eigen::VectorXd free = prox_l1_in_ball(v, 0.5, 100.0);
  CHECK(free[0] == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(free[1] == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("in-ball shrinkage agrees with the grid reference") {
  SplitMix64 rng(103);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> radius_pick(0.2, 2.0);
  std::uniform_real_distribution<double> shift_pick(0.0, 1.0);
  for (int rep = 0; rep < 60; ++rep) {
    int p = 1 + static_cast<int>(rng() % 5);
    Eigen::VectorXd v(p);
    for (int i = 0; i < p; ++i) v[i] = 3.0 * gauss(rng);
    double radius = radius_pick(rng);
    double shift = shift_pick(rng);
    Eigen::VectorXd mine = prox_l1_in_ball(v, shift, radius);
    Eigen::VectorXd ref = oracles::prox_in_ball_grid(v, shift, radius);
    CHECK((mine - ref).cwiseAbs().maxCoeff() < 1e-5);
    CHECK(mine.lpNorm<1>() <= radius + 1e-9);
  }
}

TEST_CASE("in-ball shrinkage beats every feasible grid point in objective") {
  Eigen::VectorXd v(2);
  v << 1.5, 0.3;
  const double shift = 0.2, radius = 1.0;
  Eigen::VectorXd mine = prox_l1_in_ball(v, shift, radius);
  auto objective = [&](double a, double b) {
    return 0.5 * ((a - v[0]) * (a - v[0]) + (b - v[1]) * (b - v[1])) +
           shift * (std::abs(a) + std::abs(b));
  };
  double best = objective(mine[0], mine[1]);
  const int grid = 1000;
  for (int i = -grid; i <= grid; ++i) {
    for (int j = -grid; j <= grid; ++j) {
      double a = radius * i / grid;
      double b = radius * j / grid;
      if (std::abs(a) + std::abs(b) > radius) continue;
      CHECK(objective(a, b) >= best - 1e-6);
    }
  }
}

TEST_CASE("step size policies") {
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(3, 3);
  CHECK(choose_eta(id, EtaPolicy::theory) == doctest::Approx(4.0).epsilon(1e-9));
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -2.0;
  CHECK(choose_eta(d, EtaPolicy::spectral) == doctest::Approx(3.0).epsilon(1e-6));
  CHECK_THROWS(choose_eta(Eigen::MatrixXd::Zero(2, 2), EtaPolicy::spectral));
}

TEST_CASE("constrained descent solves a strongly convex problem") {
  SplitMix64 rng(107);
  std::normal_distribution<double> gauss;
  const int p = 8;
  Eigen::MatrixXd a(p, p);
  for (int i = 0; i < p * p; ++i) a(i / p, i % p) = gauss(rng);
  Eigen::MatrixXd g = a * a.transpose() / p + Eigen::MatrixXd::Identity(p, p);
  Eigen::VectorXd c(p);
  for (int i = 0; i < p; ++i) c[i] = gauss(rng);
  Eigen::VectorXd closed = g.ldlt().solve(c);
  PgdOptions opts;
  opts.tol = 1e-12;
  opts.max_iter = 50000;
  PgdResult res = pgd_constrained(g, c, 10.0 * closed.lpNorm<1>(), opts);
  CHECK(res.trace.converged);
  CHECK((res.beta - closed).cwiseAbs().maxCoeff() < 1e-6);
  for (std::size_t t = 1; t < res.trace.objective.size(); ++t) {
    CHECK(res.trace.objective[t] <= res.trace.objective[t - 1] + 1e-12);
  }
}

TEST_CASE("constrained descent handles an indefinite quadratic") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(3, 3);
  g(0, 0) = 1.0;
  g(1, 1) = 1.0;
  g(2, 2) = -0.2;
  Eigen::VectorXd c(3);
  c << 1.0, 0.0, 0.0;
  PgdResult res = pgd_constrained(g, c, 1.0);
  CHECK(res.trace.converged);
  CHECK(res.beta[0] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(std::abs(res.beta[1]) < 1e-7);
  CHECK(std::abs(res.beta[2]) < 1e-7);
  CHECK(res.beta.lpNorm<1>() <= 1.0 + 1e-9);
}

TEST_CASE("composite descent reduces to soft thresholding on the identity") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(4, 4);
  Eigen::VectorXd c(4);
  c << 1.0, -0.6, 0.3, 0.05;
  const double lambda = 0.4;
  PgdResult res = pgd_lagrangian(g, c, lambda, 10.0);
  Eigen::VectorXd expected = oracles::soft_threshold(c, lambda);
  CHECK((res.beta - expected).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("composite iterates stay inside the side ball") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(2, 2);
  g(0, 0) = -1.0;
  g(1, 1) = -1.0;  // concave quadratic pushes outward
  Eigen::VectorXd c(2);
  c << 1.0, 1.0;
  PgdOptions opts;
  opts.store_iterates = true;
  opts.eta = 4.0;
  opts.max_iter = 200;
  PgdResult res = pgd_lagrangian(g, c, 0.1, 1.5, opts);
  for (const auto& it : res.trace.iterates) {
    CHECK(it.lpNorm<1>() <= 1.5 + 1e-8);
  }
}

TEST_CASE("gradient blowup is reported, not silently absorbed") {
  Eigen::MatrixXd g(1, 1);
  g << std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd c(1);
  c << 1.0;
  PgdOptions opts;
  opts.eta = 1.0;
  CHECK_THROWS(pgd_constrained(g, c, 1.0, opts));
}

TEST_CASE("distance traces and reference tracking") {
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd c(2);
  c << 0.5, 0.25;
  PgdOptions opts;
  opts.store_iterates = true;
  opts.reference = Eigen::VectorXd::Zero(2);
  PgdResult res = pgd_constrained(g, c, 5.0, opts);
  CHECK(res.trace.dist_to_reference.size() ==
        res.trace.iterates.size());
  CHECK(res.trace.dist_to_reference.front() == 0.0);  // starts at zero
  CHECK(res.trace.dist_to_reference.back() ==
        doctest::Approx(res.beta.norm()).epsilon(1e-12));
}

TEST_CASE("contraction fit recovers a clean geometric decay") {
  std::vector<double> dist;
  for (int t = 0; t < 60; ++t) dist.push_back(std::pow(0.5, t));
  ContractionFit fit = fit_contraction(dist);
  CHECK(fit.gamma == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(fit.plateau_index == 59);
}

TEST_CASE("contraction fit stops at a floor") {
  std::vector<double> dist;
  for (int t = 0; t < 60; ++t) {
    dist.push_back(std::max(std::pow(0.5, t), 1e-4));
  }
  ContractionFit fit = fit_contraction(dist);
  CHECK(fit.gamma == doctest::Approx(0.5).epsilon(0.05));
  CHECK(fit.plateau_index >= 12);
  CHECK(fit.plateau_index <= 16);
}

TEST_CASE("contraction fit refuses traces without a geometric phase") {
  std::vector<double> flat(40, 1.0);
  CHECK_THROWS(fit_contraction(flat));
  std::vector<double> tiny = {1.0, 0.5, 0.25};
  CHECK_THROWS(fit_contraction(tiny));
}

TEST_CASE("solver runs are bitwise reproducible") {
  SplitMix64 rng(211);
  std::normal_distribution<double> gauss;
  const int p = 6;
  Eigen::MatrixXd g(p, p);
  for (int i = 0; i < p * p; ++i) g(i / p, i % p) = gauss(rng);
  g = 0.5 * (g + g.transpose());
  Eigen::VectorXd c(p);
  for (int i = 0; i < p; ++i) c[i] = gauss(rng);
  PgdResult a = pgd_constrained(g, c, 2.0);
  PgdResult b = pgd_constrained(g, c, 2.0);
  CHECK((a.beta - b.beta).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.trace.iterations == b.trace.iterations);
}
