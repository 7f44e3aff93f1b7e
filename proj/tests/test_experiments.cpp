#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "corrlasso/experiments.hpp"
#include "corrlasso/rng.hpp"

using namespace corrlasso;

namespace {

Scenario tiny_regression() {
  Scenario s;
  s.name = "tiny";
  s.task = TaskKind::regression;
  s.p_list = {16};
  s.k_rule = "fixed";
  s.k_fixed = 2;
  s.n_list = {40, 80};
  s.corruption = "additive";
  s.sigma_w = 0.2;
  s.sigma_eps = 0.5;
  s.trials = 3;
  s.master_seed = 99;
  s.solver.max_iter = 4000;
  return s;
}

}  // namespace

TEST_CASE("scenario json round trip keeps every field") {
  Scenario s = tiny_regression();
  s.design = "var";
  s.a_norm = 0.3;
  s.solver.mode = "lagrangian";
  s.solver.lambda = "fixed";
  s.solver.lambda_value = 0.12;
  s.solver.b0 = 1.5;
  std::string text = scenario_to_json(s);
  Scenario back = scenario_from_json(text);
  CHECK(back.name == s.name);
  CHECK(back.task == s.task);
  CHECK(back.p_list == s.p_list);
  CHECK(back.k_rule == s.k_rule);
  CHECK(back.k_fixed == s.k_fixed);
  CHECK(back.n_list == s.n_list);
  CHECK(back.design == "var");
  CHECK(back.a_norm == doctest::Approx(0.3));
  CHECK(back.corruption == s.corruption);
  CHECK(back.sigma_w == doctest::Approx(s.sigma_w));
  CHECK(back.sigma_eps == doctest::Approx(s.sigma_eps));
  CHECK(back.trials == s.trials);
  CHECK(back.master_seed == s.master_seed);
  CHECK(back.solver.mode == "lagrangian");
  CHECK(back.solver.lambda == "fixed");
  CHECK(back.solver.lambda_value == doctest::Approx(0.12));
  CHECK(back.solver.b0 == doctest::Approx(1.5));
  CHECK(text.find("A_norm") != std::string::npos);
}

TEST_CASE("scenario json rejects unknown names") {
  CHECK_THROWS(scenario_from_json("{\"p_list\": [8], \"corruption\": \"gamma\"}"));
  CHECK_THROWS(scenario_from_json("{\"corruption\": \"additive\"}"));
  Scenario s = scenario_from_json("{\"p_list\": [8]}");
  CHECK(s.p_list == std::vector<int>{8});
  CHECK(s.corruption == "additive");
  CHECK(s.solver.mode == "constrained");
}

TEST_CASE("sparsity rules") {
  Scenario s;
  s.p_list = {64};
  s.k_rule = "ceil_sqrt";
  CHECK(k_for(s, 64) == 8);
  CHECK(k_for(s, 65) == 9);
  s.k_rule = "ceil_log";
  CHECK(k_for(s, 64) == 5);  // ln 64 = 4.158
  s.k_rule = "fixed";
  s.k_fixed = 3;
  CHECK(k_for(s, 64) == 3);

  Scenario g;
  g.task = TaskKind::graph;
  g.p_list = {40};
  g.graph_family = GraphFamily::chain;
  CHECK(k_for(g, 40) == 2);
  g.graph_family = GraphFamily::star;
  CHECK(k_for(g, 40) == 4);  // ceil(0.1 * 40)
  g.graph_family = GraphFamily::erdos_renyi;
  CHECK(k_for(g, 40) == 4);  // ceil(ln 40)
}

TEST_CASE("sample size grid follows the rescaled axis") {
  Scenario s;
  s.p_list = {128};
  s.k_rule = "fixed";
  s.k_fixed = 4;
  s.x_min = 2.0;
  s.x_max = 10.0;
  s.x_count = 5;
  std::vector<int> grid = n_grid_for(s, 128);
  REQUIRE(grid.size() == 5);
  const double kl = 4.0 * std::log(128.0);
  CHECK(grid.front() == std::lround(2.0 * kl));
  CHECK(grid.back() == std::lround(10.0 * kl));
  CHECK(grid[2] == std::lround(6.0 * kl));
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);

  s.n_list = {50, 100};
  CHECK(n_grid_for(s, 128) == std::vector<int>({50, 100}));

  Scenario dup;
  dup.p_list = {4};
  dup.k_rule = "fixed";
  dup.k_fixed = 1;
  dup.x_min = 2.0;
  dup.x_max = 2.2;
  dup.x_count = 6;  // rounds onto the same n repeatedly
  CHECK_THROWS(n_grid_for(dup, 4));
}

TEST_CASE("trial seeds stay in double-safe range and separate inputs") {
  Scenario s = tiny_regression();
  std::uint64_t a = trial_seed(s, 16, 40, 0);
  CHECK(a < (1ull << 53));
  CHECK(a != trial_seed(s, 16, 40, 1));
  CHECK(a != trial_seed(s, 16, 80, 0));
  CHECK(a != trial_seed(s, 32, 40, 0));
  Scenario other = s;
  other.master_seed = 100;
  CHECK(a != trial_seed(other, 16, 40, 0));
  CHECK(a == trial_seed(s, 16, 40, 0));
  double d = static_cast<double>(a);
  CHECK(static_cast<std::uint64_t>(d) == a);
}

TEST_CASE("single trials solve and report errors") {
  Scenario s = tiny_regression();
  TrialRecord rec = run_single_trial(s, 16, 80, 0, trial_seed(s, 16, 80, 0));
  CHECK(rec.ok);
  CHECK(rec.p == 16);
  CHECK(rec.n == 80);
  CHECK(rec.k == 2);
  CHECK(rec.err_l2 > 0.0);
  CHECK(rec.err_l2 < 1.0);
  CHECK(rec.err_l1 >= rec.err_l2);
  CHECK(rec.iterations > 0);
}

TEST_CASE("sweep output does not depend on the worker count") {
  Scenario s = tiny_regression();
  SweepResult one = run_scenario(s, 1);
  SweepResult four = run_scenario(s, 4);
  REQUIRE(one.records.size() == four.records.size());
  REQUIRE(one.records.size() == 6);  // 2 cells x 3 trials
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    const TrialRecord& a = one.records[i];
    const TrialRecord& b = four.records[i];
    CHECK(a.seed == b.seed);
    CHECK(a.n == b.n);
    CHECK(a.trial == b.trial);
    // bit identical, not approximately equal
    CHECK(std::memcmp(&a.err_l2, &b.err_l2, sizeof(double)) == 0);
    CHECK(std::memcmp(&a.err_l1, &b.err_l1, sizeof(double)) == 0);
    CHECK(a.iterations == b.iterations);
  }
  CHECK(one.all_ok);
}

TEST_CASE("record tables round trip through csv text") {
  Scenario s = tiny_regression();
  SweepResult res = run_scenario(s, 2);
  CsvTable table = records_table(res.records);
  std::string text = csv_to_string(table);
  std::vector<TrialRecord> back = records_from_table(parse_csv(text));
  REQUIRE(back.size() == res.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].seed == res.records[i].seed);
    CHECK(back[i].p == res.records[i].p);
    CHECK(std::memcmp(&back[i].err_l2, &res.records[i].err_l2,
                      sizeof(double)) == 0);
    CHECK(back[i].ok == res.records[i].ok);
  }
}

TEST_CASE("aggregation means and spreads match hand computation") {
  std::vector<TrialRecord> recs;
  for (int t = 0; t < 3; ++t) {
    TrialRecord r;
    r.p = 16;
    r.n = 50;
    r.k = 4;
    r.trial = t;
    r.err_l2 = 1.0 + t;  // 1, 2, 3
    r.ok = true;
    recs.push_back(r);
  }
  TrialRecord bad;
  bad.p = 16;
  bad.n = 100;
  bad.k = 4;
  bad.ok = false;
  recs.push_back(bad);

  std::vector<CellAggregate> cells =
      aggregate_records(recs, TaskKind::regression);
  REQUIRE(cells.size() == 2);
  CHECK(cells[0].n == 50);
  CHECK(cells[0].mean_err == doctest::Approx(2.0));
  CHECK(cells[0].sd_err == doctest::Approx(1.0));
  CHECK(cells[0].se_err == doctest::Approx(1.0 / std::sqrt(3.0)));
  CHECK(cells[0].x_rescaled ==
        doctest::Approx(50.0 / (4.0 * std::log(16.0))));
  CHECK(cells[0].ok_count == 3);
  CHECK(cells[1].ok_count == 0);
  CHECK(std::isnan(cells[1].mean_err));
}

TEST_CASE("spread of stacked curves") {
  Curve a, b;
  a.p = 1;
  b.p = 2;
  for (int i = 0; i <= 4; ++i) {
    double x = static_cast<double>(i);
    a.points.push_back({x, 2.0});
    b.points.push_back({x + 0.5, 2.0});
  }
  CHECK(stacking_spread({a, a}, 0.0) == doctest::Approx(0.0));

  Curve c = a;
  for (auto& pt : c.points) pt.second = 4.0;  // constant offset curve
  // range (4 - 2) / mean 3
  CHECK(stacking_spread({a, c}, 0.0) == doctest::Approx(2.0 / 3.0));

  Curve far;
  far.p = 3;
  far.points = {{100.0, 1.0}, {101.0, 1.0}};
  CHECK_THROWS(stacking_spread({a, far}, 0.0));
}

TEST_CASE("rank correlation") {
  std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
  CHECK(spearman(x, {2.0, 4.0, 6.0, 8.0}) == doctest::Approx(1.0));
  CHECK(spearman(x, {8.0, 6.0, 4.0, 2.0}) == doctest::Approx(-1.0));
  CHECK(spearman(x, {1.0, 3.0, 2.0, 4.0}) == doctest::Approx(0.8));
  CHECK_THROWS(spearman(x, {1.0, 1.0, 1.0, 1.0}));
}

TEST_CASE("axis rescaling modes") {
  Scenario s = tiny_regression();
  SweepResult res = run_scenario(s, 1);
  std::vector<Curve> raw = rescale_axis(res, AxisMode::raw);
  std::vector<Curve> scaled = rescale_axis(res, AxisMode::rescaled);
  REQUIRE(raw.size() == 1);
  REQUIRE(raw[0].points.size() == 2);
  CHECK(raw[0].points[0].first == doctest::Approx(40.0));
  const double kl = 2.0 * std::log(16.0);
  CHECK(scaled[0].points[0].first == doctest::Approx(40.0 / kl));
  CHECK(scaled[0].points[0].second ==
        doctest::Approx(raw[0].points[0].second));
}

TEST_CASE("restart study shares one instance and reference") {
  Scenario s = tiny_regression();
  s.n_list = {120};
  ConvergenceStudy study = convergence_study(s, 3);
  REQUIRE(study.runs.size() == 4);  // zero start plus 3 restarts
  CHECK(study.beta_ref.size() == 16);
  CHECK(study.stat_error_ref > 0.0);
  for (const ConvergenceRun& run : study.runs) {
    REQUIRE(!run.opt_err.empty());
    CHECK(run.opt_err.back() < run.opt_err.front());
    CHECK(run.stat_err.size() == run.opt_err.size());
    // every start converges to the same point
    CHECK(run.opt_err.back() < 1e-6);
  }
}

TEST_CASE("sweep emission writes parseable files") {
  namespace fs = std::filesystem;
  Scenario s = tiny_regression();
  SweepResult res = run_scenario(s, 1);
  fs::path dir = fs::temp_directory_path() / "corrlasso_emit_test";
  fs::remove_all(dir);
  emit_sweep(res, dir.string(), true, true);
  CHECK(fs::exists(dir / "tiny_records.csv"));
  CHECK(fs::exists(dir / "tiny_aggregates.csv"));
  CHECK(fs::exists(dir / "tiny_scenario.json"));
  CHECK(fs::exists(dir / "tiny_raw.svg"));
  CHECK(fs::exists(dir / "tiny_rescaled.svg"));

  CsvTable recs = read_csv((dir / "tiny_records.csv").string());
  std::vector<TrialRecord> back = records_from_table(recs);
  REQUIRE(back.size() == res.records.size());
  CHECK(back[0].seed == res.records[0].seed);

  std::ifstream json_in(dir / "tiny_scenario.json");
  std::string text((std::istreambuf_iterator<char>(json_in)),
                   std::istreambuf_iterator<char>());
  Scenario round = scenario_from_json(text);
  CHECK(round.name == "tiny");
  CHECK(round.n_list == s.n_list);

  std::ifstream svg_in(dir / "tiny_raw.svg");
  std::string svg((std::istreambuf_iterator<char>(svg_in)),
                  std::istreambuf_iterator<char>());
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("built-in sweep definitions") {
  Scenario f1 = figure_scenario(1, true);
  CHECK(f1.task == TaskKind::regression);
  CHECK(f1.p_list == std::vector<int>({64, 128, 256}));
  CHECK(f1.corruption == "additive");
  CHECK(f1.sigma_w == doctest::Approx(0.2));
  CHECK(f1.trials == 10);
  Scenario f1_full = figure_scenario(1, false);
  CHECK(f1_full.p_list == std::vector<int>({128, 256, 512}));
  CHECK(f1_full.trials == 100);

  Scenario f4 = figure_scenario(4, true);
  CHECK(f4.task == TaskKind::graph);
  CHECK(f4.corruption == "missing");
  CHECK(f4.rho == doctest::Approx(0.2));
  CHECK(f4.solver.symmetrize == "average");

  CHECK_THROWS(figure_scenario(3, true));
  CHECK_THROWS(figure_scenario(7, true));
}
