#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "corrlasso/csv.hpp"
#include "corrlasso/data.hpp"
#include "corrlasso/graphical.hpp"
#include "corrlasso/optimizer.hpp"
#include "corrlasso/surrogates.hpp"

namespace corrlasso {

enum class TaskKind { regression, graph };

struct SolverSettings {
  std::string mode = "constrained";  // constrained | lagrangian
  std::string radius = "oracle";     // oracle (l1 norm of beta*) | fixed
  double radius_value = 0.0;
  std::string lambda = "oracle";  // oracle (4 phi sqrt(log p / n)) | fixed
  double lambda_value = 0.0;
  double b0 = 1.0;  // lagrangian side ball b0 * sqrt(k)
  std::string eta = "spectral";  // spectral | theory
  double tol = 1e-9;
  int max_iter = 10000;
  std::string symmetrize = "auto";  // auto | lp | average (graph task)
};

struct Scenario {
  std::string name = "scenario";
  TaskKind task = TaskKind::regression;
  std::vector<int> p_list;
  std::string k_rule = "ceil_sqrt";  // ceil_sqrt | ceil_log | fixed
  int k_fixed = 0;
  // n grid in rescaled units: n = round(x * k * ln p), x evenly spaced
  double x_min = 2.0;
  double x_max = 25.0;
  int x_count = 12;
  std::vector<int> n_list;  // explicit override
  std::string design = "iid";  // iid | var
  double a_norm = 0.0;
  std::string corruption = "additive";  // none|additive|missing|multiplicative
  double sigma_w = 0.2;
  double rho = 0.0;
  double mult_lo = 0.8;
  double mult_hi = 1.2;
  double sigma_eps = 0.5;
  GraphFamily graph_family = GraphFamily::chain;
  SolverSettings solver;
  int trials = 100;
  std::uint64_t master_seed = 20260822;
};

Scenario scenario_from_json(const std::string& text);
std::string scenario_to_json(const Scenario& s);

// graph task: the scenario's k is the graph degree parameter (2 for chains,
// the hub degree for stars, ceil(ln p) for the random family)
int k_for(const Scenario& s, int p);
std::vector<int> n_grid_for(const Scenario& s, int p);

struct TrialRecord {
  int p = 0, n = 0, k = 0, trial = 0;
  std::uint64_t seed = 0;
  double err_l2 = 0.0;  // graph task: operator-norm error
  double err_l1 = 0.0;  // graph task: l1-operator-norm error
  int iterations = 0;
  double gamma_hat = std::numeric_limits<double>::quiet_NaN();
  bool ok = false;
  std::string note;
};

struct CellAggregate {
  int p = 0, n = 0, k = 0;
  double x_raw = 0.0, x_rescaled = 0.0;
  double mean_err = 0.0, sd_err = 0.0, se_err = 0.0;
  double mean_err_rescaled = 0.0;  // graph task: mean of err / sqrt(k)
  int ok_count = 0, trials = 0;
};

struct SweepResult {
  Scenario scenario;
  std::vector<TrialRecord> records;
  std::vector<CellAggregate> cells;
  bool all_ok = false;
};

// seeds chain off (master, p, n, trial) so any single cell replays in
// isolation; truncated to 53 bits so they survive the numeric csv
std::uint64_t trial_seed(const Scenario& s, int p, int n, int trial);
TrialRecord run_single_trial(const Scenario& s, int p, int n, int trial,
                             std::uint64_t seed);
SweepResult run_scenario(const Scenario& s, int workers);

int default_workers();  // CORRLASSO_WORKERS env var, else hardware

enum class AxisMode { raw, rescaled, graph };

struct Curve {
  int p = 0;
  std::vector<std::pair<double, double>> points;
};

std::vector<Curve> rescale_axis(const SweepResult& result, AxisMode mode);

// max over the shared interpolation grid of (max - min) / mean across
// curves, using points with x >= x_min_filter
double stacking_spread(const std::vector<Curve>& curves, double x_min_filter);

double spearman(const std::vector<double>& x, const std::vector<double>& y);

struct PhiPoint {
  double param = 0.0;  // noise scale or missing fraction
  int n = 0;
  double mean_raw = 0.0;
  double mean_rescaled = 0.0;
  double sd_rescaled = 0.0;
  double se_rescaled = 0.0;
  int trials = 0;
};

// error curves over a corruption-severity grid with n matched to severity,
// reported both raw and rescaled by the theory prefactor
std::vector<PhiPoint> phi_scaling_additive(int trials, std::uint64_t seed,
                                           int workers);
std::vector<PhiPoint> phi_scaling_missing(int trials, std::uint64_t seed,
                                          int workers);

struct ConvergenceRun {
  std::vector<double> opt_err;
  std::vector<double> stat_err;
  double gamma_hat = std::numeric_limits<double>::quiet_NaN();
  int plateau_index = -1;
};

struct ConvergenceStudy {
  Eigen::VectorXd beta_ref;
  double stat_error_ref = 0.0;
  std::vector<ConvergenceRun> runs;  // runs[0] starts from zero
};

// one instance, one reference solve from zero, then random feasible restarts
ConvergenceStudy convergence_study(const Scenario& s, int restarts);

CsvTable records_table(const std::vector<TrialRecord>& records);
std::vector<TrialRecord> records_from_table(const CsvTable& table);
CsvTable aggregates_table(const std::vector<CellAggregate>& cells);
std::vector<CellAggregate> aggregate_records(
    const std::vector<TrialRecord>& records, TaskKind task);

void emit_sweep(const SweepResult& result, const std::string& out_dir,
                bool csv, bool svg);

Scenario figure_scenario(int which, bool quick);
int run_figure(int which, bool quick, const std::string& out_dir, int workers);

}  // namespace corrlasso
