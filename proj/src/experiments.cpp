#include "corrlasso/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "corrlasso/calibration.hpp"
#include "corrlasso/rng.hpp"
#include "corrlasso/svg.hpp"

namespace corrlasso {

namespace {

using nlohmann::json;

constexpr std::uint64_t kSeedMask = (std::uint64_t{1} << 53) - 1;

std::string task_to_string(TaskKind task) {
  return task == TaskKind::graph ? "graph" : "regression";
}

TaskKind task_from_string(const std::string& s) {
  if (s == "regression") return TaskKind::regression;
  if (s == "graph") return TaskKind::graph;
  throw std::invalid_argument("unknown task: " + s);
}

std::string family_to_string(GraphFamily family) {
  switch (family) {
    case GraphFamily::chain: return "chain";
    case GraphFamily::star: return "star";
    case GraphFamily::erdos_renyi: return "erdos_renyi";
  }
  throw std::logic_error("unreachable graph family");
}

GraphFamily family_from_string(const std::string& s) {
  if (s == "chain") return GraphFamily::chain;
  if (s == "star") return GraphFamily::star;
  if (s == "erdos_renyi") return GraphFamily::erdos_renyi;
  throw std::invalid_argument("unknown graph family: " + s);
}

SymmetrizePolicy symmetrize_from_string(const std::string& s) {
  if (s == "auto") return SymmetrizePolicy::automatic;
  if (s == "lp") return SymmetrizePolicy::lp;
  if (s == "average") return SymmetrizePolicy::average;
  throw std::invalid_argument("unknown symmetrize policy: " + s);
}

void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& body) {
  if (count == 0) return;
  int usable = std::max(1, workers);
  usable = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(usable), count));
  if (usable == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto work = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) break;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(usable));
  for (int t = 0; t < usable; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void check_corruption_name(const std::string& c) {
  if (c != "none" && c != "additive" && c != "missing" &&
      c != "multiplicative") {
    throw std::invalid_argument("unknown corruption: " + c);
  }
}

Instance scenario_instance(const Scenario& s, int p, int n,
                           std::uint64_t seed) {
  DatasetConfig cfg;
  cfg.n = n;
  cfg.p = p;
  cfg.k = k_for(s, p);
  cfg.mode = s.design;
  cfg.sigma_eps = s.sigma_eps;
  cfg.a_norm = s.a_norm;
  cfg.seed = seed;
  check_corruption_name(s.corruption);
  if (s.corruption == "additive") cfg.sigma_w = s.sigma_w;
  if (s.corruption == "missing") cfg.rho = s.rho;
  Instance inst = make_dataset(cfg);
  if (s.corruption == "multiplicative") {
    MultiplicativeSpec mult{s.mult_lo, s.mult_hi};
    SplitMix64 base(seed);
    // same sub-stream slot the generator reserves for corruption draws
    SplitMix64 stream = base.split(4);
    inst.data.z = apply_multiplicative(inst.data.x, mult, stream);
    inst.data.model.kind = CorruptionKind::multiplicative;
    inst.data.model.mult = mult;
  }
  return inst;
}

SurrogatePair scenario_pair(const Scenario& s, const Instance& inst) {
  const auto& d = inst.data;
  const int p = static_cast<int>(d.z.cols());
  if (s.corruption == "none") return lasso_pair(d.z, d.y);
  if (s.corruption == "additive") {
    Eigen::MatrixXd sw =
        s.sigma_w * s.sigma_w * Eigen::MatrixXd::Identity(p, p);
    return additive_pair(d.z, d.y, sw);
  }
  if (s.corruption == "missing") return missing_pair(d.z, d.y, s.rho);
  MultiplicativeSpec mult{s.mult_lo, s.mult_hi};
  Eigen::VectorXd mean = Eigen::VectorXd::Constant(p, mult.mean());
  Eigen::MatrixXd second =
      mult.mean() * mult.mean() * Eigen::MatrixXd::Ones(p, p);
  second.diagonal().setConstant(mult.second_moment());
  return multiplicative_pair(d.z, d.y, mean, second);
}

double scenario_phi(const Scenario& s, const Instance& inst) {
  const double c0 = calib::kDeviationC0;
  const double beta_norm = inst.truth.beta.norm();
  const double sigma_x = 1.0;  // identity design covariance throughout
  const double sigma_w = s.corruption == "additive" ? s.sigma_w : 0.0;
  const double rho = s.corruption == "missing" ? s.rho : 0.0;
  if (s.corruption == "multiplicative") {
    throw std::invalid_argument(
        "no deviation scale for multiplicative corruption; set a fixed "
        "lambda");
  }
  if (s.design == "iid") {
    if (s.corruption == "missing") {
      return phi_missing_iid(sigma_x, rho, s.sigma_eps, beta_norm, c0);
    }
    return phi_additive_iid(sigma_x, sigma_w, s.sigma_eps, beta_norm, c0);
  }
  if (s.corruption == "missing") {
    return phi_missing_var(1.0, s.a_norm, rho, s.sigma_eps, beta_norm, c0);
  }
  return phi_additive_var(1.0, sigma_w * sigma_w, s.a_norm, s.sigma_eps,
                          beta_norm, c0);
}

PgdOptions solver_pgd_options(const Scenario& s,
                              const Eigen::MatrixXd& sigma_x) {
  PgdOptions opts;
  opts.tol = s.solver.tol;
  opts.max_iter = s.solver.max_iter;
  if (s.solver.eta == "theory") {
    opts.eta = choose_eta(sigma_x, EtaPolicy::theory);
  } else if (s.solver.eta == "spectral") {
    opts.eta = 0.0;
  } else {
    throw std::invalid_argument("unknown eta policy: " + s.solver.eta);
  }
  return opts;
}

PgdResult solve_regression(const Scenario& s, const Instance& inst,
                           const SurrogatePair& pair, int n,
                           const PgdOptions& opts) {
  if (s.solver.mode == "constrained") {
    double radius = s.solver.radius == "oracle"
                        ? inst.truth.beta.lpNorm<1>()
                        : s.solver.radius_value;
    if (s.solver.radius != "oracle" && s.solver.radius != "fixed") {
      throw std::invalid_argument("unknown radius rule: " + s.solver.radius);
    }
    return pgd_constrained(pair.cov, pair.cross, radius, opts);
  }
  if (s.solver.mode == "lagrangian") {
    double lambda = s.solver.lambda_value;
    if (s.solver.lambda == "oracle") {
      double phi = scenario_phi(s, inst);
      lambda = 4.0 * phi * std::sqrt(std::log(static_cast<double>(
                                         inst.truth.beta.size())) /
                                     static_cast<double>(n));
    } else if (s.solver.lambda != "fixed") {
      throw std::invalid_argument("unknown lambda rule: " + s.solver.lambda);
    }
    double radius =
        s.solver.b0 * std::sqrt(static_cast<double>(inst.truth.k));
    return pgd_lagrangian(pair.cov, pair.cross, lambda, radius, opts);
  }
  throw std::invalid_argument("unknown solver mode: " + s.solver.mode);
}

std::uint64_t graph_structure_seed(const Scenario& s, int p) {
  return SplitMix64::derive(
      SplitMix64::derive(s.master_seed, static_cast<std::uint64_t>(p)),
      10007);
}

Eigen::MatrixXd scenario_graph_precision(const Scenario& s, int p) {
  SplitMix64 rng(graph_structure_seed(s, p));
  return make_graph_precision(s.graph_family, p, k_for(s, p), rng);
}

TrialRecord run_graph_trial(const Scenario& s, int p, int n, int trial,
                            std::uint64_t seed, TrialRecord rec) {
  Eigen::MatrixXd theta = scenario_graph_precision(s, p);
  Eigen::MatrixXd sigma =
      theta.llt().solve(Eigen::MatrixXd::Identity(p, p));
  sigma = 0.5 * (sigma + sigma.transpose());

  DesignSpec dspec;
  dspec.n = n;
  dspec.p = p;
  dspec.mode = DesignMode::iid;
  dspec.sigma_x = sigma;
  SplitMix64 base(seed);
  SplitMix64 design_stream = base.split(2);
  Eigen::MatrixXd x = generate_design(dspec, design_stream);

  CorruptionModel model;
  Eigen::MatrixXd z;
  SplitMix64 corr_stream = base.split(4);
  check_corruption_name(s.corruption);
  if (s.corruption == "additive") {
    model.kind = CorruptionKind::additive;
    model.sigma_w = s.sigma_w * s.sigma_w * Eigen::MatrixXd::Identity(p, p);
    z = apply_additive_noise(x, model.sigma_w, corr_stream);
  } else if (s.corruption == "missing") {
    model.kind = CorruptionKind::missing;
    model.rho = Eigen::VectorXd::Constant(p, s.rho);
    Eigen::MatrixXd mask;
    apply_missing(x, model.rho, corr_stream, &z, &mask);
  } else if (s.corruption == "multiplicative") {
    model.kind = CorruptionKind::multiplicative;
    model.mult = MultiplicativeSpec{s.mult_lo, s.mult_hi};
    z = apply_multiplicative(x, model.mult, corr_stream);
  } else {
    model.kind = CorruptionKind::none;
    z = x;
  }

  PrecisionOptions popts;
  popts.truth = &theta;
  popts.symmetrize = symmetrize_from_string(s.solver.symmetrize);
  popts.pgd.tol = s.solver.tol;
  popts.pgd.max_iter = s.solver.max_iter;
  PrecisionEstimate est = estimate_precision(z, model, popts);

  Eigen::MatrixXd diff = est.theta - theta;
  rec.err_l2 = operator_norm(diff);
  rec.err_l1 = l1_operator_norm(diff);
  int iters = 0;
  for (int it : est.iterations) iters = std::max(iters, it);
  rec.iterations = iters;
  rec.ok = true;
  (void)trial;
  return rec;
}

double interp_curve(const std::vector<std::pair<double, double>>& pts,
                    double x) {
  if (pts.empty()) throw std::invalid_argument("empty curve");
  if (x <= pts.front().first) return pts.front().second;
  if (x >= pts.back().first) return pts.back().second;
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (x <= pts[i].first) {
      double x0 = pts[i - 1].first, x1 = pts[i].first;
      double y0 = pts[i - 1].second, y1 = pts[i].second;
      if (x1 <= x0) return y1;
      double t = (x - x0) / (x1 - x0);
      return y0 + t * (y1 - y0);
    }
  }
  return pts.back().second;
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n, 0.0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    double r = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    i = j + 1;
  }
  return ranks;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << text;
}

std::vector<PlotSeries> curves_to_series(const std::vector<Curve>& curves) {
  std::vector<PlotSeries> series;
  for (const auto& c : curves) {
    PlotSeries s;
    s.label = "p = " + std::to_string(c.p);
    for (const auto& pt : c.points) {
      if (std::isfinite(pt.second)) s.points.push_back(pt);
    }
    if (!s.points.empty()) series.push_back(std::move(s));
  }
  return series;
}

std::vector<PhiPoint> phi_scaling_impl(bool missing_kind, int trials,
                                       std::uint64_t seed, int workers) {
  const int p = missing_kind ? 128 : 256;
  const int k = missing_kind ? 5 : static_cast<int>(std::ceil(std::log(256.0)));
  const double log_p = std::log(static_cast<double>(p));
  std::vector<double> params;
  if (missing_kind) {
    for (int j = 0; j <= 6; ++j) params.push_back(0.05 * j);
  } else {
    for (int j = 0; j <= 8; ++j) params.push_back(0.10 + 0.025 * j);
  }
  std::vector<PhiPoint> out(params.size());
  for (std::size_t j = 0; j < params.size(); ++j) {
    const double param = params[j];
    int n;
    double rescale;
    Scenario sub;
    sub.task = TaskKind::regression;
    sub.p_list = {p};
    sub.k_rule = "fixed";
    sub.k_fixed = k;
    sub.design = "iid";
    sub.sigma_eps = 0.5;
    sub.trials = trials;
    sub.master_seed = SplitMix64::derive(seed, j);
    if (missing_kind) {
      sub.name = "severity_missing";
      sub.corruption = "missing";
      sub.rho = param;
      double denom = std::pow(1.0 - param, 4);
      n = static_cast<int>(std::lround(60.0 / denom * k * log_p));
      rescale = 1.0 / (1.0 + 0.5 * (1.0 - param));
    } else {
      sub.name = "severity_additive";
      sub.corruption = "additive";
      sub.sigma_w = param;
      double infl = (1.0 + param * param) * (1.0 + param * param);
      n = static_cast<int>(std::lround(60.0 * infl * k * log_p));
      rescale = std::sqrt(1.0 + param * param) / (param + 0.5);
    }
    sub.n_list = {n};
    SweepResult res = run_scenario(sub, workers);
    PhiPoint pt;
    pt.param = param;
    pt.n = n;
    double sum_raw = 0.0, sum = 0.0, sum_sq = 0.0;
    int count = 0;
    for (const auto& rec : res.records) {
      if (!rec.ok) continue;
      double v = rescale * rec.err_l2;
      sum_raw += rec.err_l2;
      sum += v;
      sum_sq += v * v;
      ++count;
    }
    pt.trials = count;
    if (count > 0) {
      pt.mean_raw = sum_raw / count;
      pt.mean_rescaled = sum / count;
      if (count > 1) {
        double var = (sum_sq - sum * sum / count) / (count - 1);
        pt.sd_rescaled = std::sqrt(std::max(0.0, var));
        pt.se_rescaled = pt.sd_rescaled / std::sqrt(static_cast<double>(count));
      }
    }
    out[j] = pt;
  }
  return out;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json j = json::parse(text);
  Scenario s;
  s.name = j.value("name", s.name);
  s.task = task_from_string(j.value("task", std::string("regression")));
  if (j.contains("p_list")) s.p_list = j["p_list"].get<std::vector<int>>();
  s.k_rule = j.value("k_rule", s.k_rule);
  s.k_fixed = j.value("k_fixed", s.k_fixed);
  s.x_min = j.value("x_min", s.x_min);
  s.x_max = j.value("x_max", s.x_max);
  s.x_count = j.value("x_count", s.x_count);
  if (j.contains("n_list")) s.n_list = j["n_list"].get<std::vector<int>>();
  s.design = j.value("design", s.design);
  s.a_norm = j.value("A_norm", s.a_norm);
  s.corruption = j.value("corruption", s.corruption);
  s.sigma_w = j.value("sigma_w", s.sigma_w);
  s.rho = j.value("rho", s.rho);
  s.mult_lo = j.value("mult_lo", s.mult_lo);
  s.mult_hi = j.value("mult_hi", s.mult_hi);
  s.sigma_eps = j.value("sigma_eps", s.sigma_eps);
  s.graph_family =
      family_from_string(j.value("graph_family", std::string("chain")));
  s.trials = j.value("trials", s.trials);
  s.master_seed = j.value("master_seed", s.master_seed);
  if (j.contains("solver")) {
    const json& sj = j["solver"];
    s.solver.mode = sj.value("mode", s.solver.mode);
    s.solver.radius = sj.value("radius", s.solver.radius);
    s.solver.radius_value = sj.value("radius_value", s.solver.radius_value);
    s.solver.lambda = sj.value("lambda", s.solver.lambda);
    s.solver.lambda_value = sj.value("lambda_value", s.solver.lambda_value);
    s.solver.b0 = sj.value("b0", s.solver.b0);
    s.solver.eta = sj.value("eta", s.solver.eta);
    s.solver.tol = sj.value("tol", s.solver.tol);
    s.solver.max_iter = sj.value("max_iter", s.solver.max_iter);
    s.solver.symmetrize = sj.value("symmetrize", s.solver.symmetrize);
  }
  if (s.p_list.empty()) throw std::invalid_argument("p_list is empty");
  check_corruption_name(s.corruption);
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["name"] = s.name;
  j["task"] = task_to_string(s.task);
  j["p_list"] = s.p_list;
  j["k_rule"] = s.k_rule;
  j["k_fixed"] = s.k_fixed;
  j["x_min"] = s.x_min;
  j["x_max"] = s.x_max;
  j["x_count"] = s.x_count;
  j["n_list"] = s.n_list;
  j["design"] = s.design;
  j["A_norm"] = s.a_norm;
  j["corruption"] = s.corruption;
  j["sigma_w"] = s.sigma_w;
  j["rho"] = s.rho;
  j["mult_lo"] = s.mult_lo;
  j["mult_hi"] = s.mult_hi;
  j["sigma_eps"] = s.sigma_eps;
  j["graph_family"] = family_to_string(s.graph_family);
  j["trials"] = s.trials;
  j["master_seed"] = s.master_seed;
  json sj;
  sj["mode"] = s.solver.mode;
  sj["radius"] = s.solver.radius;
  sj["radius_value"] = s.solver.radius_value;
  sj["lambda"] = s.solver.lambda;
  sj["lambda_value"] = s.solver.lambda_value;
  sj["b0"] = s.solver.b0;
  sj["eta"] = s.solver.eta;
  sj["tol"] = s.solver.tol;
  sj["max_iter"] = s.solver.max_iter;
  sj["symmetrize"] = s.solver.symmetrize;
  j["solver"] = sj;
  return j.dump(2) + "\n";
}

int k_for(const Scenario& s, int p) {
  if (p < 2) throw std::invalid_argument("p must be at least 2");
  if (s.task == TaskKind::graph) {
    switch (s.graph_family) {
      case GraphFamily::chain:
        return 2;
      case GraphFamily::star:
        return static_cast<int>(std::ceil(0.1 * p));
      case GraphFamily::erdos_renyi:
        return static_cast<int>(std::ceil(std::log(static_cast<double>(p))));
    }
  }
  if (s.k_rule == "ceil_sqrt") {
    return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(p))));
  }
  if (s.k_rule == "ceil_log") {
    return static_cast<int>(std::ceil(std::log(static_cast<double>(p))));
  }
  if (s.k_rule == "fixed") {
    if (s.k_fixed <= 0) throw std::invalid_argument("k_fixed must be positive");
    return s.k_fixed;
  }
  throw std::invalid_argument("unknown k rule: " + s.k_rule);
}

std::vector<int> n_grid_for(const Scenario& s, int p) {
  if (!s.n_list.empty()) return s.n_list;
  if (s.x_count < 1) throw std::invalid_argument("x_count must be positive");
  const int k = k_for(s, p);
  const double scale = k * std::log(static_cast<double>(p));
  std::vector<int> grid;
  grid.reserve(static_cast<std::size_t>(s.x_count));
  for (int i = 0; i < s.x_count; ++i) {
    double x = s.x_count == 1 ? s.x_min
                              : s.x_min + (s.x_max - s.x_min) * i /
                                              (s.x_count - 1);
    int n = static_cast<int>(std::lround(x * scale));
    grid.push_back(std::max(2, n));
  }
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] <= grid[i - 1]) {
      throw std::invalid_argument(
          "sample size grid has duplicate entries; widen the x range");
    }
  }
  return grid;
}

std::uint64_t trial_seed(const Scenario& s, int p, int n, int trial) {
  std::uint64_t h =
      SplitMix64::derive(s.master_seed, static_cast<std::uint64_t>(p));
  h = SplitMix64::derive(h, static_cast<std::uint64_t>(n));
  h = SplitMix64::derive(h, static_cast<std::uint64_t>(trial));
  return h & kSeedMask;
}

TrialRecord run_single_trial(const Scenario& s, int p, int n, int trial,
                             std::uint64_t seed) {
  TrialRecord rec;
  rec.p = p;
  rec.n = n;
  rec.k = k_for(s, p);
  rec.trial = trial;
  rec.seed = seed;
  if (s.task == TaskKind::graph) {
    return run_graph_trial(s, p, n, trial, seed, rec);
  }
  Instance inst = scenario_instance(s, p, n, seed);
  SurrogatePair pair = scenario_pair(s, inst);
  PgdOptions opts = solver_pgd_options(s, inst.design.sigma_x);
  PgdResult res = solve_regression(s, inst, pair, n, opts);
  Eigen::VectorXd diff = res.beta - inst.truth.beta;
  rec.err_l2 = diff.norm();
  rec.err_l1 = diff.lpNorm<1>();
  rec.iterations = res.trace.iterations;
  rec.ok = true;
  return rec;
}

SweepResult run_scenario(const Scenario& s, int workers) {
  SweepResult out;
  out.scenario = s;
  if (s.trials < 1) throw std::invalid_argument("trials must be positive");
  struct Cell {
    int p, n;
  };
  std::vector<Cell> cells;
  for (int p : s.p_list) {
    for (int n : n_grid_for(s, p)) cells.push_back({p, n});
  }
  const std::size_t total = cells.size() * static_cast<std::size_t>(s.trials);
  out.records.resize(total);
  parallel_for(total, workers, [&](std::size_t idx) {
    const std::size_t ci = idx / static_cast<std::size_t>(s.trials);
    const int trial = static_cast<int>(idx % static_cast<std::size_t>(s.trials));
    const int p = cells[ci].p;
    const int n = cells[ci].n;
    const std::uint64_t seed = trial_seed(s, p, n, trial);
    TrialRecord rec;
    try {
      rec = run_single_trial(s, p, n, trial, seed);
    } catch (const std::exception& e) {
      rec.p = p;
      rec.n = n;
      rec.k = k_for(s, p);
      rec.trial = trial;
      rec.seed = seed;
      rec.ok = false;
      rec.note = e.what();
    }
    out.records[idx] = rec;
  });
  out.cells = aggregate_records(out.records, s.task);
  out.all_ok = std::all_of(out.records.begin(), out.records.end(),
                           [](const TrialRecord& r) { return r.ok; });
  return out;
}

int default_workers() {
  if (const char* env = std::getenv("CORRLASSO_WORKERS")) {
    int v = std::atoi(env);
    if (v >= 1) return v;
  }
  unsigned hw = std::thread::hardware_concurrency();
  if (hw == 0) hw = 1;
  return static_cast<int>(std::min(hw, 16u));
}

std::vector<Curve> rescale_axis(const SweepResult& result, AxisMode mode) {
  std::vector<Curve> curves;
  for (const auto& cell : result.cells) {
    Curve* target = nullptr;
    for (auto& c : curves) {
      if (c.p == cell.p) target = &c;
    }
    if (target == nullptr) {
      curves.push_back(Curve{cell.p, {}});
      target = &curves.back();
    }
    double x = mode == AxisMode::raw ? cell.x_raw : cell.x_rescaled;
    double y = mode == AxisMode::graph ? cell.mean_err_rescaled : cell.mean_err;
    if (cell.ok_count > 0) target->points.emplace_back(x, y);
  }
  for (auto& c : curves) {
    std::sort(c.points.begin(), c.points.end());
  }
  return curves;
}

double stacking_spread(const std::vector<Curve>& curves,
                       double x_min_filter) {
  if (curves.size() < 2) {
    throw std::invalid_argument("need at least two curves to compare");
  }
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& c : curves) {
    if (c.points.empty()) throw std::invalid_argument("empty curve");
    lo = std::max(lo, c.points.front().first);
    hi = std::min(hi, c.points.back().first);
  }
  lo = std::max(lo, x_min_filter);
  if (lo > hi) throw std::invalid_argument("curves do not overlap");
  std::vector<double> grid;
  for (const auto& c : curves) {
    for (const auto& pt : c.points) {
      if (pt.first >= lo && pt.first <= hi) grid.push_back(pt.first);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) {
    throw std::invalid_argument("no shared grid points in the common range");
  }
  double worst = 0.0;
  for (double x : grid) {
    double vmin = std::numeric_limits<double>::infinity();
    double vmax = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& c : curves) {
      double v = interp_curve(c.points, x);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
      sum += v;
    }
    double mean = sum / static_cast<double>(curves.size());
    if (mean > 0.0) worst = std::max(worst, (vmax - vmin) / mean);
  }
  return worst;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("spearman needs two equal-length samples");
  }
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = rx[i] - mx, dy = ry[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) {
    throw std::invalid_argument("spearman is undefined for constant input");
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<PhiPoint> phi_scaling_additive(int trials, std::uint64_t seed,
                                           int workers) {
  return phi_scaling_impl(false, trials, seed, workers);
}

std::vector<PhiPoint> phi_scaling_missing(int trials, std::uint64_t seed,
                                          int workers) {
  return phi_scaling_impl(true, trials, seed, workers);
}

ConvergenceStudy convergence_study(const Scenario& s, int restarts) {
  if (s.task != TaskKind::regression) {
    throw std::invalid_argument("convergence study needs a regression task");
  }
  const int p = s.p_list.at(0);
  const int n = n_grid_for(s, p).front();
  const std::uint64_t seed = trial_seed(s, p, n, 0);
  Instance inst = scenario_instance(s, p, n, seed);
  SurrogatePair pair = scenario_pair(s, inst);
  PgdOptions opts = solver_pgd_options(s, inst.design.sigma_x);
  opts.store_iterates = true;

  const bool lagrangian = s.solver.mode == "lagrangian";
  double lambda = 0.0, side = 0.0, radius = 0.0;
  if (lagrangian) {
    lambda = s.solver.lambda == "oracle"
                 ? 4.0 * scenario_phi(s, inst) *
                       std::sqrt(std::log(static_cast<double>(p)) / n)
                 : s.solver.lambda_value;
    side = s.solver.b0 * std::sqrt(static_cast<double>(inst.truth.k));
  } else {
    radius = s.solver.radius == "oracle" ? inst.truth.beta.lpNorm<1>()
                                         : s.solver.radius_value;
  }
  auto solve = [&](const PgdOptions& o) {
    return lagrangian ? pgd_lagrangian(pair.cov, pair.cross, lambda, side, o)
                      : pgd_constrained(pair.cov, pair.cross, radius, o);
  };

  ConvergenceStudy study;
  PgdResult ref = solve(opts);
  study.beta_ref = ref.beta;
  study.stat_error_ref = (ref.beta - inst.truth.beta).norm();

  auto make_run = [&](const PgdResult& res) {
    ConvergenceRun run;
    run.opt_err.reserve(res.trace.iterates.size());
    run.stat_err.reserve(res.trace.iterates.size());
    for (const auto& it : res.trace.iterates) {
      run.opt_err.push_back((it - study.beta_ref).norm());
      run.stat_err.push_back((it - inst.truth.beta).norm());
    }
    try {
      ContractionFit fit = fit_contraction(run.opt_err);
      run.gamma_hat = fit.gamma;
      run.plateau_index = fit.plateau_index;
    } catch (const std::exception&) {
    }
    return run;
  };
  study.runs.push_back(make_run(ref));

  const double ball = lagrangian ? side : radius;
  SplitMix64 restart_rng(SplitMix64::derive(seed, 777));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.3, 1.0);
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd g(p);
    for (int i = 0; i < p; ++i) g[i] = gauss(restart_rng);
    double l1 = g.lpNorm<1>();
    if (l1 <= 0.0) continue;
    PgdOptions ropts = opts;
    ropts.beta0 = g * (ball * unif(restart_rng) / l1);
    study.runs.push_back(make_run(solve(ropts)));
  }
  return study;
}

CsvTable records_table(const std::vector<TrialRecord>& records) {
  CsvTable t;
  t.columns = {"p",      "n",          "k",         "trial", "seed",
               "err_l2", "err_l1",     "iterations", "gamma_hat", "ok"};
  t.rows.reserve(records.size());
  for (const auto& r : records) {
    t.rows.push_back({static_cast<double>(r.p), static_cast<double>(r.n),
                      static_cast<double>(r.k), static_cast<double>(r.trial),
                      static_cast<double>(r.seed), r.err_l2, r.err_l1,
                      static_cast<double>(r.iterations), r.gamma_hat,
                      r.ok ? 1.0 : 0.0});
  }
  return t;
}

std::vector<TrialRecord> records_from_table(const CsvTable& table) {
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
      if (table.columns[i] == name) return i;
    }
    throw std::invalid_argument("records table is missing column " + name);
  };
  const std::size_t cp = col("p"), cn = col("n"), ck = col("k"),
                    ct = col("trial"), cs = col("seed"), c2 = col("err_l2"),
                    c1 = col("err_l1"), ci = col("iterations"),
                    cg = col("gamma_hat"), co = col("ok");
  std::vector<TrialRecord> out;
  out.reserve(table.rows.size());
  for (const auto& row : table.rows) {
    TrialRecord r;
    r.p = static_cast<int>(row[cp]);
    r.n = static_cast<int>(row[cn]);
    r.k = static_cast<int>(row[ck]);
    r.trial = static_cast<int>(row[ct]);
    r.seed = static_cast<std::uint64_t>(row[cs]);
    r.err_l2 = row[c2];
    r.err_l1 = row[c1];
    r.iterations = static_cast<int>(row[ci]);
    r.gamma_hat = row[cg];
    r.ok = row[co] != 0.0;
    out.push_back(r);
  }
  return out;
}

CsvTable aggregates_table(const std::vector<CellAggregate>& cells) {
  CsvTable t;
  t.columns = {"p",        "n",      "k",      "x_raw",  "x_rescaled",
               "mean_err", "sd_err", "se_err", "mean_err_rescaled",
               "ok_count", "trials"};
  for (const auto& c : cells) {
    t.rows.push_back({static_cast<double>(c.p), static_cast<double>(c.n),
                      static_cast<double>(c.k), c.x_raw, c.x_rescaled,
                      c.mean_err, c.sd_err, c.se_err, c.mean_err_rescaled,
                      static_cast<double>(c.ok_count),
                      static_cast<double>(c.trials)});
  }
  return t;
}

std::vector<CellAggregate> aggregate_records(
    const std::vector<TrialRecord>& records, TaskKind task) {
  std::vector<CellAggregate> cells;
  std::map<std::pair<int, int>, std::size_t> index;
  for (const auto& r : records) {
    auto key = std::make_pair(r.p, r.n);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, cells.size());
      CellAggregate c;
      c.p = r.p;
      c.n = r.n;
      c.k = r.k;
      c.x_raw = r.n;
      c.x_rescaled =
          r.n / (r.k * std::log(static_cast<double>(r.p)));
      cells.push_back(c);
      it = index.find(key);
    }
    CellAggregate& c = cells[it->second];
    ++c.trials;
    if (r.ok) {
      ++c.ok_count;
      c.mean_err += r.err_l2;
      c.sd_err += r.err_l2 * r.err_l2;
    }
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (auto& c : cells) {
    if (c.ok_count == 0) {
      c.mean_err = nan;
      c.sd_err = nan;
      c.se_err = nan;
      c.mean_err_rescaled = nan;
      continue;
    }
    double sum = c.mean_err, sum_sq = c.sd_err;
    c.mean_err = sum / c.ok_count;
    if (c.ok_count > 1) {
      double var = (sum_sq - sum * sum / c.ok_count) / (c.ok_count - 1);
      c.sd_err = std::sqrt(std::max(0.0, var));
      c.se_err = c.sd_err / std::sqrt(static_cast<double>(c.ok_count));
    } else {
      c.sd_err = 0.0;
      c.se_err = 0.0;
    }
    c.mean_err_rescaled = task == TaskKind::graph
                              ? c.mean_err / std::sqrt(static_cast<double>(c.k))
                              : c.mean_err;
  }
  std::sort(cells.begin(), cells.end(),
            [](const CellAggregate& a, const CellAggregate& b) {
              return a.p != b.p ? a.p < b.p : a.n < b.n;
            });
  return cells;
}

void emit_sweep(const SweepResult& result, const std::string& out_dir,
                bool csv, bool svg) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const std::string base = out_dir + "/" + result.scenario.name;
  if (csv) {
    write_csv(records_table(result.records), base + "_records.csv");
    write_csv(aggregates_table(result.cells), base + "_aggregates.csv");
    write_text_file(base + "_scenario.json",
                    scenario_to_json(result.scenario));
    std::ostringstream failures;
    for (const auto& r : result.records) {
      if (!r.ok) {
        failures << "p=" << r.p << " n=" << r.n << " trial=" << r.trial
                 << " seed=" << r.seed << ": " << r.note << "\n";
      }
    }
    if (!failures.str().empty()) {
      write_text_file(base + "_failures.txt", failures.str());
    }
  }
  if (!svg) return;
  const bool graph = result.scenario.task == TaskKind::graph;
  {
    PlotSpec spec;
    spec.title = result.scenario.name + " (raw sample size)";
    spec.x_label = "n";
    spec.y_label = graph ? "operator norm error" : "l2 error";
    spec.series = curves_to_series(rescale_axis(result, AxisMode::raw));
    if (!spec.series.empty()) write_line_plot(spec, base + "_raw.svg");
  }
  {
    PlotSpec spec;
    spec.title = result.scenario.name + " (rescaled sample size)";
    spec.x_label = "n / (k log p)";
    spec.y_label = graph ? "operator norm error / sqrt(k)" : "l2 error";
    spec.series = curves_to_series(rescale_axis(
        result, graph ? AxisMode::graph : AxisMode::rescaled));
    if (!spec.series.empty()) write_line_plot(spec, base + "_rescaled.svg");
  }
}

Scenario figure_scenario(int which, bool quick) {
  Scenario s;
  switch (which) {
    case 1:
      s.name = "figure1";
      s.task = TaskKind::regression;
      s.p_list = quick ? std::vector<int>{64, 128, 256}
                       : std::vector<int>{128, 256, 512};
      s.k_rule = "ceil_sqrt";
      s.x_min = 2.0;
      s.x_max = 25.0;
      s.x_count = 12;
      s.corruption = "additive";
      s.sigma_w = 0.2;
      s.sigma_eps = 0.5;
      s.trials = quick ? 10 : 100;
      s.master_seed = 1101;
      return s;
    case 2:
      s.name = "figure2";
      s.task = TaskKind::regression;
      s.p_list = {128};
      s.k_rule = "fixed";
      s.k_fixed = 11;
      s.n_list = {640};
      s.corruption = "additive";
      s.sigma_w = 0.2;
      s.sigma_eps = 0.5;
      s.trials = 1;
      s.master_seed = 1202;
      return s;
    case 4:
      s.name = "figure4_missing";
      s.task = TaskKind::graph;
      s.graph_family = GraphFamily::chain;
      s.p_list = quick ? std::vector<int>{32, 64} : std::vector<int>{64, 128};
      s.x_min = 10.0;
      s.x_max = 60.0;
      s.x_count = 8;
      s.corruption = "missing";
      s.rho = 0.2;
      s.trials = quick ? 10 : 50;
      s.solver.symmetrize = "average";
      s.master_seed = 1404;
      return s;
    default:
      throw std::invalid_argument(
          "no single scenario for this figure; indices 1, 2 and 4 have one");
  }
}

int run_figure(int which, bool quick, const std::string& out_dir,
               int workers) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  if (which == 1) {
    SweepResult r = run_scenario(figure_scenario(1, quick), workers);
    emit_sweep(r, out_dir, true, true);
    return r.all_ok ? 0 : 1;
  }
  if (which == 2) {
    Scenario s = figure_scenario(2, quick);
    ConvergenceStudy study = convergence_study(s, 10);
    CsvTable traces;
    traces.columns = {"run", "iter", "opt_err", "stat_err"};
    CsvTable summary;
    summary.columns = {"run", "gamma_hat", "plateau_index", "final_opt_err",
                       "final_stat_err"};
    PlotSpec opt_spec, stat_spec;
    opt_spec.title = "distance to the reference minimizer";
    opt_spec.x_label = "iteration";
    opt_spec.y_label = "||beta_t - beta_hat||";
    opt_spec.log_y = true;
    stat_spec.title = "distance to the truth";
    stat_spec.x_label = "iteration";
    stat_spec.y_label = "||beta_t - beta*||";
    stat_spec.log_y = true;
    for (std::size_t r = 0; r < study.runs.size(); ++r) {
      const auto& run = study.runs[r];
      PlotSeries opt_series, stat_series;
      opt_series.label = r == 0 ? "zero start" : "restart " + std::to_string(r);
      stat_series.label = opt_series.label;
      for (std::size_t i = 0; i < run.opt_err.size(); ++i) {
        traces.rows.push_back({static_cast<double>(r), static_cast<double>(i),
                               run.opt_err[i], run.stat_err[i]});
        opt_series.points.emplace_back(static_cast<double>(i), run.opt_err[i]);
        stat_series.points.emplace_back(static_cast<double>(i),
                                        run.stat_err[i]);
      }
      opt_spec.series.push_back(std::move(opt_series));
      stat_spec.series.push_back(std::move(stat_series));
      summary.rows.push_back({static_cast<double>(r), run.gamma_hat,
                              static_cast<double>(run.plateau_index),
                              run.opt_err.empty() ? 0.0 : run.opt_err.back(),
                              run.stat_err.empty() ? 0.0
                                                   : run.stat_err.back()});
    }
    write_csv(traces, out_dir + "/figure2_traces.csv");
    write_csv(summary, out_dir + "/figure2_summary.csv");
    write_text_file(out_dir + "/figure2_scenario.json", scenario_to_json(s));
    write_line_plot(opt_spec, out_dir + "/figure2_opt.svg");
    write_line_plot(stat_spec, out_dir + "/figure2_stat.svg");
    return 0;
  }
  if (which == 3) {
    const int trials = quick ? 20 : 200;
    auto additive = phi_scaling_additive(trials, 1303, workers);
    auto missing = phi_scaling_missing(trials, 1313, workers);
    CsvTable t;
    t.columns = {"kind",          "param",       "n",
                 "mean_raw",      "mean_rescaled", "sd_rescaled",
                 "se_rescaled",   "trials"};
    bool any_empty = false;
    auto add_rows = [&](const std::vector<PhiPoint>& pts, double kind) {
      for (const auto& pt : pts) {
        if (pt.trials == 0) any_empty = true;
        t.rows.push_back({kind, pt.param, static_cast<double>(pt.n),
                          pt.mean_raw, pt.mean_rescaled, pt.sd_rescaled,
                          pt.se_rescaled, static_cast<double>(pt.trials)});
      }
    };
    add_rows(additive, 0.0);
    add_rows(missing, 1.0);
    write_csv(t, out_dir + "/figure3_curves.csv");
    auto make_plot = [&](const std::vector<PhiPoint>& pts,
                         const std::string& x_label, const std::string& path) {
      PlotSpec spec;
      spec.title = "error against corruption severity";
      spec.x_label = x_label;
      spec.y_label = "l2 error";
      PlotSeries raw, rescaled;
      raw.label = "raw";
      rescaled.label = "rescaled";
      for (const auto& pt : pts) {
        if (pt.trials == 0) continue;
        raw.points.emplace_back(pt.param, pt.mean_raw);
        rescaled.points.emplace_back(pt.param, pt.mean_rescaled);
      }
      spec.series = {raw, rescaled};
      write_line_plot(spec, path);
    };
    make_plot(additive, "noise scale", out_dir + "/figure3_additive.svg");
    make_plot(missing, "missing fraction", out_dir + "/figure3_missing.svg");
    return any_empty ? 1 : 0;
  }
  if (which == 4) {
    SweepResult miss = run_scenario(figure_scenario(4, quick), workers);
    emit_sweep(miss, out_dir, true, true);
    bool ok = miss.all_ok;
    if (!quick) {
      Scenario add = figure_scenario(4, quick);
      add.name = "figure4_additive";
      add.corruption = "additive";
      add.sigma_w = 0.2;
      add.rho = 0.0;
      add.master_seed = 1414;
      SweepResult res = run_scenario(add, workers);
      emit_sweep(res, out_dir, true, true);
      ok = ok && res.all_ok;
    }
    return ok ? 0 : 1;
  }
  throw std::invalid_argument("figure index must be between 1 and 4");
}

}  // namespace corrlasso
