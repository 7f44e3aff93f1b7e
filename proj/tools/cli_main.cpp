#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "corrlasso/csv.hpp"
#include "corrlasso/experiments.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void parse_cell(const std::string& cell, int* p, int* n) {
  *p = 0;
  *n = 0;
  std::stringstream ss(cell);
  std::string part;
  while (std::getline(ss, part, ',')) {
    auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("cell format is p=<int>,n=<int>");
    }
    std::string key = part.substr(0, eq);
    int value = std::stoi(part.substr(eq + 1));
    if (key == "p") {
      *p = value;
    } else if (key == "n") {
      *n = value;
    } else {
      throw std::runtime_error("unknown cell key: " + key);
    }
  }
  if (*p <= 0 || *n <= 0) {
    throw std::runtime_error("cell format is p=<int>,n=<int>");
  }
}

void print_record(const corrlasso::TrialRecord& rec) {
  std::cout << "p=" << rec.p << " n=" << rec.n << " k=" << rec.k
            << " trial=" << rec.trial << " seed=" << rec.seed << "\n"
            << "err_l2=" << corrlasso::format_double(rec.err_l2)
            << " err_l1=" << corrlasso::format_double(rec.err_l1)
            << " iterations=" << rec.iterations << "\n"
            << "status=" << (rec.ok ? "ok" : "failed") << "\n";
  if (!rec.note.empty()) std::cout << "note: " << rec.note << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse regression and precision recovery under corrupted "
               "covariates"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "out";
  int workers = 0;
  bool no_svg = false;
  auto* run = app.add_subcommand("run", "run a scenario sweep from a json file");
  run->add_option("scenario", scenario_path, "scenario json file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory");
  run->add_option("--workers", workers, "worker threads (0 = auto)");
  run->add_flag("--no-svg", no_svg, "skip the svg plots");

  int figure_index = 0;
  bool quick = false;
  std::string fig_out = "out";
  int fig_workers = 0;
  auto* figure = app.add_subcommand("figure", "run a bundled figure protocol");
  figure->add_option("index", figure_index, "figure index, 1 to 4")
      ->required()
      ->check(CLI::Range(1, 4));
  figure->add_flag("--quick", quick, "reduced sizes and trial counts");
  figure->add_option("--out", fig_out, "output directory");
  figure->add_option("--workers", fig_workers, "worker threads (0 = auto)");

  std::string replay_scenario, cell;
  int replay_trial = 0;
  std::uint64_t replay_seed = 0;
  bool seed_given = false;
  auto* replay = app.add_subcommand(
      "replay", "rerun one trial of a scenario and print its record");
  replay->add_option("scenario", replay_scenario, "scenario json file")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_option("--cell", cell, "target cell, e.g. p=128,n=640")
      ->required();
  replay->add_option("--trial", replay_trial, "trial index within the cell");
  replay
      ->add_option_function<std::uint64_t>(
          "--seed",
          [&](const std::uint64_t& v) {
            replay_seed = v;
            seed_given = true;
          },
          "override the derived seed")
      ->expected(1);

  std::string records_path, emit_format = "csv", emit_out = "out";
  std::string emit_task = "regression";
  auto* emit = app.add_subcommand(
      "emit", "rebuild aggregate tables and plots from a records file");
  emit->add_option("--records", records_path, "records csv file")
      ->required()
      ->check(CLI::ExistingFile);
  emit->add_option("--format", emit_format, "csv or svg")
      ->check(CLI::IsMember({"csv", "svg"}));
  emit->add_option("--out", emit_out, "output directory");
  emit->add_option("--task", emit_task, "regression or graph")
      ->check(CLI::IsMember({"regression", "graph"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      corrlasso::Scenario s =
          corrlasso::scenario_from_json(slurp(scenario_path));
      int w = workers > 0 ? workers : corrlasso::default_workers();
      corrlasso::SweepResult result = corrlasso::run_scenario(s, w);
      corrlasso::emit_sweep(result, out_dir, true, !no_svg);
      int failed = 0;
      for (const auto& rec : result.records) {
        if (!rec.ok) ++failed;
      }
      std::cout << result.records.size() - failed << "/"
                << result.records.size() << " trials succeeded, output in "
                << out_dir << "\n";
      return result.all_ok ? 0 : 1;
    }
    if (figure->parsed()) {
      int w = fig_workers > 0 ? fig_workers : corrlasso::default_workers();
      int code = corrlasso::run_figure(figure_index, quick, fig_out, w);
      std::cout << "figure " << figure_index << " output in " << fig_out
                << "\n";
      return code;
    }
    if (replay->parsed()) {
      corrlasso::Scenario s =
          corrlasso::scenario_from_json(slurp(replay_scenario));
      int p = 0, n = 0;
      parse_cell(cell, &p, &n);
      std::uint64_t seed = seed_given
                               ? replay_seed
                               : corrlasso::trial_seed(s, p, n, replay_trial);
      corrlasso::TrialRecord rec =
          corrlasso::run_single_trial(s, p, n, replay_trial, seed);
      print_record(rec);
      return rec.ok ? 0 : 1;
    }
    if (emit->parsed()) {
      corrlasso::CsvTable table = corrlasso::read_csv(records_path);
      corrlasso::SweepResult result;
      result.records = corrlasso::records_from_table(table);
      corrlasso::TaskKind task = emit_task == "graph"
                                     ? corrlasso::TaskKind::graph
                                     : corrlasso::TaskKind::regression;
      result.scenario.task = task;
      result.scenario.name =
          std::filesystem::path(records_path).stem().string();
      result.cells = corrlasso::aggregate_records(result.records, task);
      corrlasso::emit_sweep(result, emit_out, emit_format == "csv",
                            emit_format == "svg");
      std::cout << "rebuilt " << emit_format << " output in " << emit_out
                << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
