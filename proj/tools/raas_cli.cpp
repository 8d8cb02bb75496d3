// Command-line front end.
//
//   raas validate <file>                          check a scenario file
//   raas synth    --seed N --out <file>           generate a corridor scenario
//   raas run      --scenario <file> --strategy s  run one strategy (or "all")
//   raas sweep    --scenario <file> --param p     sensitivity sweep
//   raas couple   --scenario <file>               optimizer/simulator loop
//
// Exit codes: 0 success, 2 invalid input (file or arguments), 3 internal
// error. Every output file is UTF-8 and written atomically (temp + rename).

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "raas/coupling.hpp"
#include "raas/strategy.hpp"
#include "raas/synth.hpp"

namespace fs = std::filesystem;
using namespace raas;

namespace {

//------------------------------------------------------------------------------
// Output helpers
//------------------------------------------------------------------------------

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string());
    out << content;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string file_name(Strategy s, const char* stem, const char* ext) {
  std::string name = to_string(s);
  for (char& c : name)
    if (c == '-') c = '_';
  return std::string(stem) + "_" + name + ext;
}

//------------------------------------------------------------------------------
// Shared scenario/disruption loading
//------------------------------------------------------------------------------

struct Inputs {
  ScenarioModel model;
  DisruptionSpec disruption;
};

Inputs load_inputs(const std::string& scenario_path,
                   const std::string& disruption_path) {
  Inputs in;
  in.model = load_scenario(scenario_path);
  if (disruption_path.empty()) {
    in.disruption = default_disruption(in.model);
  } else {
    in.disruption = load_disruption(disruption_path);
    validate_disruption(in.model, in.disruption);
  }
  return in;
}

//------------------------------------------------------------------------------
// validate
//------------------------------------------------------------------------------

int cmd_validate(const std::string& path) {
  const ScenarioModel m = load_scenario(path);
  std::printf(
      "ok: %zu stations, %zu links, %zu modes, %zu lines, %zu vehicles, "
      "%zu demand entries\n",
      m.stations.size(), m.links.size(), m.modes.size(), m.lines.size(),
      m.vehicles.size(), m.demand.entries.size());
  return 0;
}

//------------------------------------------------------------------------------
// synth
//------------------------------------------------------------------------------

int cmd_synth(std::uint64_t seed, const std::string& variant,
              const std::string& out) {
  const ScenarioModel m = synth_corridor({seed, variant});
  std::ostringstream os;
  os << scenario_to_json(m).dump(2) << "\n";
  write_atomic(out, os.str());
  const DisruptionSpec d = default_disruption(m);
  std::printf("wrote %s (%zu stations, %zu vehicles)\n", out.c_str(),
              m.stations.size(), m.vehicles.size());
  std::printf("default disruption: %s %s-%s from %ds for %ds\n",
              to_string(d.mode), d.links.front().first.c_str(),
              d.links.front().second.c_str(), d.start_s, d.duration_s);
  return 0;
}

//------------------------------------------------------------------------------
// run
//------------------------------------------------------------------------------

std::vector<Strategy> parse_strategies(const std::string& name) {
  if (name == "all") return all_strategies();
  Strategy s;
  if (!strategy_from_string(name, s))
    throw ValidationError("strategy", name,
                          "expected normal, do-nothing, raas, bus-bridging, "
                          "taxi-bridging, van-bridging or all");
  return {s};
}

int cmd_run(const std::string& scenario_path,
            const std::string& disruption_path, const std::string& name,
            std::uint64_t seed, const std::string& out_dir, bool no_sim) {
  const Inputs in = load_inputs(scenario_path, disruption_path);
  StrategyOptions so;
  so.simulate = !no_sim;
  so.sim.seed = seed;

  BenchmarkReport rep;
  for (Strategy s : parse_strategies(name))
    rep.runs.push_back(run_strategy(in.model, in.disruption, s, so));

  const fs::path dir(out_dir);
  write_atomic(dir / "summary.csv", rep.csv());
  write_atomic(dir / "summary.md", rep.markdown());

  // Per-strategy artifacts: plan (when one was solved) and simulation KPIs.
  const StationPartition part = apply_disruption(in.model, in.disruption);
  const CandidateSet cands = candidate_vehicles(in.model, part);
  for (const StrategyRun& r : rep.runs) {
    if (r.strategy != Strategy::Normal) {
      OptimizerOptions oo;
      oo.require_coverage = detail::coverage_first(r.strategy);
      const PreparedInstance inst = prepare_instance(
          in.model, part,
          detail::strategy_candidates(in.model, cands, r.strategy),
          in.model.cost_params, oo);
      write_atomic(dir / file_name(r.strategy, "plan", ".json"),
                   plan_to_json(inst, r.plan).dump(2) + "\n");
    }
    if (r.simulated) {
      write_atomic(dir / file_name(r.strategy, "kpi", ".json"),
                   r.report.to_json().dump(2) + "\n");
      write_atomic(dir / file_name(r.strategy, "agents", ".csv"),
                   r.report.agents_csv());
    }
  }
  std::fputs(rep.markdown().c_str(), stdout);
  return 0;
}

//------------------------------------------------------------------------------
// sweep
//------------------------------------------------------------------------------

// Pivots the long row list into one wide plot-ready table: the swept value
// followed by one column per strategy for each requested measure.
std::string wide_csv(const std::string& x_name,
                     const std::vector<SweepRow>& rows,
                     const std::vector<std::pair<
                         std::string, double SweepRow::*>>& measures,
                     bool threshold_column) {
  std::vector<double> xs;
  std::vector<Strategy> strategies;
  std::map<std::pair<double, Strategy>, const SweepRow*> cell;
  for (const SweepRow& r : rows) {
    if (xs.empty() || xs.back() != r.x) xs.push_back(r.x);
    if (std::find(strategies.begin(), strategies.end(), r.strategy) ==
        strategies.end())
      strategies.push_back(r.strategy);
    cell[{r.x, r.strategy}] = &r;
  }
  std::ostringstream os;
  os << x_name;
  for (const auto& [label, unused] : measures) {
    (void)unused;
    for (Strategy s : strategies) {
      std::string col = std::string(to_string(s));
      for (char& c : col)
        if (c == '-') c = '_';
      os << ',' << label << '_' << col;
    }
  }
  if (threshold_column) os << ",do_nothing_total";
  os << '\n';
  for (double x : xs) {
    os << strf("%g", x);
    for (const auto& [label, member] : measures) {
      (void)label;
      for (Strategy s : strategies) {
        os << ',';
        const auto it = cell.find({x, s});
        if (it != cell.end()) os << strf("%.6f", it->second->*member);
      }
    }
    if (threshold_column) {
      os << ',';
      const auto it = cell.find({x, Strategy::DoNothing});
      if (it != cell.end()) os << strf("%.6f", it->second->total);
    }
    os << '\n';
  }
  return os.str();
}

int cmd_sweep(const std::string& scenario_path,
              const std::string& disruption_path, const std::string& param,
              const std::vector<double>& values, double volume,
              const std::string& out_dir) {
  if (values.empty()) throw ValidationError("values", param, "empty list");
  for (double v : values)
    if (!std::isfinite(v))
      throw ValidationError("values", param, "values must be finite");
  const Inputs in = load_inputs(scenario_path, disruption_path);
  const fs::path dir(out_dir);

  if (param == "volume") {
    const auto rows = volume_sweep(in.model, in.disruption, values);
    write_atomic(dir / "sweep_volume.csv", sweep_csv("volume", rows));
    write_atomic(dir / "fig5a.csv",
                 wide_csv("volume", rows, {{"z1", &SweepRow::z1}}, false));
    write_atomic(dir / "fig5b.csv",
                 wide_csv("volume", rows, {{"z2", &SweepRow::z2}}, false));
  } else if (param == "alpha") {
    const auto rows = alpha_sweep(in.model, in.disruption, values);
    write_atomic(dir / "sweep_alpha.csv", sweep_csv("alpha", rows));
    write_atomic(dir / "fig6.csv",
                 wide_csv("alpha", rows,
                          {{"z1", &SweepRow::z1},
                           {"z2_leaving", &SweepRow::z2_leaving}},
                          false));
  } else if (param == "ca_rate") {
    const auto rows =
        arrangement_rate_sweep(in.model, in.disruption, values, volume);
    write_atomic(dir / "sweep_ca_rate.csv", sweep_csv("ca_rate", rows));
    write_atomic(dir / (std::string("fig7_v") + strf("%g", volume) + ".csv"),
                 wide_csv("ca_rate", rows, {{"total", &SweepRow::total}},
                          true));
  } else {
    throw ValidationError("param", param,
                          "expected one of volume, alpha, ca_rate");
  }
  std::printf("wrote sweep outputs to %s\n", out_dir.c_str());
  return 0;
}

//------------------------------------------------------------------------------
// couple
//------------------------------------------------------------------------------

int cmd_couple(const std::string& scenario_path,
               const std::string& disruption_path, double tol, int max_iter,
               std::uint64_t seed, const std::string& out_dir) {
  const Inputs in = load_inputs(scenario_path, disruption_path);
  CouplingOptions co;
  co.gap_tolerance = tol;
  co.max_iterations = max_iter;
  co.sim.seed = seed;
  const CouplingResult res = couple(in.model, in.disruption, co);

  const std::string csv = res.history_csv();
  std::fputs(csv.c_str(), stdout);
  std::fprintf(stderr, "%s after %d iteration%s (best objective %.6f at %d)\n",
               res.converged ? "converged" : "gap tolerance not reached",
               static_cast<int>(res.history.size()),
               res.history.size() == 1 ? "" : "s",
               res.plan.eval.objective, res.best_iteration);

  if (!out_dir.empty()) {
    const fs::path dir(out_dir);
    write_atomic(dir / "coupling.csv", csv);
    ordered_json j;
    j["converged"] = res.converged;
    j["iterations"] = static_cast<int>(res.history.size());
    j["best_iteration"] = res.best_iteration;
    j["objective"] = res.plan.eval.objective;
    j["gap"] = res.history.empty()
                   ? 0.0
                   : res.history[static_cast<std::size_t>(
                                     res.best_iteration - 1)]
                         .gap;
    ordered_json gamma = ordered_json::array();
    for (const PlanVehicle& v : res.plan.gamma)
      gamma.push_back(ordered_json{{"vehicle", v.vehicle_id},
                                   {"mode", to_string(v.mode)},
                                   {"pair", v.pair_index},
                                   {"ta_s", v.ta_s}});
    j["gamma"] = std::move(gamma);
    write_atomic(dir / "couple.json", j.dump(2) + "\n");
    write_atomic(dir / "kpi.json", res.report.to_json().dump(2) + "\n");
  }
  return 0;
}

}  // namespace

//------------------------------------------------------------------------------
// main
//------------------------------------------------------------------------------

int main(int argc, char** argv) {
  CLI::App app{
      "Transit disruption response: scenario tools, strategy benchmark, "
      "sensitivity sweeps and the optimizer/simulator coupling loop"};
  app.require_subcommand(1);

  // validate
  std::string v_path;
  CLI::App* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("file", v_path, "scenario JSON file")->required();

  // synth
  std::uint64_t s_seed = 1;
  std::string s_variant = "bench";
  std::string s_out;
  CLI::App* synth =
      app.add_subcommand("synth", "generate a corridor scenario file");
  synth->add_option("--seed", s_seed, "generator seed");
  synth->add_option("--variant", s_variant,
                    "corridor variant: bench, couple or congested");
  synth->add_option("--out", s_out, "output scenario file")->required();

  // run
  std::string r_scenario, r_disruption, r_strategy = "all", r_out;
  std::uint64_t r_seed = 1;
  bool r_no_sim = false;
  CLI::App* run = app.add_subcommand(
      "run", "run one response strategy (or all) and write reports");
  run->add_option("--scenario", r_scenario, "scenario JSON file")->required();
  run->add_option("--disruption", r_disruption,
                  "disruption JSON file (default: derived from the scenario)");
  run->add_option("--strategy", r_strategy,
                  "normal, do-nothing, raas, bus-bridging, taxi-bridging, "
                  "van-bridging or all");
  run->add_option("--seed", r_seed, "simulation seed");
  run->add_option("--out", r_out, "output directory")->required();
  run->add_flag("--no-sim", r_no_sim, "skip the simulation replay");

  // sweep
  std::string w_scenario, w_disruption, w_param, w_out;
  std::vector<double> w_values;
  double w_volume = 100.0;
  CLI::App* sweep =
      app.add_subcommand("sweep", "sensitivity sweep over one parameter");
  sweep->add_option("--scenario", w_scenario, "scenario JSON file")
      ->required();
  sweep->add_option("--disruption", w_disruption,
                    "disruption JSON file (default: derived)");
  sweep->add_option("--param", w_param, "volume, alpha or ca_rate")
      ->required();
  sweep->add_option("--values", w_values, "comma-separated sweep values")
      ->required()
      ->delimiter(',');
  sweep->add_option("--volume", w_volume,
                    "disrupted-pair volume held fixed in the ca_rate sweep");
  sweep->add_option("--out", w_out, "output directory")->required();

  // couple
  std::string c_scenario, c_disruption, c_out;
  double c_tol = 0.05;
  int c_max_iter = 20;
  std::uint64_t c_seed = 1;
  CLI::App* coup = app.add_subcommand(
      "couple", "alternate optimizer and simulator until arrivals agree");
  coup->add_option("--scenario", c_scenario, "scenario JSON file")
      ->required();
  coup->add_option("--disruption", c_disruption,
                   "disruption JSON file (default: derived)");
  coup->add_option("--tol", c_tol, "relative arrival-time gap tolerance");
  coup->add_option("--max-iter", c_max_iter, "iteration cap");
  coup->add_option("--seed", c_seed, "simulation seed");
  coup->add_option("--out", c_out, "optional output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad arguments are a validation failure
  }

  try {
    if (*validate) return cmd_validate(v_path);
    if (*synth) return cmd_synth(s_seed, s_variant, s_out);
    if (*run)
      return cmd_run(r_scenario, r_disruption, r_strategy, r_seed, r_out,
                     r_no_sim);
    if (*sweep)
      return cmd_sweep(w_scenario, w_disruption, w_param, w_values, w_volume,
                       w_out);
    if (*coup)
      return cmd_couple(c_scenario, c_disruption, c_tol, c_max_iter, c_seed,
                        c_out);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const UnknownLink& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 3;
  }
  return 3;  // unreachable: require_subcommand(1) guarantees a dispatch
}
