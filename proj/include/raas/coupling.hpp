#pragma once

// Fixed-point coupling between the reallocation optimizer and the traffic
// simulator. The optimizer prices vehicles with per-mode congestion factors
// applied to their free-flow approach times; the simulator then replays the
// chosen plan and reports realised approach times. The factors are nudged
// toward the simulated ratio with damping 1/2, so when the simulated time
// is insensitive to the plan the relative gap halves per round. The plan
// returned is the minimum-objective iterate, not necessarily the last.

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "raas/candidates.hpp"
#include "raas/optimizer.hpp"
#include "raas/partition.hpp"
#include "raas/simulator.hpp"

namespace raas {

struct CouplingOptions {
  int max_iterations = 20;
  double gap_tolerance = 0.05;  // relative, on per-mode approach times
  double damping = 0.5;
  double factor_min = 0.1;
  double factor_max = 10.0;
  SimOptions sim;
  OptimizerOptions opt;
};

struct CouplingIteration {
  int iteration = 0;
  double objective = 0.0;
  double gap = std::numeric_limits<double>::infinity();
  std::map<ModeKind, double> factors;  // applied to this iterate's solve
  std::map<ModeKind, double> ta_opt;   // announced effective approach times
  std::map<ModeKind, double> ta_sim;   // realised approach times
};

struct CouplingResult {
  ReallocationPlan plan;  // minimum-objective iterate
  KpiReport report;       // its simulation
  int best_iteration = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<CouplingIteration> history;

  // Long-format log: one row per (iteration, mode); iterations whose plan
  // uses no vehicles emit a single row with an empty mode.
  std::string history_csv() const {
    std::ostringstream os;
    os << "iteration,objective,gap,mode,factor,ta_opt_s,ta_sim_s\n";
    for (const CouplingIteration& it : history) {
      if (it.ta_opt.empty()) {
        os << it.iteration << ',' << strf("%.6f", it.objective) << ','
           << strf("%.9f", it.gap) << ",,,,\n";
        continue;
      }
      for (const auto& [mode, ta] : it.ta_opt) {
        const auto f = it.factors.find(mode);
        const auto s = it.ta_sim.find(mode);
        os << it.iteration << ',' << strf("%.6f", it.objective) << ','
           << strf("%.9f", it.gap) << ',' << to_string(mode) << ','
           << strf("%.9f", f == it.factors.end() ? 1.0 : f->second) << ','
           << strf("%.6f", ta) << ','
           << (s == it.ta_sim.end() ? std::string()
                                    : strf("%.6f", s->second))
           << '\n';
      }
    }
    return os.str();
  }
};

inline CouplingResult couple(const ScenarioModel& model,
                             const DisruptionSpec& disruption,
                             const CouplingOptions& options = {}) {
  CouplingResult res;
  StationPartition part = apply_disruption(model, disruption);
  CandidateSet cands = candidate_vehicles(model, part);

  std::map<ModeKind, double> factors;
  double best_obj = std::numeric_limits<double>::infinity();

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    OptimizerOptions oo = options.opt;
    oo.speed_factors = factors;
    PreparedInstance inst =
        prepare_instance(model, part, cands.candidates, model.cost_params, oo);
    ReallocationPlan plan = solve(inst);

    DisruptionScenario scen = make_disruption_scenario(inst, plan, part);
    KpiReport rep = simulate(model, options.sim, &scen);

    CouplingIteration rec;
    rec.iteration = iter;
    rec.objective = plan.eval.objective;
    rec.factors = factors;
    rec.ta_opt = plan.ta_by_mode;
    rec.ta_sim = rep.ta_sim_by_mode;

    // Relative disagreement per mode the plan actually uses. A mode whose
    // vehicles never reached the disrupted station has no realised time;
    // that counts as an unresolved (infinite) gap.
    double gap = 0.0;
    for (const auto& [mode, ta_o] : plan.ta_by_mode) {
      const auto it = rep.ta_sim_by_mode.find(mode);
      if (it == rep.ta_sim_by_mode.end()) {
        gap = std::numeric_limits<double>::infinity();
        break;
      }
      gap = std::max(gap,
                     std::abs(it->second - ta_o) / std::max(ta_o, 60.0));
    }
    rec.gap = gap;
    res.history.push_back(rec);
    res.iterations = iter;

    if (plan.eval.objective < best_obj) {
      best_obj = plan.eval.objective;
      res.plan = plan;
      res.report = rep;
      res.best_iteration = iter;
    }

    if (gap <= options.gap_tolerance) {
      res.converged = true;
      break;
    }

    for (const auto& [mode, ta_o] : plan.ta_by_mode) {
      const auto it = rep.ta_sim_by_mode.find(mode);
      if (it == rep.ta_sim_by_mode.end() || ta_o <= 0.0) continue;
      double f = factors.count(mode) ? factors.at(mode) : 1.0;
      f *= 1.0 + options.damping * (it->second / ta_o - 1.0);
      factors[mode] =
          std::min(options.factor_max, std::max(options.factor_min, f));
    }
  }
  return res;
}

}  // namespace raas
