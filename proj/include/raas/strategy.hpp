#pragma once

// Disruption-response strategies over one scenario:
//
//   normal        undisrupted operation (simulation reference point)
//   do-nothing    disruption with no replacement service
//   raas          cost-optimal reallocation over the whole fleet
//   bus-bridging  depot buses only, coverage first, then cost
//   taxi-bridging taxis only, coverage first, then cost
//   van-bridging  vans only, coverage first, then cost
//
// plus the parameter sweeps over demand volume, leaving propensity (alpha)
// and the arrangement-fee rate. Sweeps are optimizer-only; the full runs
// also replay the chosen plan in the simulator for travel-time KPIs.

#include <atomic>
#include <functional>
#include <map>
#include <optional>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "raas/candidates.hpp"
#include "raas/optimizer.hpp"
#include "raas/partition.hpp"
#include "raas/simulator.hpp"

namespace raas {

enum class Strategy {
  Normal,
  DoNothing,
  RaaS,
  BusBridging,
  TaxiBridging,
  VanBridging,
};

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::Normal:       return "normal";
    case Strategy::DoNothing:    return "do-nothing";
    case Strategy::RaaS:         return "raas";
    case Strategy::BusBridging:  return "bus-bridging";
    case Strategy::TaxiBridging: return "taxi-bridging";
    case Strategy::VanBridging:  return "van-bridging";
  }
  return "?";
}

inline bool strategy_from_string(const std::string& s, Strategy& out) {
  for (Strategy k : {Strategy::Normal, Strategy::DoNothing, Strategy::RaaS,
                     Strategy::BusBridging, Strategy::TaxiBridging,
                     Strategy::VanBridging})
    if (s == to_string(k)) {
      out = k;
      return true;
    }
  return false;
}

inline std::vector<Strategy> all_strategies() {
  return {Strategy::Normal,       Strategy::DoNothing,
          Strategy::RaaS,         Strategy::BusBridging,
          Strategy::TaxiBridging, Strategy::VanBridging};
}

struct StrategyRun {
  Strategy strategy = Strategy::Normal;
  ReallocationPlan plan;  // empty for normal / do-nothing
  KpiReport report;
  bool simulated = false;
  double total_cost = 0.0;
  double z1 = 0.0;
  double z2 = 0.0;
  double z2_leaving = 0.0;  // disrupted-pair leaving component
  int vehicles = 0;
  double mean_repl_ta_s = 0.0;  // mean announced arrival over the plan
};

namespace detail {

// Bridging baselines draw on one sub-fleet; reallocation uses everything.
// Bus bridging means reserve (depot) buses: in-service buses belong to
// their lines and are only pulled by the full optimization.
inline std::vector<CandidateVehicle> strategy_candidates(
    const ScenarioModel& model, const CandidateSet& cands, Strategy s) {
  std::vector<CandidateVehicle> out;
  if (s == Strategy::Normal || s == Strategy::DoNothing) return out;
  if (s == Strategy::RaaS) return cands.candidates;
  std::map<std::string, Vehicle::Kind> kind;
  for (const Vehicle& v : model.vehicles) kind[v.id] = v.kind;
  for (const CandidateVehicle& c : cands.candidates) {
    switch (s) {
      case Strategy::BusBridging:
        if (c.mode == ModeKind::Bus &&
            kind.at(c.vehicle_id) == Vehicle::Kind::Depot)
          out.push_back(c);
        break;
      case Strategy::TaxiBridging:
        if (c.mode == ModeKind::Taxi) out.push_back(c);
        break;
      case Strategy::VanBridging:
        if (c.mode == ModeKind::Van) out.push_back(c);
        break;
      default:
        break;
    }
  }
  return out;
}

inline bool coverage_first(Strategy s) {
  return s == Strategy::BusBridging || s == Strategy::TaxiBridging ||
         s == Strategy::VanBridging;
}

}  // namespace detail

struct StrategyOptions {
  bool simulate = true;
  SimOptions sim;
  std::optional<std::vector<double>> volume_override;
};

inline StrategyRun run_strategy(const ScenarioModel& model,
                                const DisruptionSpec& disruption, Strategy s,
                                const StrategyOptions& options = {}) {
  StrategyRun run;
  run.strategy = s;
  if (s == Strategy::Normal) {
    if (options.simulate) {
      run.report = simulate(model, options.sim, nullptr);
      run.simulated = true;
    }
    return run;
  }

  StationPartition part = apply_disruption(model, disruption);
  CandidateSet cands = candidate_vehicles(model, part);
  std::vector<CandidateVehicle> sub =
      detail::strategy_candidates(model, cands, s);

  OptimizerOptions oo;
  oo.require_coverage = detail::coverage_first(s);
  oo.volume_override = options.volume_override;
  PreparedInstance inst =
      prepare_instance(model, part, sub, model.cost_params, oo);
  run.plan = solve(inst);

  const EvalResult& e = run.plan.eval;
  run.total_cost = e.objective;
  run.z1 = e.z1_transfer + e.z1_arrangement;
  run.z2 = e.z2_leaving_main + e.z2_waiting_main + e.z2_leaving_deliberate +
           e.z2_waiting_deliberate;
  run.z2_leaving = e.z2_leaving_main;
  run.vehicles = static_cast<int>(run.plan.gamma.size());
  if (!run.plan.gamma.empty()) {
    double sum_ta = 0.0;
    for (const PlanVehicle& pv : run.plan.gamma) sum_ta += pv.ta_s;
    run.mean_repl_ta_s = sum_ta / static_cast<double>(run.plan.gamma.size());
  }

  if (options.simulate) {
    DisruptionScenario scen = make_disruption_scenario(inst, run.plan, part);
    run.report = simulate(model, options.sim, &scen);
    run.simulated = true;
  }
  return run;
}

//==============================================================================
// Benchmark over all strategies
//==============================================================================

struct BenchmarkReport {
  std::vector<StrategyRun> runs;

  const StrategyRun& get(Strategy s) const {
    for (const StrategyRun& r : runs)
      if (r.strategy == s) return r;
    throw std::out_of_range("strategy not in benchmark");
  }

  std::string csv() const {
    std::ostringstream os;
    os << "strategy,mean_travel_s,mean_wait_s,mean_dist_km,mean_repl_ta_s,"
          "vehicles,z1,z2,total_cost,z2_leaving,leave_fraction\n";
    for (const StrategyRun& r : runs)
      os << to_string(r.strategy) << ','
         << strf("%.3f", r.report.mean_travel_s) << ','
         << strf("%.3f", r.report.mean_wait_s) << ','
         << strf("%.4f", r.report.mean_dist_km) << ','
         << strf("%.3f", r.mean_repl_ta_s) << ',' << r.vehicles << ','
         << strf("%.6f", r.z1) << ',' << strf("%.6f", r.z2) << ','
         << strf("%.6f", r.total_cost) << ','
         << strf("%.6f", r.z2_leaving) << ','
         << strf("%.6f", r.report.leave_fraction) << '\n';
    return os.str();
  }

  std::string markdown() const {
    std::ostringstream os;
    os << "| strategy | travel [min] | wait [min] | dist [km] | repl TA "
          "[min] | vehicles | Z1 | Z2 | Z1+Z2 | leave frac |\n";
    os << "|---|---:|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const StrategyRun& r : runs)
      os << "| " << to_string(r.strategy) << " | "
         << strf("%.1f", r.report.mean_travel_s / 60.0) << " | "
         << strf("%.1f", r.report.mean_wait_s / 60.0) << " | "
         << strf("%.2f", r.report.mean_dist_km) << " | "
         << strf("%.1f", r.mean_repl_ta_s / 60.0) << " | " << r.vehicles
         << " | " << strf("%.2f", r.z1) << " | " << strf("%.2f", r.z2)
         << " | " << strf("%.2f", r.total_cost) << " | "
         << strf("%.3f", r.report.leave_fraction) << " |\n";
    return os.str();
  }
};

inline BenchmarkReport run_benchmark(const ScenarioModel& model,
                                     const DisruptionSpec& disruption,
                                     const StrategyOptions& options = {}) {
  BenchmarkReport rep;
  for (Strategy s : all_strategies())
    rep.runs.push_back(run_strategy(model, disruption, s, options));
  return rep;
}

//==============================================================================
// Parameter sweeps (optimizer-only)
//==============================================================================

struct SweepRow {
  double x = 0.0;  // swept parameter value
  Strategy strategy = Strategy::DoNothing;
  double z1 = 0.0;
  double z2 = 0.0;
  double z2_leaving = 0.0;
  double total = 0.0;
  int vehicles = 0;
};

namespace detail {

inline StrategyRun sweep_point(const ScenarioModel& model,
                               const DisruptionSpec& disruption, Strategy s,
                               std::optional<std::vector<double>> volume) {
  StrategyOptions so;
  so.simulate = false;
  so.volume_override = std::move(volume);
  return run_strategy(model, disruption, s, so);
}

inline SweepRow to_row(double x, const StrategyRun& r) {
  return SweepRow{x,      r.strategy, r.z1,       r.z2,
                  r.z2_leaving, r.total_cost, r.vehicles};
}

// Runs the sweep points on a small worker pool. Results land at the job's
// own index, so row order is deterministic regardless of scheduling.
inline std::vector<SweepRow> run_parallel(
    const std::vector<std::function<SweepRow()>>& jobs) {
  std::vector<SweepRow> rows(jobs.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    try {
      for (std::size_t i = next++; i < jobs.size(); i = next++)
        rows[i] = jobs[i]();
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mu);
      if (!error) error = std::current_exception();
    }
  };
  const std::size_t n =
      std::min<std::size_t>(jobs.size(),
                            std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return rows;
}

}  // namespace detail

inline std::vector<SweepRow> volume_sweep(
    const ScenarioModel& model, const DisruptionSpec& disruption,
    const std::vector<double>& volumes,
    const std::vector<Strategy>& strategies = {
        Strategy::DoNothing, Strategy::RaaS, Strategy::BusBridging,
        Strategy::TaxiBridging, Strategy::VanBridging}) {
  StationPartition part = apply_disruption(model, disruption);
  std::vector<std::function<SweepRow()>> jobs;
  for (double v : volumes) {
    std::vector<double> vol(part.od_pairs.size(), v);
    for (Strategy s : strategies)
      jobs.push_back([&model, &disruption, s, v, vol] {
        return detail::to_row(v,
                              detail::sweep_point(model, disruption, s, vol));
      });
  }
  return detail::run_parallel(jobs);
}

inline std::vector<SweepRow> alpha_sweep(
    const ScenarioModel& model, const DisruptionSpec& disruption,
    const std::vector<double>& alphas,
    const std::vector<Strategy>& strategies = {
        Strategy::DoNothing, Strategy::RaaS, Strategy::BusBridging,
        Strategy::TaxiBridging, Strategy::VanBridging}) {
  std::vector<std::function<SweepRow()>> jobs;
  for (double a : alphas) {
    auto m = std::make_shared<ScenarioModel>(model);
    m->cost_params.alpha = a;
    for (Strategy s : strategies)
      jobs.push_back([m, &disruption, s, a] {
        return detail::to_row(
            a, detail::sweep_point(*m, disruption, s, std::nullopt));
      });
  }
  return detail::run_parallel(jobs);
}

inline std::vector<SweepRow> arrangement_rate_sweep(
    const ScenarioModel& model, const DisruptionSpec& disruption,
    const std::vector<double>& rates, double volume,
    const std::vector<Strategy>& strategies = {Strategy::DoNothing,
                                               Strategy::RaaS,
                                               Strategy::BusBridging}) {
  StationPartition part = apply_disruption(model, disruption);
  std::vector<double> vol(part.od_pairs.size(), volume);
  std::vector<std::function<SweepRow()>> jobs;
  for (double r : rates) {
    auto m = std::make_shared<ScenarioModel>(model);
    m->cost_params.arrangement_rate = r;
    for (Strategy s : strategies)
      jobs.push_back([m, &disruption, s, r, &vol] {
        return detail::to_row(r, detail::sweep_point(*m, disruption, s, vol));
      });
  }
  return detail::run_parallel(jobs);
}

inline std::string sweep_csv(const std::string& x_name,
                             const std::vector<SweepRow>& rows) {
  // do_nothing_total repeats each point's do-nothing cost on every row,
  // so any strategy can be read directly against that threshold.
  std::map<double, double> threshold;
  for (const SweepRow& r : rows)
    if (r.strategy == Strategy::DoNothing) threshold[r.x] = r.total;
  std::ostringstream os;
  os << x_name << ",strategy,z1,z2,z2_leaving,total,vehicles,"
        "do_nothing_total\n";
  for (const SweepRow& r : rows) {
    os << strf("%g", r.x) << ',' << to_string(r.strategy) << ','
       << strf("%.6f", r.z1) << ',' << strf("%.6f", r.z2) << ','
       << strf("%.6f", r.z2_leaving) << ',' << strf("%.6f", r.total) << ','
       << r.vehicles << ',';
    const auto it = threshold.find(r.x);
    if (it != threshold.end()) os << strf("%.6f", it->second);
    os << '\n';
  }
  return os.str();
}

}  // namespace raas
