// Strategy comparison and parameter sweeps on the generated corridor:
// cost orderings, travel-time orderings, fleet-size orderings, and the
// monotone trends the sweeps must reproduce.
#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "raas/strategy.hpp"
#include "raas/synth.hpp"

using namespace raas;

namespace {

const ScenarioModel& bench_model() {
  static ScenarioModel m = synth_corridor({1, "bench"});
  return m;
}

const BenchmarkReport& bench_report() {
  static BenchmarkReport rep =
      run_benchmark(bench_model(), default_disruption(bench_model()));
  return rep;
}

}  // namespace

TEST_CASE("strategy total costs order replacement < van < bus < taxi") {
  const BenchmarkReport& rep = bench_report();
  const double raas = rep.get(Strategy::RaaS).total_cost;
  const double van = rep.get(Strategy::VanBridging).total_cost;
  const double bus = rep.get(Strategy::BusBridging).total_cost;
  const double taxi = rep.get(Strategy::TaxiBridging).total_cost;
  CHECK(raas < van);
  CHECK(van < bus);
  CHECK(bus < taxi);

  CHECK(raas == Catch::Approx(2820.3527).epsilon(1e-6));
  CHECK(van == Catch::Approx(3231.1606).epsilon(1e-6));
  CHECK(bus == Catch::Approx(6321.7493).epsilon(1e-4));
  CHECK(taxi == Catch::Approx(117252.5880).epsilon(1e-6));
  CHECK(rep.get(Strategy::DoNothing).total_cost ==
        Catch::Approx(7395.0).margin(1e-9));
  CHECK(rep.get(Strategy::Normal).total_cost == 0.0);
}

TEST_CASE("travel durations: do-nothing well above normal, replacement below") {
  const BenchmarkReport& rep = bench_report();
  const double normal = rep.get(Strategy::Normal).report.mean_travel_s;
  const double nothing = rep.get(Strategy::DoNothing).report.mean_travel_s;
  const double raas = rep.get(Strategy::RaaS).report.mean_travel_s;
  CHECK(normal > 0.0);
  CHECK(nothing >= 1.2 * normal);
  CHECK(raas < nothing);
}

TEST_CASE("fleet sizes order taxi > van > full reallocation") {
  const BenchmarkReport& rep = bench_report();
  const int taxi = rep.get(Strategy::TaxiBridging).vehicles;
  const int van = rep.get(Strategy::VanBridging).vehicles;
  const int raas = rep.get(Strategy::RaaS).vehicles;
  CHECK(taxi > van);
  CHECK(van > raas);
  CHECK(taxi == 67);
  CHECK(van == 31);
  CHECK(raas == 10);
}

TEST_CASE("baseline strategies use only their own sub-fleet") {
  const BenchmarkReport& rep = bench_report();
  for (const auto& g : rep.get(Strategy::BusBridging).plan.gamma)
    CHECK(g.vehicle_id.rfind("depot-", 0) == 0);
  for (const auto& g : rep.get(Strategy::TaxiBridging).plan.gamma)
    CHECK(g.mode == ModeKind::Taxi);
  for (const auto& g : rep.get(Strategy::VanBridging).plan.gamma)
    CHECK(g.mode == ModeKind::Van);
  CHECK(rep.get(Strategy::DoNothing).plan.gamma.empty());
}

TEST_CASE("volume sweep: taxi dearest and growing, replacement cheapest") {
  const std::vector<double> volumes = {100, 300, 500, 700, 900};
  const auto rows =
      volume_sweep(bench_model(), default_disruption(bench_model()), volumes);

  std::map<double, std::map<Strategy, SweepRow>> by_v;
  for (const SweepRow& r : rows) by_v[r.x][r.strategy] = r;
  REQUIRE(by_v.size() == volumes.size());

  double prev_taxi_z1 = -1.0;
  for (double v : volumes) {
    const auto& at = by_v.at(v);
    CHECK(at.at(Strategy::TaxiBridging).z1 > prev_taxi_z1);
    prev_taxi_z1 = at.at(Strategy::TaxiBridging).z1;
    if (v >= 300.0)
      for (const auto& [s, r] : at)
        if (s != Strategy::TaxiBridging)
          CHECK(at.at(Strategy::TaxiBridging).z1 > r.z1);
    if (v >= 500.0)
      for (const auto& [s, r] : at)
        if (s != Strategy::RaaS)
          CHECK(at.at(Strategy::RaaS).total < r.total);
  }
}

TEST_CASE("alpha sweep: costs fall, leaving losses rise, every strategy") {
  std::vector<double> alphas;
  for (int i = 1; i <= 9; ++i) alphas.push_back(i / 10.0);
  const auto rows =
      alpha_sweep(bench_model(), default_disruption(bench_model()), alphas);

  std::map<Strategy, std::vector<SweepRow>> by_s;
  for (const SweepRow& r : rows) by_s[r.strategy].push_back(r);
  REQUIRE(by_s.size() == 5);
  for (const auto& [s, seq] : by_s) {
    REQUIRE(seq.size() == alphas.size());
    for (std::size_t i = 1; i < seq.size(); ++i) {
      CHECK(seq[i].z1 <= seq[i - 1].z1 + 1e-9);
      CHECK(seq[i].z2_leaving >= seq[i - 1].z2_leaving - 1e-9);
    }
  }
}

TEST_CASE("arrangement-fee sweep: bus bridging crosses the no-action cost") {
  std::vector<double> rates;
  for (int i = 1; i <= 10; ++i) rates.push_back(i / 10.0);
  const auto rows = arrangement_rate_sweep(
      bench_model(), default_disruption(bench_model()), rates, 100.0);

  std::map<double, std::map<Strategy, SweepRow>> by_r;
  for (const SweepRow& r : rows) by_r[r.x][r.strategy] = r;

  bool was_below = false, crossed = false;
  for (double r : rates) {
    const double threshold = by_r.at(r).at(Strategy::DoNothing).total;
    const double bus = by_r.at(r).at(Strategy::BusBridging).total;
    const double raas = by_r.at(r).at(Strategy::RaaS).total;
    CHECK(raas < threshold);  // reallocation stays worthwhile at any fee
    if (bus < threshold) was_below = true;
    if (was_below && bus > threshold) crossed = true;
  }
  CHECK(crossed);
}

TEST_CASE("sweep csv is well formed and carries the do-nothing threshold") {
  const auto rows = volume_sweep(bench_model(),
                                 default_disruption(bench_model()), {300.0},
                                 {Strategy::DoNothing, Strategy::RaaS});
  const std::string csv = sweep_csv("volume", rows);
  CHECK(csv.rfind("volume,strategy,z1,z2,z2_leaving,total,vehicles,"
                  "do_nothing_total\n",
                  0) == 0);
  CHECK(csv.find("300,raas,") != std::string::npos);
  // Both rows end with the do-nothing total of this sweep point.
  CHECK(csv.find(",7395.000000\n") != std::string::npos);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].strategy == Strategy::DoNothing);
  CHECK(rows[1].strategy == Strategy::RaaS);
}

TEST_CASE("emitted costs equal re-evaluation of the emitted plan") {
  const ScenarioModel& model = bench_model();
  const DisruptionSpec dis = default_disruption(model);
  const StationPartition part = apply_disruption(model, dis);
  const CandidateSet cands = candidate_vehicles(model, part);
  for (Strategy s :
       {Strategy::DoNothing, Strategy::RaaS, Strategy::BusBridging,
        Strategy::TaxiBridging, Strategy::VanBridging}) {
    const StrategyRun& run = bench_report().get(s);
    OptimizerOptions oo;
    oo.require_coverage = s == Strategy::BusBridging ||
                          s == Strategy::TaxiBridging ||
                          s == Strategy::VanBridging;
    const PreparedInstance inst = prepare_instance(
        model, part, detail::strategy_candidates(model, cands, s),
        model.cost_params, oo);
    const EvalResult again = evaluate_selection(inst, run.plan.selection);
    REQUIRE(again.feasible);
    CHECK(run.z1 == Catch::Approx(z1_total(again)).margin(1e-6));
    CHECK(run.z2 == Catch::Approx(z2_total(again)).margin(1e-6));
    CHECK(run.total_cost == Catch::Approx(again.objective).margin(1e-6));
    CHECK(run.total_cost == Catch::Approx(run.z1 + run.z2).margin(1e-6));
  }
}

TEST_CASE("normal-operation KPIs ignore the disruption spec") {
  const ScenarioModel& model = bench_model();
  DisruptionSpec other;
  other.mode = ModeKind::Rail;
  other.links = {{"R10", "R12"}};
  other.start_s = 23400;
  other.duration_s = 5400;
  const StrategyRun a = bench_report().get(Strategy::Normal);
  const StrategyRun b = run_strategy(model, other, Strategy::Normal);
  CHECK(a.report.mean_travel_s == b.report.mean_travel_s);
  CHECK(a.report.mean_wait_s == b.report.mean_wait_s);
  CHECK(a.report.mean_dist_km == b.report.mean_dist_km);
  CHECK(a.report.completed == b.report.completed);
  CHECK(a.total_cost == 0.0);
  CHECK(b.total_cost == 0.0);
}

TEST_CASE("benchmark csv reports durations, distance and replacement arrival") {
  const std::string csv = bench_report().csv();
  CHECK(csv.rfind("strategy,mean_travel_s,mean_wait_s,mean_dist_km,"
                  "mean_repl_ta_s,vehicles,z1,z2,total_cost,z2_leaving,"
                  "leave_fraction\n",
                  0) == 0);
  for (Strategy s : all_strategies())
    CHECK(csv.find(std::string(to_string(s)) + ',') != std::string::npos);
  const StrategyRun& raas = bench_report().get(Strategy::RaaS);
  CHECK(raas.report.mean_dist_km > 0.0);
  CHECK(raas.mean_repl_ta_s > 0.0);
  const std::string md = bench_report().markdown();
  CHECK(md.find("| raas |") != std::string::npos);
}
