// Optimizer-simulator feedback: exact agreement on the uncongested slice,
// damped geometric convergence on the congested one, and the minimum-
// objective iterate coming back as the result.
#include <catch2/catch_amalgamated.hpp>

#include "raas/coupling.hpp"
#include "raas/synth.hpp"

using namespace raas;

TEST_CASE("uncongested slice agrees exactly in one iteration") {
  ScenarioModel m = synth_corridor({1, "couple"});
  CouplingResult res = couple(m, default_disruption(m));

  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.best_iteration == 1);
  REQUIRE(res.history.size() == 1);
  CHECK(res.history[0].gap == 0.0);  // bit-exact free-flow agreement

  REQUIRE(res.plan.gamma.size() == 1);
  CHECK(res.plan.gamma[0].vehicle_id == "depot-bus-1");
  CHECK(res.plan.ta_by_mode.at(ModeKind::Bus) == 288.0);
  CHECK(res.report.ta_sim_by_mode.at(ModeKind::Bus) == 288.0);
}

TEST_CASE("congested slice converges with a halving gap") {
  ScenarioModel m = synth_corridor({1, "congested"});
  CouplingResult res = couple(m, default_disruption(m));

  CHECK(res.converged);
  CHECK(res.iterations <= 20);
  CHECK(res.history.back().gap <= 0.05);

  // The private-car flow is plan-independent, so the realised approach
  // time is the same every round and the damped update halves the gap.
  REQUIRE(res.history.size() >= 2);
  const double ta_sim0 = res.history[0].ta_sim.at(ModeKind::Bus);
  CHECK(ta_sim0 > 288.0);
  for (const CouplingIteration& it : res.history) {
    CHECK(it.ta_sim.at(ModeKind::Bus) == ta_sim0);
    REQUIRE(res.plan.gamma.size() == 1);
  }
  for (std::size_t i = 1; i < res.history.size(); ++i) {
    CHECK(res.history[i].gap < res.history[i - 1].gap);
    CHECK(res.history[i].gap <= 0.6 * res.history[i - 1].gap);
  }

  // Minimum-objective iterate is returned.
  int best = 0;
  for (std::size_t i = 1; i < res.history.size(); ++i)
    if (res.history[i].objective <
        res.history[static_cast<std::size_t>(best)].objective)
      best = static_cast<int>(i);
  CHECK(res.best_iteration == best + 1);
  CHECK(res.plan.eval.objective ==
        res.history[static_cast<std::size_t>(best)].objective);
}

TEST_CASE("iteration log carries the gap sequence") {
  ScenarioModel m = synth_corridor({1, "congested"});
  CouplingResult res = couple(m, default_disruption(m));
  const std::string csv = res.history_csv();
  CHECK(csv.rfind("iteration,objective,gap,mode,factor,ta_opt_s,ta_sim_s\n",
                  0) == 0);
  // One Bus row per iteration.
  std::size_t rows = 0;
  for (char c : csv)
    if (c == '\n') ++rows;
  CHECK(rows == 1 + res.history.size());
  CHECK(csv.find(",bus,") != std::string::npos);
}

TEST_CASE("a fleetless scenario converges trivially on the empty plan") {
  ScenarioModel m = synth_corridor({1, "couple"});
  m.vehicles.clear();
  m.validate();
  CouplingResult res = couple(m, default_disruption(m));
  CHECK(res.converged);
  CHECK(res.iterations == 1);
  CHECK(res.plan.gamma.empty());
  CHECK(res.history[0].gap == 0.0);
}
