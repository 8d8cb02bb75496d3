#pragma once

// Deterministic scenario generator: a long rail corridor with a wide gap
// link mid-route, a parallel road network, crossing bus lines, and a mixed
// reallocatable fleet (in-service crossing buses, depot reserves, taxi
// ranks, vans). Variants:
//
//   bench      full corridor used by the strategy comparison and the
//              parameter sweeps
//   couple     minimal uncongested slice whose optimal plan is a single
//              depot bus - the verification case for the feedback loop
//   congested  the couple slice plus private-car traffic that slows the
//              bus's approach road, for the damped fixed-point test
//
// The same seed always yields byte-identical scenarios; the seed only
// perturbs background (non-calibrated) demand rates.

#include <cmath>
#include <string>
#include <vector>

#include "raas/scenario.hpp"

namespace raas {

struct SynthSpec {
  std::uint64_t seed = 1;
  std::string variant = "bench";  // bench | couple | congested
};

namespace detail {

inline void add_station(ScenarioModel& m, const std::string& id, double x,
                        double y) {
  Station s;
  s.id = id;
  s.name = id;
  s.x = x;
  s.y = y;
  m.stations.push_back(std::move(s));
}

inline void add_link(ScenarioModel& m, const std::string& id,
                     const std::string& from, const std::string& to,
                     double len_km, double ff_kmh, double cap,
                     std::set<ModeKind> modes) {
  Link l;
  l.id = id;
  l.from = from;
  l.to = to;
  l.length_km = len_km;
  l.free_flow_speed_kmh = ff_kmh;
  l.capacity_veh_h = cap;
  l.modes_allowed = std::move(modes);
  m.links.push_back(std::move(l));
}

inline void add_mode(ScenarioModel& m, ModeKind k, double base, double per_km,
                     int cap, double speed) {
  Mode md;
  md.kind = k;
  md.op_cost.base = base;
  md.op_cost.per_km = per_km;
  md.capacity = cap;
  md.speed_kmh = speed;
  m.modes.push_back(md);
}

inline void add_line(ScenarioModel& m, const std::string& id, ModeKind k,
                     std::vector<std::string> stops, double headway_min,
                     int start_s, int end_s) {
  TransitLine ln;
  ln.id = id;
  ln.mode = k;
  ln.stops = std::move(stops);
  ln.headway_min = headway_min;
  ln.service_start_s = start_s;
  ln.service_end_s = end_s;
  m.lines.push_back(std::move(ln));
}

inline void add_scheduled(ScenarioModel& m, const std::string& id, ModeKind k,
                          const std::string& line, const std::string& from,
                          const std::string& to) {
  Vehicle v;
  v.id = id;
  v.mode = k;
  v.kind = Vehicle::Kind::Scheduled;
  v.scheduled = {line, from, to};
  m.vehicles.push_back(std::move(v));
}

inline void add_free(ScenarioModel& m, const std::string& id, ModeKind k,
                     const std::string& station) {
  Vehicle v;
  v.id = id;
  v.mode = k;
  v.kind = Vehicle::Kind::Free;
  v.free.station = station;
  m.vehicles.push_back(std::move(v));
}

inline void add_depot(ScenarioModel& m, const std::string& id, ModeKind k,
                      const std::string& station) {
  Vehicle v;
  v.id = id;
  v.mode = k;
  v.kind = Vehicle::Kind::Depot;
  v.depot.station = station;
  m.vehicles.push_back(std::move(v));
}

inline void add_demand(ScenarioModel& m, const std::string& o,
                       const std::string& d, ModeKind k, int start, int end,
                       double rate) {
  DemandEntry e;
  e.origin = o;
  e.destination = d;
  e.mode = k;
  e.bins = {DemandBin{start, end, rate}};
  m.demand.entries.push_back(std::move(e));
}

inline std::string rid(int k) {  // R01 .. R47
  return strf("R%02d", k);
}

inline void standard_modes(ScenarioModel& m) {
  add_mode(m, ModeKind::Rail, 0.139, 0.0, 400, 60.0);
  add_mode(m, ModeKind::Subway, 0.194, 0.0, 300, 38.0);
  add_mode(m, ModeKind::Tram, 0.196, 0.0, 180, 22.0);
  add_mode(m, ModeKind::Bus, 0.454, 0.0, 70, 25.0);
  add_mode(m, ModeKind::Taxi, 2.2, 1.72, 4, 45.0);
  add_mode(m, ModeKind::Van, 0.36, 0.0, 8, 40.0);
}

inline ScenarioModel couple_corridor(bool congested) {
  ScenarioModel m;
  standard_modes(m);

  add_station(m, "R22", 0.0, 0.0);
  add_station(m, "R23", 1500.0, 0.0);
  add_station(m, "R24", 13500.0, 0.0);
  add_station(m, "R25", 15000.0, 0.0);
  add_station(m, "DEPOT", 0.0, -500.0);
  const char* seq[] = {"R22", "R23", "R24", "R25"};
  const double lens[] = {1.5, 12.0, 1.5};
  const std::set<ModeKind> road_modes = {ModeKind::Bus, ModeKind::Taxi,
                                         ModeKind::Van};
  for (int i = 0; i < 3; ++i) {
    add_link(m, strf("rail-%d", i), seq[i], seq[i + 1], lens[i], 80.0, 30.0,
             {ModeKind::Rail});
    // The approach road the reserve bus uses gets a low capacity in the
    // congested variant so private cars ahead of it matter.
    const double cap = (congested && i == 0) ? 60.0 : 800.0;
    add_link(m, strf("road-f-%d", i), seq[i], seq[i + 1], lens[i], 50.0, cap,
             road_modes);
    add_link(m, strf("road-b-%d", i), seq[i + 1], seq[i], lens[i], 50.0,
             800.0, road_modes);
  }
  add_link(m, "depot-spur", "DEPOT", "R22", 0.5, 60.0, 800.0,
           {ModeKind::Bus});

  add_line(m, "RL1", ModeKind::Rail, {"R22", "R23", "R24", "R25"}, 10.0,
           21600, 43200);

  add_depot(m, "depot-bus-1", ModeKind::Bus, "DEPOT");
  for (int i = 1; i <= 3; ++i)
    add_free(m, strf("taxi-far-%d", i), ModeKind::Taxi, "R25");

  // Blocked crossing demand: 60 passengers over the two-hour window.
  add_demand(m, "R23", "R24", ModeKind::Rail, 25200, 32400, 30.0);
  if (congested)
    // Private cars entering the approach road just before the reserve bus.
    add_demand(m, "R22", "R23", ModeKind::Taxi, 25200, 26100, 240.0);

  m.validate();
  return m;
}

inline ScenarioModel bench_corridor(std::uint64_t seed) {
  ScenarioModel m;
  standard_modes(m);

  // Trunk: R01..R47. All hops 1.5 km except the 12 km gap R23-R24 (the
  // default disruption target) and one 2 km hop far downstream.
  std::vector<double> x(48, 0.0);
  auto hop = [](int k) {
    if (k == 23) return 12.0;
    if (k == 45) return 2.0;
    return 1.5;
  };
  for (int k = 1; k <= 47; ++k) {
    if (k > 1) x[static_cast<std::size_t>(k)] =
        x[static_cast<std::size_t>(k - 1)] + hop(k - 1) * 1000.0;
    add_station(m, rid(k), x[static_cast<std::size_t>(k)], 0.0);
  }
  const std::set<ModeKind> road_modes = {ModeKind::Bus, ModeKind::Taxi,
                                         ModeKind::Van};
  for (int k = 1; k <= 46; ++k) {
    add_link(m, strf("rail-%02d", k), rid(k), rid(k + 1), hop(k), 80.0, 30.0,
             {ModeKind::Rail});
    add_link(m, strf("road-f-%02d", k), rid(k), rid(k + 1), hop(k), 50.0,
             800.0, road_modes);
    add_link(m, strf("road-b-%02d", k), rid(k + 1), rid(k), hop(k), 50.0,
             800.0, road_modes);
  }

  // Crossing bus lines at the gap station and one slow line upstream. The
  // two in-service buses on the fast crossings are the cheap pullable
  // vehicles; spur lengths put their dispatch times at 200 s and 312 s.
  add_station(m, "BA1", x[23], 1388.9);
  add_station(m, "BA2", x[23], -1500.0);
  add_station(m, "BB1", x[23] - 400.0, 2166.7);
  add_station(m, "BB2", x[23] + 400.0, -2100.0);
  add_station(m, "BC1", x[22], 1500.0);
  add_station(m, "BC2", x[22], -1500.0);
  add_link(m, "spur-ba1", "BA1", "R23", 25.0 * 200.0 / 3600.0, 50.0, 800.0,
           {ModeKind::Bus});
  add_link(m, "spur-ba2", "R23", "BA2", 1.5, 50.0, 800.0, {ModeKind::Bus});
  add_link(m, "spur-bb1", "BB1", "R23", 25.0 * 312.0 / 3600.0, 50.0, 800.0,
           {ModeKind::Bus});
  add_link(m, "spur-bb2", "R23", "BB2", 1.5, 50.0, 800.0, {ModeKind::Bus});
  add_link(m, "spur-bc1", "BC1", "R22", 1.5, 50.0, 800.0, {ModeKind::Bus});
  add_link(m, "spur-bc2", "R22", "BC2", 1.5, 50.0, 800.0, {ModeKind::Bus});

  // Reserve depot: a single spur calibrated so a pulled bus arrives 6075 s
  // after dispatch (late second half of the window).
  add_station(m, "DEPOT", x[23], -42190.0);
  add_link(m, "depot-spur", "DEPOT", "R23", 42.19, 60.0, 800.0,
           {ModeKind::Bus});

  const int svc0 = 21600, svc1 = 43200;
  add_line(m, "TRUNK", ModeKind::Rail,
           [&] {
             std::vector<std::string> stops;
             for (int k = 1; k <= 47; ++k) stops.push_back(rid(k));
             return stops;
           }(),
           10.0, svc0, svc1);
  add_line(m, "XA", ModeKind::Bus, {"BA1", "R23", "BA2"}, 10.0, svc0, svc1);
  add_line(m, "XB", ModeKind::Bus, {"BB1", "R23", "BB2"}, 15.0, svc0, svc1);
  add_line(m, "GAP", ModeKind::Bus, {"R22", "R23", "R24"}, 12.0, svc0, svc1);
  add_line(m, "XSLOW", ModeKind::Bus, {"BC1", "R22", "BC2"}, 20.0, svc0,
           svc1);

  // Fleet. In-service crossing buses; one bus on the road over the gap
  // itself (its source pair is primarily disrupted, so it may not be
  // pulled) and one on a line whose headway exceeds the pull cap.
  add_scheduled(m, "bus-a", ModeKind::Bus, "XA", "BA1", "R23");
  add_scheduled(m, "bus-b", ModeKind::Bus, "XB", "BB1", "R23");
  add_scheduled(m, "bus-x", ModeKind::Bus, "GAP", "R23", "R24");
  add_scheduled(m, "bus-d", ModeKind::Bus, "XSLOW", "BC1", "R22");
  for (int i = 1; i <= 6; ++i)
    add_depot(m, strf("depot-%d", i), ModeKind::Bus, "DEPOT");
  const int taxi_ranks[] = {22, 21, 20, 19, 18, 17, 16, 15};
  for (int r : taxi_ranks)
    for (int i = 1; i <= 26; ++i)
      add_free(m, strf("taxi-%02d-%02d", r, i), ModeKind::Taxi, rid(r));
  const int van_ranks[] = {18, 17, 16, 15, 14, 12, 10};
  for (int r : van_ranks)
    for (int i = 1; i <= 10; ++i)
      add_free(m, strf("van-%02d-%02d", r, i), ModeKind::Van, rid(r));

  // Calibrated demand. The gap OD spans exactly the default disruption
  // window (300 blocked passengers); the crossing-line ODs set the one-
  // headway volumes a pulled bus strands.
  add_demand(m, "R23", "R24", ModeKind::Rail, 25200, 32400, 150.0);
  add_demand(m, "R20", "R26", ModeKind::Rail, 25200, 32400, 20.0);
  add_demand(m, "BA1", "R23", ModeKind::Bus, svc0, svc1, 30.0);
  add_demand(m, "BB1", "R23", ModeKind::Bus, svc0, svc1, 30.0);
  add_demand(m, "R22", "R24", ModeKind::Bus, svc0, svc1, 12.0);
  add_demand(m, "BC1", "BC2", ModeKind::Bus, svc0, svc1, 12.0);

  // Background demand; the seed jitters these rates by up to +/-10%.
  struct Bg {
    const char *o, *d;
    ModeKind mode;
    double rate;
  };
  const Bg background[] = {
      {"R05", "R15", ModeKind::Rail, 40.0},
      {"R30", "R40", ModeKind::Rail, 30.0},
      {"R21", "R23", ModeKind::Taxi, 10.0},
      {"R24", "R30", ModeKind::Van, 8.0},
  };
  int idx = 0;
  for (const Bg& b : background) {
    const double jitter =
        0.9 + 0.2 * hash_uniform(seed, 0x9E00u + static_cast<unsigned>(idx++));
    add_demand(m, b.o, b.d, b.mode, svc0, svc1, b.rate * jitter);
  }

  m.validate();
  return m;
}

}  // namespace detail

inline ScenarioModel synth_corridor(const SynthSpec& spec = {}) {
  if (spec.variant == "bench") return detail::bench_corridor(spec.seed);
  if (spec.variant == "couple") return detail::couple_corridor(false);
  if (spec.variant == "congested") return detail::couple_corridor(true);
  throw ValidationError("SynthSpec.variant", spec.variant,
                        "expected bench, couple or congested");
}

// Default incident: the longest link of the busiest scheduled mode goes
// down at 07:00 for two hours.
inline DisruptionSpec default_disruption(const ScenarioModel& model) {
  std::map<ModeKind, double> pax;
  for (const DemandEntry& e : model.demand.entries) {
    if (!is_scheduled_mode(e.mode)) continue;
    for (const DemandBin& b : e.bins)
      pax[e.mode] += b.rate_per_h * (b.end_s - b.start_s) / 3600.0;
  }
  if (pax.empty())
    throw ValidationError("Disruption.mode", "default",
                          "no scheduled-mode demand to derive a target from");
  ModeKind busiest = pax.begin()->first;
  for (const auto& [mode, v] : pax)
    if (v > pax.at(busiest)) busiest = mode;

  double best_len = -1.0;
  std::pair<std::string, std::string> best;
  for (const TransitLine& ln : model.lines) {
    if (ln.mode != busiest) continue;
    for (std::size_t s = 0; s + 1 < ln.stops.size(); ++s) {
      const Link* l = model.find_link(ln.stops[s], ln.stops[s + 1], busiest);
      if (l && l->length_km > best_len) {
        best_len = l->length_km;
        best = {ln.stops[s], ln.stops[s + 1]};
      }
    }
  }
  if (best_len < 0.0)
    throw ValidationError("Disruption.links", "default",
                          "busiest scheduled mode has no line links");
  DisruptionSpec d;
  d.mode = busiest;
  d.links = {best};
  d.start_s = 7 * 3600;
  d.duration_s = 2 * 3600;
  return d;
}

}  // namespace raas
