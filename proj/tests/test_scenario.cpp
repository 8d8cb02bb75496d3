// Scenario model: JSON round-trips, validation errors, disruption
// partitioning, routing and candidate generation. Expected partitions,
// distances and volumes are worked out by hand from the fixture network.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "raas/candidates.hpp"
#include "raas/scenario_json.hpp"

using namespace raas;
using Catch::Approx;

namespace {

// Corridor A--B--C--D (1.5 km hops): one-directional rail links shadowed by
// bidirectional road links (bus/taxi/van). Z is isolated (no links). P sits
// 1.4 km along the axis for the coordinate-snapping tests.
ScenarioModel fixture_model() {
  ScenarioModel m;
  auto st = [](const std::string& id, double x, double y) {
    Station s;
    s.id = id;
    s.name = "St " + id;
    s.x = x;
    s.y = y;
    return s;
  };
  m.stations = {st("A", 0, 0), st("B", 1500, 0), st("C", 3000, 0),
                st("D", 4500, 0), st("Z", 9000, 9000)};

  auto rail_link = [](const std::string& id, const std::string& f,
                      const std::string& t) {
    Link l;
    l.id = id;
    l.from = f;
    l.to = t;
    l.length_km = 1.5;
    l.free_flow_speed_kmh = 80.0;
    l.capacity_veh_h = 30.0;
    l.modes_allowed = {ModeKind::Rail};
    return l;
  };
  auto road_link = [](const std::string& id, const std::string& f,
                      const std::string& t) {
    Link l;
    l.id = id;
    l.from = f;
    l.to = t;
    l.length_km = 1.5;
    l.free_flow_speed_kmh = 50.0;
    l.capacity_veh_h = 800.0;
    l.modes_allowed = {ModeKind::Bus, ModeKind::Taxi, ModeKind::Van};
    return l;
  };
  m.links = {rail_link("r-ab", "A", "B"), rail_link("r-bc", "B", "C"),
             rail_link("r-cd", "C", "D"), road_link("d-ab", "A", "B"),
             road_link("d-ba", "B", "A"), road_link("d-bc", "B", "C"),
             road_link("d-cb", "C", "B"), road_link("d-cd", "C", "D"),
             road_link("d-dc", "D", "C")};

  auto mode = [](ModeKind k, double base, double per_km, int cap, double v) {
    Mode md;
    md.kind = k;
    md.op_cost.base = base;
    md.op_cost.per_km = per_km;
    md.capacity = cap;
    md.speed_kmh = v;
    return md;
  };
  m.modes = {mode(ModeKind::Rail, 0.139, 0.0, 400, 60.0),
             mode(ModeKind::Bus, 0.454, 0.0, 70, 25.0),
             mode(ModeKind::Taxi, 2.2, 1.72, 4, 45.0),
             mode(ModeKind::Van, 0.36, 0.0, 8, 40.0)};

  auto line = [](const std::string& id, ModeKind k,
                 std::vector<std::string> stops, double headway) {
    TransitLine ln;
    ln.id = id;
    ln.mode = k;
    ln.stops = std::move(stops);
    ln.headway_min = headway;
    ln.service_start_s = 6 * 3600;
    ln.service_end_s = 10 * 3600;
    return ln;
  };
  m.lines = {line("RL1", ModeKind::Rail, {"A", "B", "C", "D"}, 10.0),
             line("BL1", ModeKind::Bus, {"A", "B", "C"}, 10.0),
             line("BL2", ModeKind::Bus, {"A", "B"}, 20.0)};

  auto scheduled = [](const std::string& id, ModeKind k,
                      const std::string& line_id, const std::string& f,
                      const std::string& t) {
    Vehicle v;
    v.id = id;
    v.mode = k;
    v.kind = Vehicle::Kind::Scheduled;
    v.scheduled = {line_id, f, t};
    return v;
  };
  auto free_at = [](const std::string& id, ModeKind k,
                    const std::string& station) {
    Vehicle v;
    v.id = id;
    v.mode = k;
    v.kind = Vehicle::Kind::Free;
    v.free.station = station;
    return v;
  };
  Vehicle taxi2;
  taxi2.id = "taxi-2";
  taxi2.mode = ModeKind::Taxi;
  taxi2.kind = Vehicle::Kind::Free;
  taxi2.free.x = 1400.0;
  taxi2.free.y = 80.0;
  taxi2.free.has_position = true;
  Vehicle depot_bus;
  depot_bus.id = "bus-4";
  depot_bus.mode = ModeKind::Bus;
  depot_bus.kind = Vehicle::Kind::Depot;
  depot_bus.depot.station = "D";

  m.vehicles = {scheduled("rail-7", ModeKind::Rail, "RL1", "B", "C"),
                scheduled("bus-1", ModeKind::Bus, "BL1", "B", "C"),
                scheduled("bus-2", ModeKind::Bus, "BL1", "A", "B"),
                scheduled("bus-3", ModeKind::Bus, "BL2", "A", "B"),
                depot_bus,
                free_at("taxi-1", ModeKind::Taxi, "A"),
                taxi2,
                free_at("van-1", ModeKind::Van, "C"),
                free_at("van-z", ModeKind::Van, "Z")};

  auto entry = [](const std::string& o, const std::string& d, ModeKind k,
                  int s0, int s1, double rate) {
    DemandEntry e;
    e.origin = o;
    e.destination = d;
    e.mode = k;
    e.bins = {{s0, s1, rate}};
    return e;
  };
  m.demand.entries = {entry("B", "C", ModeKind::Rail, 7 * 3600, 9 * 3600, 150.0),
                      entry("A", "B", ModeKind::Bus, 6 * 3600, 10 * 3600, 60.0)};
  m.validate();
  return m;
}

DisruptionSpec fixture_disruption() {
  DisruptionSpec d;
  d.mode = ModeKind::Rail;
  d.links = {{"B", "C"}};
  d.start_s = 7 * 3600;
  d.duration_s = 7200;
  return d;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const CandidateVehicle* find_candidate(const CandidateSet& cs,
                                       const std::string& id) {
  for (const CandidateVehicle& c : cs.candidates)
    if (c.vehicle_id == id) return &c;
  return nullptr;
}

}  // namespace

//==============================================================================
// JSON round-trips
//==============================================================================

TEST_CASE("scenario survives a save/load round-trip byte-for-byte") {
  ScenarioModel m = fixture_model();
  const std::string p1 = "rt_scenario_1.json", p2 = "rt_scenario_2.json";
  save_scenario(m, p1);
  ScenarioModel loaded = load_scenario(p1);
  save_scenario(loaded, p2);
  REQUIRE(slurp(p1) == slurp(p2));
  REQUIRE(scenario_to_json(m) == scenario_to_json(loaded));
  std::remove(p1.c_str());
  std::remove(p2.c_str());

  // Spot checks on the loaded copy.
  REQUIRE(loaded.stations.size() == 5);
  REQUIRE(loaded.links.size() == 9);
  REQUIRE(loaded.vehicles.size() == 9);
  const Vehicle& t2 = loaded.vehicles[6];
  REQUIRE(t2.id == "taxi-2");
  REQUIRE(t2.free.has_position);
  REQUIRE(t2.free.x == Approx(1400.0));
  REQUIRE(loaded.mode_def(ModeKind::Taxi).op_cost.eval(10.0) ==
          Approx(2.2 + 17.2));
  REQUIRE(loaded.cost_params.time_cost_per_h == Approx(11.2));
}

TEST_CASE("disruption survives a save/load round-trip") {
  const DisruptionSpec d = fixture_disruption();
  const std::string p = "rt_disruption.json";
  {
    std::ofstream out(p, std::ios::binary);
    out << disruption_to_json(d).dump(2) << "\n";
  }
  const DisruptionSpec back = load_disruption(p);
  std::remove(p.c_str());
  REQUIRE(back.mode == ModeKind::Rail);
  REQUIRE(back.links == d.links);
  REQUIRE(back.start_s == d.start_s);
  REQUIRE(back.duration_s == d.duration_s);
}

TEST_CASE("unknown and missing keys are rejected on load") {
  ordered_json j = scenario_to_json(fixture_model());
  SECTION("unknown key on a station") {
    j["stations"][0]["elevation"] = 12.0;
    REQUIRE_THROWS_AS(scenario_from_json(j), ParseError);
  }
  SECTION("unknown top-level key") {
    j["comment"] = "hello";
    REQUIRE_THROWS_AS(scenario_from_json(j), ParseError);
  }
  SECTION("missing required key") {
    j["links"][0].erase("length_km");
    REQUIRE_THROWS_AS(scenario_from_json(j), ParseError);
  }
  SECTION("bad mode name") {
    j["modes"][0]["kind"] = "zeppelin";
    REQUIRE_THROWS_AS(scenario_from_json(j), ParseError);
  }
  SECTION("wrong type") {
    j["stations"][0]["x"] = "far away";
    REQUIRE_THROWS_AS(scenario_from_json(j), ParseError);
  }
}

//==============================================================================
// Validation
//==============================================================================

TEST_CASE("validate rejects structural mistakes with the offending entity") {
  SECTION("duplicate station id") {
    ScenarioModel m = fixture_model();
    m.stations.push_back(m.stations[0]);
    REQUIRE_THROWS_MATCHES(m.validate(), ValidationError,
                           Catch::Matchers::MessageMatches(
                               Catch::Matchers::ContainsSubstring("A")));
  }
  SECTION("link references unknown station") {
    ScenarioModel m = fixture_model();
    m.links[0].to = "Q";
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("self-loop link") {
    ScenarioModel m = fixture_model();
    m.links[0].to = m.links[0].from;
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("nonpositive link length") {
    ScenarioModel m = fixture_model();
    m.links[0].length_km = 0.0;
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("parallel links may not share a mode") {
    ScenarioModel m = fixture_model();
    Link dup = m.links[3];  // second road link on A->B
    dup.id = "d-ab-2";
    m.links.push_back(dup);
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("parallel links with disjoint modes are fine") {
    ScenarioModel m = fixture_model();  // rail + road already share A->B
    REQUIRE_NOTHROW(m.validate());
    REQUIRE(m.find_link("A", "B", ModeKind::Rail)->id == "r-ab");
    REQUIRE(m.find_link("A", "B", ModeKind::Van)->id == "d-ab");
    REQUIRE(m.find_link("A", "B", ModeKind::Subway) == nullptr);
  }
  SECTION("line hops over a missing link") {
    ScenarioModel m = fixture_model();
    m.lines[0].stops = {"A", "C"};
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("line on a link that does not permit its mode") {
    ScenarioModel m = fixture_model();
    m.lines[1].stops = {"B", "C"};
    m.links[5].modes_allowed = {ModeKind::Taxi};  // d-bc loses Bus
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("free-ranging mode cannot run a line") {
    ScenarioModel m = fixture_model();
    m.lines[1].mode = ModeKind::Taxi;
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("scheduled vehicle off its line") {
    ScenarioModel m = fixture_model();
    m.vehicles[2].scheduled.link_from = "B";
    m.vehicles[2].scheduled.link_to = "A";
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("vehicle/line mode mismatch") {
    ScenarioModel m = fixture_model();
    m.vehicles[1].scheduled.line = "RL1";
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("demand bin runs backwards") {
    ScenarioModel m = fixture_model();
    m.demand.entries[0].bins[0].end_s = m.demand.entries[0].bins[0].start_s;
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("payment shares out of order") {
    ScenarioModel m = fixture_model();
    m.cost_params.p_min = 1.1;
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("alpha + beta above one") {
    ScenarioModel m = fixture_model();
    m.cost_params.alpha = 0.6;
    m.cost_params.beta = 0.5;
    REQUIRE_THROWS_AS(m.validate(), ValidationError);
  }
  SECTION("error message carries field and entity") {
    ScenarioModel m = fixture_model();
    m.links[1].length_km = -2.0;
    try {
      m.validate();
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      const std::string msg = e.what();
      REQUIRE(msg.find("Link.length") != std::string::npos);
      REQUIRE(msg.find("r-bc") != std::string::npos);
    }
  }
}

TEST_CASE("disruption validation") {
  const ScenarioModel m = fixture_model();
  DisruptionSpec d = fixture_disruption();
  REQUIRE_NOTHROW(validate_disruption(m, d));

  SECTION("unknown link") {
    d.links = {{"A", "C"}};
    REQUIRE_THROWS_AS(validate_disruption(m, d), UnknownLink);
  }
  SECTION("link does not carry the disrupted mode") {
    d.links = {{"B", "A"}};  // road-only direction, no rail
    REQUIRE_THROWS_AS(validate_disruption(m, d), UnknownLink);
  }
  SECTION("empty link list") {
    d.links.clear();
    REQUIRE_THROWS_AS(validate_disruption(m, d), ValidationError);
  }
  SECTION("nonpositive duration") {
    d.duration_s = 0;
    REQUIRE_THROWS_AS(validate_disruption(m, d), ValidationError);
  }
}

//==============================================================================
// Routing
//==============================================================================

TEST_CASE("shortest paths respect mode permissions and sum link lengths") {
  const ScenarioModel m = fixture_model();
  const LinkGraph g(m);
  const int a = m.station_index.at("A"), b = m.station_index.at("B"),
            c = m.station_index.at("C"), d = m.station_index.at("D"),
            z = m.station_index.at("Z");

  const PathResult rail_ad = g.shortest_path(a, d, ModeKind::Rail);
  REQUIRE(rail_ad.found);
  REQUIRE(rail_ad.distance_km == Approx(4.5));
  REQUIRE(rail_ad.link_path.size() == 3);

  // Rail links are one-way in the fixture: D -> A has no rail path.
  REQUIRE_FALSE(g.shortest_path(d, a, ModeKind::Rail).found);
  // Road is bidirectional for vans.
  const PathResult van_da = g.shortest_path(d, a, ModeKind::Van);
  REQUIRE(van_da.found);
  REQUIRE(van_da.distance_km == Approx(4.5));

  REQUIRE_FALSE(g.shortest_path(a, z, ModeKind::Van).found);

  const PathResult same = g.shortest_path(b, b, ModeKind::Taxi);
  REQUIRE(same.found);
  REQUIRE(same.distance_km == 0.0);
  REQUIRE(same.link_path.empty());

  REQUIRE(g.shortest_path(b, c, ModeKind::Taxi).distance_km == Approx(1.5));
}

TEST_CASE("nearest station snapping uses planar distance") {
  const ScenarioModel m = fixture_model();
  REQUIRE(m.stations[static_cast<std::size_t>(
                         nearest_station(m, 1400.0, 80.0))].id == "B");
  REQUIRE(m.stations[static_cast<std::size_t>(
                         nearest_station(m, 100.0, -50.0))].id == "A");
  REQUIRE(m.stations[static_cast<std::size_t>(
                         nearest_station(m, 8000.0, 8000.0))].id == "Z");
}

//==============================================================================
// Blocked volume
//==============================================================================

TEST_CASE("blocked volume integrates the demand profile over the window") {
  const ScenarioModel m = fixture_model();
  // Full window inside the bin: 150/h over 2 h.
  REQUIRE(blocked_volume(m.demand, "B", "C", ModeKind::Rail, 7 * 3600,
                         9 * 3600) == Approx(300.0));
  // Window clipped by the bin start.
  REQUIRE(blocked_volume(m.demand, "B", "C", ModeKind::Rail, 6 * 3600,
                         8 * 3600) == Approx(150.0));
  // Mode mismatch finds nothing.
  REQUIRE(blocked_volume(m.demand, "B", "C", ModeKind::Bus, 7 * 3600,
                         9 * 3600) == 0.0);
  // One headway of the A->B bus demand: 60/h over 10 min.
  REQUIRE(blocked_volume(m.demand, "A", "B", ModeKind::Bus, 7 * 3600,
                         7 * 3600 + 600) == Approx(10.0));
  REQUIRE_THROWS_AS(
      blocked_volume(m.demand, "B", "C", ModeKind::Rail, 100, 50),
      ValidationError);
}

//==============================================================================
// Partition
//==============================================================================

TEST_CASE("disruption partitions stations per mode and restricts the OD set") {
  const ScenarioModel m = fixture_model();
  const StationPartition part = apply_disruption(m, fixture_disruption());

  REQUIRE(part.primary_pairs ==
          std::set<std::pair<std::string, std::string>>{{"B", "C"}});

  const ModePartition& rail = part.per_mode.at(ModeKind::Rail);
  REQUIRE(rail.disrupted_origins == std::set<std::string>{"B"});
  REQUIRE(rail.disrupted_destinations == std::set<std::string>{"C"});
  REQUIRE(rail.other_origins == std::set<std::string>{"A", "C"});
  REQUIRE(rail.other_destinations == std::set<std::string>{"B", "D"});

  // Other modes keep their full service sets.
  const ModePartition& bus = part.per_mode.at(ModeKind::Bus);
  REQUIRE(bus.disrupted_origins.empty());
  REQUIRE(bus.other_origins == std::set<std::string>{"A", "B"});
  const ModePartition& taxi = part.per_mode.at(ModeKind::Taxi);
  REQUIRE(taxi.disrupted_origins.empty());
  REQUIRE(taxi.other_origins == std::set<std::string>{"A", "B", "C", "D"});

  REQUIRE(part.od_pairs.size() == 1);
  REQUIRE(part.od_pairs[0].i == "B");
  REQUIRE(part.od_pairs[0].j == "C");
  REQUIRE(part.od_pairs[0].volume == Approx(300.0));
}

TEST_CASE("multi-link disruption collects every affected pair") {
  const ScenarioModel m = fixture_model();
  DisruptionSpec d = fixture_disruption();
  d.links = {{"B", "C"}, {"C", "D"}};
  const StationPartition part = apply_disruption(m, d);
  const ModePartition& rail = part.per_mode.at(ModeKind::Rail);
  REQUIRE(rail.disrupted_origins == std::set<std::string>{"B", "C"});
  REQUIRE(rail.disrupted_destinations == std::set<std::string>{"C", "D"});
  REQUIRE(rail.other_origins == std::set<std::string>{"A"});
  REQUIRE(part.od_pairs.size() == 2);
}

//==============================================================================
// Candidate generation
//==============================================================================

TEST_CASE("candidate filters: mode, shared pair, headway cap, reachability") {
  const ScenarioModel m = fixture_model();
  const StationPartition part = apply_disruption(m, fixture_disruption());
  const CandidateSet cs = candidate_vehicles(m, part);

  // Disrupted-mode vehicles are never candidates.
  REQUIRE(find_candidate(cs, "rail-7") == nullptr);
  // bus-1 currently serves the primarily disrupted station pair.
  REQUIRE(find_candidate(cs, "bus-1") == nullptr);
  // bus-3's line runs every 20 min, above the 15 min pull limit.
  REQUIRE(find_candidate(cs, "bus-3") == nullptr);
  // van-z is cut off from the network and drops out with a warning.
  REQUIRE(find_candidate(cs, "van-z") == nullptr);
  REQUIRE_FALSE(cs.warnings.empty());
  bool warned = false;
  for (const std::string& w : cs.warnings)
    if (w.find("van-z") != std::string::npos) warned = true;
  REQUIRE(warned);

  REQUIRE(cs.candidates.size() == 5);  // bus-2, bus-4, taxi-1, taxi-2, van-1

  const CandidateVehicle* bus2 = find_candidate(cs, "bus-2");
  REQUIRE(bus2 != nullptr);
  REQUIRE(bus2->has_source_link);
  REQUIRE(bus2->source_r == "A");
  REQUIRE(bus2->source_s == "B");
  REQUIRE(bus2->source_headway_min == Approx(10.0));
  REQUIRE(bus2->source_volume == Approx(10.0));  // 60/h over one headway
  REQUIRE(bus2->capacity == 70);
  REQUIRE(bus2->d_ri_km == Approx(1.5));
  REQUIRE(bus2->d_ij_km == Approx(1.5));
  REQUIRE(bus2->ta_s == Approx(3600.0 * 1.5 / 25.0).epsilon(1e-12));

  const CandidateVehicle* bus4 = find_candidate(cs, "bus-4");
  REQUIRE(bus4 != nullptr);
  REQUIRE_FALSE(bus4->has_source_link);  // depot pulls strand nobody
  REQUIRE(bus4->d_ri_km == Approx(3.0));
  REQUIRE(bus4->ta_s == Approx(432.0).epsilon(1e-12));

  const CandidateVehicle* taxi1 = find_candidate(cs, "taxi-1");
  REQUIRE(taxi1 != nullptr);
  REQUIRE(taxi1->capacity == 4);
  REQUIRE(taxi1->ta_s == Approx(120.0).epsilon(1e-12));

  // taxi-2 snaps to B by coordinates: zero dispatch distance.
  const CandidateVehicle* taxi2 = find_candidate(cs, "taxi-2");
  REQUIRE(taxi2 != nullptr);
  REQUIRE(taxi2->d_ri_km == 0.0);
  REQUIRE(taxi2->ta_s == 0.0);
  REQUIRE(taxi2->path_to_i.empty());

  const CandidateVehicle* van1 = find_candidate(cs, "van-1");
  REQUIRE(van1 != nullptr);
  REQUIRE(van1->d_ri_km == Approx(1.5));  // back along the reverse road link
  REQUIRE(van1->ta_s == Approx(135.0).epsilon(1e-12));
}

TEST_CASE("a 15 minute headway sits exactly on the pull limit") {
  ScenarioModel m = fixture_model();
  for (TransitLine& ln : m.lines)
    if (ln.id == "BL2") ln.headway_min = 15.0;
  m.validate();
  const CandidateSet cs =
      candidate_vehicles(m, apply_disruption(m, fixture_disruption()));
  REQUIRE(find_candidate(cs, "bus-3") != nullptr);  // <= H_max is pullable
}

TEST_CASE("candidates are generated per disrupted pair") {
  const ScenarioModel m = fixture_model();
  DisruptionSpec d = fixture_disruption();
  d.links = {{"B", "C"}, {"C", "D"}};
  const CandidateSet cs = candidate_vehicles(m, apply_disruption(m, d));
  int taxi1_pairs = 0;
  for (const CandidateVehicle& c : cs.candidates)
    if (c.vehicle_id == "taxi-1") {
      ++taxi1_pairs;
      if (c.pair_index == 1) {
        REQUIRE(c.station_i == "C");
        REQUIRE(c.d_ri_km == Approx(3.0));
      }
    }
  REQUIRE(taxi1_pairs == 2);
}
