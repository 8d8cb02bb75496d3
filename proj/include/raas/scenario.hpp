#pragma once

// Multimodal scenario model: stations, links, mode definitions, scheduled
// lines, the mixed fleet, time-sliced OD demand, the disruption descriptor
// and the global cost parameters. `validate()` enforces every structural
// invariant and throws ValidationError with the offending field + entity.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "raas/core.hpp"

namespace raas {

//==============================================================================
// Network
//==============================================================================

struct Station {
  std::string id;
  std::string name;
  double x = 0.0;  // planar metres
  double y = 0.0;
};

struct Link {
  std::string id;
  std::string from;
  std::string to;
  double length_km = 0.0;
  double free_flow_speed_kmh = 0.0;
  double capacity_veh_h = 0.0;      // vehicles/hour for the delay function
  std::set<ModeKind> modes_allowed;
};

// Per-passenger-km operating rate; affine in trip distance so the taxi
// tariff (slope per km + base) and flat rates share one representation.
struct OperatingCost {
  double base = 0.0;       // EUR per passenger-km
  double per_km = 0.0;     // additional EUR per passenger-km per trip-km
  double eval(double trip_km) const { return base + per_km * trip_km; }
};

struct Mode {
  ModeKind kind = ModeKind::Bus;
  OperatingCost op_cost;
  int capacity = 0;            // seats per vehicle
  double speed_kmh = 0.0;      // dispatch/service speed
};

struct TransitLine {
  std::string id;
  ModeKind mode = ModeKind::Bus;
  std::vector<std::string> stops;  // consecutive stops joined by links of `mode`
  double headway_min = 0.0;
  int service_start_s = 0;
  int service_end_s = 0;
};

//==============================================================================
// Fleet
//==============================================================================

// A scheduled vehicle currently serving link (r,s) of its line; r is the
// station it would be pulled from.
struct ScheduledAssignment {
  std::string line;
  std::string link_from;
  std::string link_to;
};

// Free-ranging vehicle standing at a station or at coordinates (snapped to
// the nearest station on dispatch).
struct FreeAssignment {
  std::string station;  // empty when positioned by coordinates
  double x = 0.0;
  double y = 0.0;
  bool has_position = false;
};

// Reserve vehicle parked at a depot station (source and return point
// coincide; pulling it disrupts nobody).
struct DepotAssignment {
  std::string station;
};

struct Vehicle {
  std::string id;
  ModeKind mode = ModeKind::Bus;
  enum class Kind { Scheduled, Free, Depot } kind = Kind::Free;
  ScheduledAssignment scheduled;
  FreeAssignment free;
  DepotAssignment depot;
  std::optional<int> capacity_override;
};

//==============================================================================
// Demand
//==============================================================================

struct DemandBin {
  int start_s = 0;
  int end_s = 0;
  double rate_per_h = 0.0;  // passengers/hour, constant over the bin
};

struct DemandEntry {
  std::string origin;
  std::string destination;
  ModeKind mode = ModeKind::Rail;
  std::vector<DemandBin> bins;
};

struct DemandProfile {
  std::vector<DemandEntry> entries;
};

//==============================================================================
// Disruption & cost parameters
//==============================================================================

struct DisruptionSpec {
  ModeKind mode = ModeKind::Rail;
  std::vector<std::pair<std::string, std::string>> links;  // (i,j) station pairs
  int start_s = 0;
  int duration_s = 0;  // TD
};

struct CostParams {
  double leave_cost = 2.50;        // EUR per leaving passenger (CL)
  double time_cost_per_h = 11.2;   // EUR per passenger-hour (CT)
  double p_min = 0.3;              // reduced payment share
  double p_max = 1.0;              // full payment share
  double arrangement_rate = 0.2;   // share of the distance-based transfer cost
  double alpha = 0.1;              // leaving-rate floor
  double beta = 0.1;               // loyal share (1-beta is the leaving cap)
  double headway_max_min = 15.0;   // max headway of a pullable line (H_max)
  double theta = 0.2;              // willingness-to-wait floor
};

//==============================================================================
// Scenario
//==============================================================================

struct ScenarioModel {
  int schema_version = 1;
  std::vector<Station> stations;
  std::vector<Link> links;
  std::vector<Mode> modes;
  std::vector<TransitLine> lines;
  std::vector<Vehicle> vehicles;
  DemandProfile demand;
  CostParams cost_params;

  // ---- indexes (rebuilt by validate()) ----
  std::unordered_map<std::string, int> station_index;
  std::unordered_map<std::string, int> line_index;
  std::map<ModeKind, int> mode_index;
  // Directed station pair -> link indices. Parallel links on a pair are
  // allowed (e.g. a rail track shadowed by a road) but their mode sets must
  // be disjoint so a (pair, mode) lookup is unambiguous.
  std::map<std::pair<std::string, std::string>, std::vector<int>> link_by_pair;

  const Mode& mode_def(ModeKind k) const {
    auto it = mode_index.find(k);
    if (it == mode_index.end())
      throw ValidationError("Mode", to_string(k), "mode not defined in scenario");
    return modes[static_cast<std::size_t>(it->second)];
  }

  int vehicle_capacity(const Vehicle& v) const {
    return v.capacity_override ? *v.capacity_override : mode_def(v.mode).capacity;
  }

  // The link carrying `mode` between the stations, or nullptr.
  const Link* find_link(const std::string& from, const std::string& to,
                        ModeKind mode) const {
    auto it = link_by_pair.find({from, to});
    if (it == link_by_pair.end()) return nullptr;
    for (int li : it->second) {
      const Link& l = links[static_cast<std::size_t>(li)];
      if (l.modes_allowed.count(mode)) return &l;
    }
    return nullptr;
  }

  void validate();
};

inline void ScenarioModel::validate() {
  station_index.clear();
  line_index.clear();
  mode_index.clear();
  link_by_pair.clear();

  if (schema_version != 1)
    throw ValidationError("schema_version", std::to_string(schema_version),
                          "unsupported schema version");

  for (int i = 0; i < static_cast<int>(stations.size()); ++i) {
    const Station& s = stations[static_cast<std::size_t>(i)];
    if (s.id.empty())
      throw ValidationError("Station.id", "#" + std::to_string(i), "empty id");
    if (!station_index.emplace(s.id, i).second)
      throw ValidationError("Station.id", s.id, "duplicate station id");
  }

  for (int i = 0; i < static_cast<int>(modes.size()); ++i) {
    const Mode& m = modes[static_cast<std::size_t>(i)];
    if (!mode_index.emplace(m.kind, i).second)
      throw ValidationError("Mode.kind", to_string(m.kind), "duplicate mode");
    if (m.capacity <= 0)
      throw ValidationError("Mode.capacity", to_string(m.kind), "must be > 0");
    if (m.speed_kmh <= 0.0)
      throw ValidationError("Mode.speed", to_string(m.kind), "must be > 0");
    if (m.op_cost.base < 0.0 || m.op_cost.per_km < 0.0)
      throw ValidationError("Mode.op_cost", to_string(m.kind),
                            "rates must be >= 0");
  }

  std::set<std::string> link_ids;
  for (int i = 0; i < static_cast<int>(links.size()); ++i) {
    const Link& l = links[static_cast<std::size_t>(i)];
    const std::string& ent = l.id.empty() ? "#" + std::to_string(i) : l.id;
    if (l.id.empty())
      throw ValidationError("Link.id", ent, "empty id");
    if (!link_ids.insert(l.id).second)
      throw ValidationError("Link.id", ent, "duplicate link id");
    if (!station_index.count(l.from))
      throw ValidationError("Link.from", ent, "unknown station " + l.from);
    if (!station_index.count(l.to))
      throw ValidationError("Link.to", ent, "unknown station " + l.to);
    if (l.from == l.to)
      throw ValidationError("Link.to", ent, "self-loop");
    if (!(l.length_km > 0.0))
      throw ValidationError("Link.length", ent, "must be > 0");
    if (!(l.free_flow_speed_kmh > 0.0))
      throw ValidationError("Link.free_flow_speed", ent, "must be > 0");
    if (!(l.capacity_veh_h > 0.0))
      throw ValidationError("Link.capacity", ent, "must be > 0");
    if (l.modes_allowed.empty())
      throw ValidationError("Link.modes_allowed", ent, "empty mode set");
    std::vector<int>& parallel = link_by_pair[{l.from, l.to}];
    for (int pi : parallel)
      for (ModeKind k : links[static_cast<std::size_t>(pi)].modes_allowed)
        if (l.modes_allowed.count(k))
          throw ValidationError(
              "Link.modes_allowed", ent,
              strf("parallel link %s already carries %s on %s->%s",
                   links[static_cast<std::size_t>(pi)].id.c_str(), to_string(k),
                   l.from.c_str(), l.to.c_str()));
    parallel.push_back(i);
  }

  for (int i = 0; i < static_cast<int>(lines.size()); ++i) {
    const TransitLine& ln = lines[static_cast<std::size_t>(i)];
    const std::string& ent = ln.id.empty() ? "#" + std::to_string(i) : ln.id;
    if (ln.id.empty())
      throw ValidationError("Line.id", ent, "empty id");
    if (!line_index.emplace(ln.id, i).second)
      throw ValidationError("Line.id", ent, "duplicate line id");
    if (!mode_index.count(ln.mode))
      throw ValidationError("Line.mode", ent,
                            std::string("undefined mode ") + to_string(ln.mode));
    if (!is_scheduled_mode(ln.mode))
      throw ValidationError("Line.mode", ent, "free-ranging mode cannot run a line");
    if (ln.stops.size() < 2)
      throw ValidationError("Line.stops", ent, "needs at least 2 stops");
    if (!(ln.headway_min > 0.0))
      throw ValidationError("Line.headway", ent, "must be > 0");
    if (ln.service_end_s <= ln.service_start_s)
      throw ValidationError("Line.service_window", ent, "end must be after start");
    for (std::size_t k = 0; k + 1 < ln.stops.size(); ++k) {
      if (!station_index.count(ln.stops[k]))
        throw ValidationError("Line.stops", ent, "unknown station " + ln.stops[k]);
      const Link* lk = find_link(ln.stops[k], ln.stops[k + 1], ln.mode);
      if (!lk)
        throw ValidationError("Line.stops", ent,
                              "no " + std::string(to_string(ln.mode)) +
                                  " link " + ln.stops[k] + "->" +
                                  ln.stops[k + 1]);
    }
    if (!station_index.count(ln.stops.back()))
      throw ValidationError("Line.stops", ent,
                            "unknown station " + ln.stops.back());
  }

  std::set<std::string> vehicle_ids;
  for (int i = 0; i < static_cast<int>(vehicles.size()); ++i) {
    const Vehicle& v = vehicles[static_cast<std::size_t>(i)];
    const std::string& ent = v.id.empty() ? "#" + std::to_string(i) : v.id;
    if (v.id.empty())
      throw ValidationError("Vehicle.id", ent, "empty id");
    if (!vehicle_ids.insert(v.id).second)
      throw ValidationError("Vehicle.id", ent, "duplicate vehicle id");
    if (!mode_index.count(v.mode))
      throw ValidationError("Vehicle.mode", ent,
                            std::string("undefined mode ") + to_string(v.mode));
    if (v.capacity_override && *v.capacity_override <= 0)
      throw ValidationError("Vehicle.capacity", ent, "override must be > 0");
    switch (v.kind) {
      case Vehicle::Kind::Scheduled: {
        if (!is_scheduled_mode(v.mode))
          throw ValidationError("Vehicle.assignment", ent,
                                "free-ranging mode cannot be scheduled");
        auto it = line_index.find(v.scheduled.line);
        if (it == line_index.end())
          throw ValidationError("Vehicle.assignment", ent,
                                "unknown line " + v.scheduled.line);
        const TransitLine& ln = lines[static_cast<std::size_t>(it->second)];
        if (ln.mode != v.mode)
          throw ValidationError("Vehicle.assignment", ent,
                                "vehicle/line mode mismatch");
        bool on_line = false;
        for (std::size_t k = 0; k + 1 < ln.stops.size(); ++k)
          if (ln.stops[k] == v.scheduled.link_from &&
              ln.stops[k + 1] == v.scheduled.link_to)
            on_line = true;
        if (!on_line)
          throw ValidationError("Vehicle.assignment", ent,
                                "current link " + v.scheduled.link_from + "->" +
                                    v.scheduled.link_to + " not on line " +
                                    ln.id);
        break;
      }
      case Vehicle::Kind::Free: {
        if (v.free.has_position) break;  // snapped to nearest station later
        if (!station_index.count(v.free.station))
          throw ValidationError("Vehicle.assignment", ent,
                                "unknown station " + v.free.station);
        break;
      }
      case Vehicle::Kind::Depot: {
        if (!station_index.count(v.depot.station))
          throw ValidationError("Vehicle.assignment", ent,
                                "unknown depot station " + v.depot.station);
        break;
      }
    }
  }

  for (int i = 0; i < static_cast<int>(demand.entries.size()); ++i) {
    const DemandEntry& e = demand.entries[static_cast<std::size_t>(i)];
    const std::string ent = e.origin + "->" + e.destination;
    if (!station_index.count(e.origin))
      throw ValidationError("Demand.origin", ent, "unknown station");
    if (!station_index.count(e.destination))
      throw ValidationError("Demand.destination", ent, "unknown station");
    if (!mode_index.count(e.mode))
      throw ValidationError("Demand.mode", ent,
                            std::string("undefined mode ") + to_string(e.mode));
    if (e.bins.empty())
      throw ValidationError("Demand.bins", ent, "empty bin list");
    for (const DemandBin& b : e.bins) {
      if (b.end_s <= b.start_s)
        throw ValidationError("Demand.bins", ent, "bin end must be after start");
      if (b.rate_per_h < 0.0)
        throw ValidationError("Demand.bins", ent, "negative rate");
    }
  }

  const CostParams& p = cost_params;
  if (!(p.leave_cost >= 0.0))
    throw ValidationError("CostParams.leave_cost", "cost_params", "must be >= 0");
  if (!(p.time_cost_per_h >= 0.0))
    throw ValidationError("CostParams.time_cost_per_h", "cost_params",
                          "must be >= 0");
  if (!(p.p_min >= 0.0 && p.p_min <= p.p_max))
    throw ValidationError("CostParams.p_min", "cost_params",
                          "need 0 <= p_min <= p_max");
  if (!(p.arrangement_rate >= 0.0))
    throw ValidationError("CostParams.arrangement_rate", "cost_params",
                          "must be >= 0");
  if (!(p.alpha >= 0.0 && p.beta >= 0.0 && p.alpha + p.beta <= 1.0))
    throw ValidationError("CostParams.alpha", "cost_params",
                          "need alpha,beta >= 0 and alpha + beta <= 1");
  if (!(p.headway_max_min > 0.0))
    throw ValidationError("CostParams.headway_max_min", "cost_params",
                          "must be > 0");
  if (!(p.theta >= 0.0 && p.theta <= 1.0))
    throw ValidationError("CostParams.theta", "cost_params", "must be in [0,1]");
}

// Checks a disruption against a validated model (modes/links must exist and
// carry the disrupted mode). Throws UnknownLink / ValidationError.
inline void validate_disruption(const ScenarioModel& model,
                                const DisruptionSpec& d) {
  if (!model.mode_index.count(d.mode))
    throw ValidationError("Disruption.mode", to_string(d.mode),
                          "mode not defined in scenario");
  if (d.links.empty())
    throw ValidationError("Disruption.links", to_string(d.mode),
                          "no affected links");
  if (d.duration_s <= 0)
    throw ValidationError("Disruption.duration", to_string(d.mode),
                          "must be > 0");
  for (const auto& [from, to] : d.links) {
    const Link* l = model.find_link(from, to, d.mode);
    if (!l)
      throw UnknownLink("no " + std::string(to_string(d.mode)) + " link " +
                        from + "->" + to);
  }
}

}  // namespace raas
