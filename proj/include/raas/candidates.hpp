#pragma once

// Candidate generation: which vehicles may bridge a disrupted pair, with
// their dispatch distances, arrival durations and the passenger volume that
// pulling them would strand at their own source link.
//
// Filters applied per vehicle:
//   - vehicles of the disrupted mode are never candidates;
//   - a scheduled vehicle sourced from a primarily disrupted station pair is
//     excluded (a link cannot be both primarily and deliberately disrupted);
//   - a scheduled vehicle is pullable only if its line's headway does not
//     exceed the H_max parameter;
//   - vehicles that cannot reach the disrupted station on their mode's
//     subgraph are excluded with a warning.

#include <string>
#include <vector>

#include "raas/partition.hpp"
#include "raas/routing.hpp"

namespace raas {

struct CandidateVehicle {
  std::string vehicle_id;
  ModeKind mode = ModeKind::Bus;
  int capacity = 0;

  int pair_index = 0;      // which disrupted (i,j) pair it would serve
  std::string station_i;
  std::string station_j;

  // Source link (r,s) for scheduled vehicles; depot/free vehicles have
  // has_source_link = false and strand nobody when pulled.
  bool has_source_link = false;
  std::string source_r;
  std::string source_s;
  double source_headway_min = 0.0;
  double source_volume = 0.0;  // V_rs: passengers over one headway at (r,s)

  double d_ri_km = 0.0;  // dispatch point -> i
  double d_ij_km = 0.0;  // bridging leg i -> j
  double ta_s = 0.0;     // free-flow arrival duration = 3600 * d_ri / speed

  std::vector<int> path_to_i;  // link indices, replayed by the simulator
  std::vector<int> path_i_j;
};

struct CandidateSet {
  std::vector<CandidateVehicle> candidates;
  std::vector<std::string> warnings;  // unreachable-vehicle exclusions
};

namespace detail {

// Sum of per-link arrival times in traversal order; bit-identical to the
// simulator's free-flow traversal of the same path.
inline double path_time_s(const ScenarioModel& model,
                          const std::vector<int>& path, double speed_kmh) {
  double t = 0.0;
  for (int li : path)
    t += 3600.0 * model.links[static_cast<std::size_t>(li)].length_km /
         speed_kmh;
  return t;
}

inline int dispatch_station(const ScenarioModel& model, const Vehicle& v) {
  switch (v.kind) {
    case Vehicle::Kind::Scheduled:
      return model.station_index.at(v.scheduled.link_from);
    case Vehicle::Kind::Free:
      if (v.free.has_position)
        return nearest_station(model, v.free.x, v.free.y);
      return model.station_index.at(v.free.station);
    case Vehicle::Kind::Depot:
      return model.station_index.at(v.depot.station);
  }
  return -1;
}

}  // namespace detail

inline CandidateSet candidate_vehicles(const ScenarioModel& model,
                                       const StationPartition& part) {
  CandidateSet out;
  const LinkGraph graph(model);
  const double h_max = model.cost_params.headway_max_min;

  for (const Vehicle& v : model.vehicles) {
    if (v.mode == part.disruption.mode) continue;  // disrupted mode is out

    double headway_min = 0.0;
    double source_volume = 0.0;
    bool has_source = false;
    std::string src_r, src_s;
    if (v.kind == Vehicle::Kind::Scheduled) {
      src_r = v.scheduled.link_from;
      src_s = v.scheduled.link_to;
      if (part.primary_pairs.count({src_r, src_s})) continue;  // c1
      const TransitLine& ln = model.lines[static_cast<std::size_t>(
          model.line_index.at(v.scheduled.line))];
      headway_min = ln.headway_min;
      if (headway_min > h_max) continue;  // c4
      has_source = true;
      // Pulling the vehicle cancels one departure: passengers accumulating
      // at (r,s) over one headway from the disruption's onset are stranded.
      source_volume = blocked_volume(
          model.demand, src_r, src_s, v.mode, part.disruption.start_s,
          part.disruption.start_s + static_cast<int>(headway_min * 60.0));
    }

    const int from = detail::dispatch_station(model, v);
    const Mode& mode = model.mode_def(v.mode);

    for (int pi = 0; pi < static_cast<int>(part.od_pairs.size()); ++pi) {
      const DisruptedPair& pr = part.od_pairs[static_cast<std::size_t>(pi)];
      const int sti = model.station_index.at(pr.i);
      const int stj = model.station_index.at(pr.j);
      const PathResult to_i = graph.shortest_path(from, sti, v.mode);
      if (!to_i.found) {
        out.warnings.push_back("vehicle " + v.id + " cannot reach " + pr.i +
                               " on the " + to_string(v.mode) +
                               " network; excluded");
        continue;
      }
      const PathResult i_to_j = graph.shortest_path(sti, stj, v.mode);
      if (!i_to_j.found) {
        out.warnings.push_back("vehicle " + v.id + " cannot serve " + pr.i +
                               "->" + pr.j + " on the " + to_string(v.mode) +
                               " network; excluded");
        continue;
      }

      CandidateVehicle c;
      c.vehicle_id = v.id;
      c.mode = v.mode;
      c.capacity = model.vehicle_capacity(v);
      c.pair_index = pi;
      c.station_i = pr.i;
      c.station_j = pr.j;
      c.has_source_link = has_source;
      c.source_r = src_r;
      c.source_s = src_s;
      c.source_headway_min = headway_min;
      c.source_volume = source_volume;
      c.d_ri_km = to_i.distance_km;
      c.d_ij_km = i_to_j.distance_km;
      c.ta_s = detail::path_time_s(model, to_i.link_path, mode.speed_kmh);
      c.path_to_i = to_i.link_path;
      c.path_i_j = i_to_j.link_path;
      out.candidates.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace raas
