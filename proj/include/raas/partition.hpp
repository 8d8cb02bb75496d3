#pragma once

// Applying a disruption to a scenario: flags the affected links of the
// disrupted mode, partitions every mode's stations into disrupted /
// not-disrupted origin and destination sets, and restricts the disrupted
// mode's OD matrix to the affected pairs.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "raas/scenario.hpp"

namespace raas {

// Total passengers blocked on pair (origin,destination,mode) over a window:
// integral of the piecewise-constant demand rate.
inline double blocked_volume(const DemandProfile& demand,
                             const std::string& origin,
                             const std::string& destination, ModeKind mode,
                             int window_start_s, int window_end_s) {
  if (window_end_s < window_start_s)
    throw ValidationError("blocked_volume.window", origin + "->" + destination,
                          "end before start");
  double v = 0.0;
  for (const DemandEntry& e : demand.entries) {
    if (e.origin != origin || e.destination != destination || e.mode != mode)
      continue;
    for (const DemandBin& b : e.bins) {
      const int lo = std::max(b.start_s, window_start_s);
      const int hi = std::min(b.end_s, window_end_s);
      if (hi > lo) v += b.rate_per_h * (hi - lo) / 3600.0;
    }
  }
  return v;
}

struct DisruptedPair {
  std::string i;       // primary disrupted station (origin of affected link)
  std::string j;       // unreachable destination
  double volume = 0.0; // blocked passengers over the disruption window
};

struct ModePartition {
  std::set<std::string> disrupted_origins;      // I^k
  std::set<std::string> other_origins;          // not-disrupted origins
  std::set<std::string> disrupted_destinations; // J^k
  std::set<std::string> other_destinations;     // destinations still reachable
};

struct StationPartition {
  DisruptionSpec disruption;
  // Primary-disruption flags: directed station pairs of the disrupted mode.
  std::set<std::pair<std::string, std::string>> primary_pairs;
  std::map<ModeKind, ModePartition> per_mode;
  std::vector<DisruptedPair> od_pairs;  // restricted OD matrix, with volumes
};

namespace detail {

// Station pairs that mode k's infrastructure serves as directed links. For
// scheduled modes this is the union of consecutive line stops; free-ranging
// modes use every link permitting them.
inline std::vector<std::pair<std::string, std::string>> service_pairs(
    const ScenarioModel& model, ModeKind k) {
  std::set<std::pair<std::string, std::string>> pairs;
  if (is_scheduled_mode(k)) {
    for (const TransitLine& ln : model.lines) {
      if (ln.mode != k) continue;
      for (std::size_t s = 0; s + 1 < ln.stops.size(); ++s)
        pairs.insert({ln.stops[s], ln.stops[s + 1]});
    }
  }
  if (pairs.empty()) {
    for (const Link& l : model.links)
      if (l.modes_allowed.count(k)) pairs.insert({l.from, l.to});
  }
  return {pairs.begin(), pairs.end()};
}

}  // namespace detail

inline StationPartition apply_disruption(const ScenarioModel& model,
                                         const DisruptionSpec& d) {
  validate_disruption(model, d);

  StationPartition part;
  part.disruption = d;
  for (const auto& pr : d.links) part.primary_pairs.insert(pr);

  for (const auto& [kind, idx] : model.mode_index) {
    (void)idx;
    ModePartition mp;
    for (const auto& [from, to] : detail::service_pairs(model, kind)) {
      const bool hit =
          kind == d.mode && part.primary_pairs.count({from, to}) > 0;
      if (hit) {
        mp.disrupted_origins.insert(from);
        mp.disrupted_destinations.insert(to);
      } else {
        mp.other_origins.insert(from);
        mp.other_destinations.insert(to);
      }
    }
    // Origins lose their "not disrupted" status once any of their links is
    // primarily disrupted.
    for (const std::string& s : mp.disrupted_origins)
      mp.other_origins.erase(s);
    part.per_mode.emplace(kind, std::move(mp));
  }

  for (const auto& [i, j] : d.links) {
    DisruptedPair p;
    p.i = i;
    p.j = j;
    p.volume = blocked_volume(model.demand, i, j, d.mode, d.start_s,
                              d.start_s + d.duration_s);
    part.od_pairs.push_back(std::move(p));
  }
  return part;
}

}  // namespace raas
