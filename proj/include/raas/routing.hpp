#pragma once

// Shortest paths on the station/link graph. Dispatch routing is
// distance-weighted on the subgraph of links permitting a given mode;
// passenger re-planning uses a generalized-time weight (ride speeds on
// served lines, walking everywhere else).

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "raas/scenario.hpp"

namespace raas {

constexpr double kWalkSpeedKmh = 4.8;

struct PathResult {
  bool found = false;
  double distance_km = 0.0;
  std::vector<int> link_path;  // link indices in traversal order
};

// Adjacency over links; rebuilt cheaply per scenario.
class LinkGraph {
 public:
  explicit LinkGraph(const ScenarioModel& model) : model_(&model) {
    out_.assign(model.stations.size(), {});
    for (int li = 0; li < static_cast<int>(model.links.size()); ++li) {
      const Link& l = model.links[static_cast<std::size_t>(li)];
      out_[static_cast<std::size_t>(model.station_index.at(l.from))]
          .push_back(li);
    }
  }

  // Distance-shortest path using only links that permit `mode`.
  // Deterministic: ties broken by smaller predecessor link index.
  PathResult shortest_path(int from_station, int to_station,
                           ModeKind mode) const {
    return dijkstra(from_station, to_station, [&](const Link& l) {
      return l.modes_allowed.count(mode) ? l.length_km : -1.0;
    });
  }

  // Generic weighted search; `weight(link)` < 0 means "not traversable".
  template <typename WeightFn>
  PathResult dijkstra(int from_station, int to_station, WeightFn weight) const {
    const std::size_t n = model_->stations.size();
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(n, kInf);
    std::vector<int> pred_link(n, -1);
    using Item = std::pair<double, int>;  // (dist, station)
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    dist[static_cast<std::size_t>(from_station)] = 0.0;
    pq.push({0.0, from_station});
    while (!pq.empty()) {
      auto [d, u] = pq.top();
      pq.pop();
      if (d > dist[static_cast<std::size_t>(u)]) continue;
      if (u == to_station) break;
      for (int li : out_[static_cast<std::size_t>(u)]) {
        const Link& l = model_->links[static_cast<std::size_t>(li)];
        const double w = weight(l);
        if (w < 0.0) continue;
        const int v = model_->station_index.at(l.to);
        const double nd = d + w;
        auto& dv = dist[static_cast<std::size_t>(v)];
        if (nd < dv || (nd == dv && li < pred_link[static_cast<std::size_t>(v)])) {
          dv = nd;
          pred_link[static_cast<std::size_t>(v)] = li;
          pq.push({nd, v});
        }
      }
    }
    PathResult r;
    if (dist[static_cast<std::size_t>(to_station)] == kInf) return r;
    r.found = true;
    for (int v = to_station; v != from_station;) {
      const int li = pred_link[static_cast<std::size_t>(v)];
      r.link_path.push_back(li);
      v = model_->station_index.at(
          model_->links[static_cast<std::size_t>(li)].from);
    }
    std::reverse(r.link_path.begin(), r.link_path.end());
    // Accumulate length in traversal order so downstream per-link sums
    // reproduce the same floating-point value.
    for (int li : r.link_path)
      r.distance_km += model_->links[static_cast<std::size_t>(li)].length_km;
    return r;
  }

  const ScenarioModel& model() const { return *model_; }

 private:
  const ScenarioModel* model_;
  std::vector<std::vector<int>> out_;
};

// Nearest station by Euclidean distance on planar coordinates; ties go to
// the smaller station index.
inline int nearest_station(const ScenarioModel& model, double x, double y) {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(model.stations.size()); ++i) {
    const Station& s = model.stations[static_cast<std::size_t>(i)];
    const double dx = s.x - x, dy = s.y - y;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  return best;
}

}  // namespace raas
