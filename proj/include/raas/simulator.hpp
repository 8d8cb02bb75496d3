#pragma once

// Deterministic discrete-event simulation of the multimodal network under a
// disruption and a reallocation plan.
//
// Mechanics:
//   - Scheduled lines run their timetable (departures every headway within
//     the service window). Passengers spawn from the demand profile, queue
//     at their boarding stop, board FIFO up to vehicle capacity, and ride.
//   - During the disruption window, a run reaching the severed link of its
//     mode short-turns there; passengers aboard (and those already queued at
//     the cut) are stranded. Auxiliary departures keep the line alive beyond
//     the gap for the duration of the window.
//   - Every stranded passenger draws once against the announced leaving
//     rate: leavers walk the gap and resume transit on the far side;
//     waiters queue for the plan's replacement vehicles.
//   - Replacement vehicles leave their dispatch point when the window opens,
//     drive their assigned path (same links the planner priced), dock at the
//     cut, load until full — or until the window closes — make one bridging
//     trip, and release their passengers to continue.
//   - Link travel times follow a polynomial volume-delay curve fed by the
//     vehicles that entered the link earlier in the same counting slice, so
//     an uncongested vehicle reproduces its free-flow time bit-for-bit.
//
// Everything is deterministic for a fixed scenario, plan and seed: event
// ties break on (priority, insertion order), passenger decisions are hashed
// from (seed, passenger index), and all reports serialize to stable bytes.

#include <cmath>
#include <deque>
#include <map>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "raas/optimizer.hpp"
#include "raas/routing.hpp"

namespace raas {

//==============================================================================
// Inputs
//==============================================================================

struct SimOptions {
  std::uint64_t seed = 1;
  double slice_s = 300.0;  // congestion counting slice
  bool trace = false;      // collect an event trace (NDJSON lines)
};

struct ReplacementSpec {
  std::string vehicle_id;
  ModeKind mode = ModeKind::Bus;
  int capacity = 0;
  int pair_index = 0;
  std::vector<int> path_to_i;  // link indices: dispatch point -> i
  std::vector<int> path_i_j;   // link indices: i -> j
};

// Everything the simulator needs to know about the disruption response.
struct DisruptionScenario {
  StationPartition part;
  std::map<int, double> announced_leaving;  // pair index -> leaving rate
  std::vector<ReplacementSpec> replacements;
};

// Bundle a solved plan for simulation.
inline DisruptionScenario make_disruption_scenario(
    const PreparedInstance& inst, const ReallocationPlan& plan,
    const StationPartition& part) {
  DisruptionScenario d;
  d.part = part;
  for (int pi = 0; pi < static_cast<int>(part.od_pairs.size()); ++pi)
    d.announced_leaving[pi] =
        plan.eval.pair_leaving.empty()
            ? 1.0 - inst.params.beta
            : plan.eval.pair_leaving[static_cast<std::size_t>(pi)];
  for (int ci : plan.selection) {
    const CandidateVehicle& c =
        inst.cands[static_cast<std::size_t>(ci)].base;
    ReplacementSpec spec;
    spec.vehicle_id = c.vehicle_id;
    spec.mode = c.mode;
    spec.capacity = c.capacity;
    spec.pair_index = c.pair_index;
    spec.path_to_i = c.path_to_i;
    spec.path_i_j = c.path_i_j;
    d.replacements.push_back(std::move(spec));
  }
  return d;
}

//==============================================================================
// Volume-delay curve
//==============================================================================

// Travel-time multiplier at an hourly volume v on a link of capacity c.
inline double vdf_factor(double volume_per_h, double capacity_veh_h) {
  const double r = volume_per_h / capacity_veh_h;
  return 1.0 + 0.15 * r * r * r * r;
}

//==============================================================================
// Outputs
//==============================================================================

struct AgentRecord {
  int index = 0;
  std::string origin, destination;
  ModeKind mode = ModeKind::Rail;
  double spawn_s = 0.0;
  double arrive_s = -1.0;  // -1: never completed
  double wait_s = 0.0;
  double ride_s = 0.0;
  double walk_s = 0.0;
  double dist_km = 0.0;  // ridden + walked
  bool stranded = false, left = false, bridged = false, completed = false;
};

struct ReplacementRecord {
  std::string vehicle_id;
  ModeKind mode = ModeKind::Bus;
  int pair_index = 0;
  int capacity = 0;
  double ta_sim_s = -1.0;    // accumulated drive time to the cut
  double depart_i_s = -1.0;
  double arrive_j_s = -1.0;
  int boarded = 0;
  int max_onboard = 0;
  bool retired_unused = false;  // docked after the window closed, or empty
};

struct RunRecord {
  std::string line;
  int run = 0;
  bool aux = false;
  bool short_turned = false;
  int max_onboard = 0;
  int capacity = 0;
};

struct KpiReport {
  std::vector<AgentRecord> agents;
  std::vector<ReplacementRecord> replacements;
  std::vector<RunRecord> runs;
  std::vector<std::string> trace;  // NDJSON lines when tracing

  int completed = 0, incomplete = 0;
  int stranded = 0, left = 0, waited = 0, bridged = 0;
  double mean_travel_s = 0.0, mean_wait_s = 0.0, mean_ride_s = 0.0,
         mean_walk_s = 0.0, mean_dist_km = 0.0;
  double leave_fraction = 0.0;  // left / stranded
  bool capacity_ok = true;
  double max_vdf_factor = 1.0;
  std::map<ModeKind, double> ta_sim_by_mode;  // mean over replacements

  std::string agents_csv() const {
    std::string out =
        "agent,origin,destination,mode,spawn_s,arrive_s,wait_s,ride_s,walk_s,"
        "dist_km,stranded,left,bridged,completed\n";
    for (const AgentRecord& a : agents)
      out += strf("%d,%s,%s,%s,%.3f,%.3f,%.3f,%.3f,%.3f,%.4f,%d,%d,%d,%d\n",
                  a.index, a.origin.c_str(), a.destination.c_str(),
                  to_string(a.mode), a.spawn_s, a.arrive_s, a.wait_s, a.ride_s,
                  a.walk_s, a.dist_km, a.stranded ? 1 : 0, a.left ? 1 : 0,
                  a.bridged ? 1 : 0, a.completed ? 1 : 0);
    return out;
  }

  ordered_json to_json() const {
    ordered_json j;
    j["agents"] = static_cast<int>(agents.size());
    j["completed"] = completed;
    j["incomplete"] = incomplete;
    j["mean_travel_s"] = mean_travel_s;
    j["mean_wait_s"] = mean_wait_s;
    j["mean_ride_s"] = mean_ride_s;
    j["mean_walk_s"] = mean_walk_s;
    j["mean_dist_km"] = mean_dist_km;
    j["stranded"] = stranded;
    j["left"] = left;
    j["waited"] = waited;
    j["bridged"] = bridged;
    j["leave_fraction"] = leave_fraction;
    j["capacity_ok"] = capacity_ok;
    j["max_vdf_factor"] = max_vdf_factor;
    ordered_json jta = ordered_json::object();
    for (const auto& [mode, ta] : ta_sim_by_mode) jta[to_string(mode)] = ta;
    j["ta_sim_by_mode"] = std::move(jta);
    ordered_json jr = ordered_json::array();
    for (const ReplacementRecord& r : replacements)
      jr.push_back(ordered_json{{"vehicle", r.vehicle_id},
                                {"mode", to_string(r.mode)},
                                {"pair", r.pair_index},
                                {"capacity", r.capacity},
                                {"ta_sim_s", r.ta_sim_s},
                                {"depart_i_s", r.depart_i_s},
                                {"arrive_j_s", r.arrive_j_s},
                                {"boarded", r.boarded},
                                {"max_onboard", r.max_onboard},
                                {"retired_unused", r.retired_unused}});
    j["replacements"] = std::move(jr);
    int n_short = 0, n_aux = 0;
    for (const RunRecord& r : runs) {
      n_short += r.short_turned ? 1 : 0;
      n_aux += r.aux ? 1 : 0;
    }
    j["runs"] = ordered_json{{"count", static_cast<int>(runs.size())},
                             {"short_turned", n_short},
                             {"aux", n_aux}};
    return j;
  }
};

//==============================================================================
// Engine
//==============================================================================

namespace detail {

enum class Ev : int {
  WindowStart = 0,
  WindowEnd = 1,
  Spawn = 2,
  WalkDone = 3,
  ReplHop = 4,
  PrivateHop = 5,
  RunStop = 6,
};

inline int ev_priority(Ev kind) {
  switch (kind) {
    case Ev::WindowStart: return 0;
    case Ev::WindowEnd: return 1;
    case Ev::Spawn: return 2;
    case Ev::WalkDone: return 2;
    case Ev::ReplHop: return 3;
    case Ev::PrivateHop: return 3;
    case Ev::RunStop: return 4;
  }
  return 9;
}

struct Event {
  double t = 0.0;
  int prio = 0;
  long long seq = 0;
  Ev kind = Ev::Spawn;
  int a = -1;  // agent / run / replacement index

  bool operator>(const Event& o) const {
    if (t != o.t) return t > o.t;
    if (prio != o.prio) return prio > o.prio;
    return seq > o.seq;
  }
};

struct LinkFlow {
  long long slice = -1;
  int count = 0;
};

class Simulator {
 public:
  Simulator(const ScenarioModel& model, const SimOptions& opt,
            const DisruptionScenario* dis)
      : model_(model), opt_(opt), dis_(dis), graph_(model) {}

  KpiReport run() {
    prepare();
    while (!events_.empty()) {
      const Event ev = events_.top();
      events_.pop();
      if (ev.t > horizon_) break;
      dispatch(ev);
    }
    return finish();
  }

 private:
  //---- static data -----------------------------------------------------------

  struct Agent {
    AgentRecord rec;
    int origin_st = -1, dest_st = -1;
    int line = -1;                 // scheduled itinerary
    std::vector<int> private_path; // non-scheduled direct ride
    std::size_t ppos = 0;
    double queue_join_s = -1.0, board_s = -1.0;
    double board_dist_km = 0.0;  // run odometer at boarding
    int walk_target = -1;
    bool routable = true;
  };

  struct Run {
    RunRecord rec;
    int line = -1;
    std::vector<int> stops;  // station indices actually served
    std::size_t pos = 0;
    std::vector<int> onboard;
    double dist_km = 0.0;  // odometer along the itinerary
    bool done = false;
  };

  struct Repl {
    ReplacementRecord rec;
    const ReplacementSpec* spec = nullptr;
    double ta_accum = 0.0;
    std::size_t pos = 0;
    double bridge_km = 0.0;
    int phase = 0;  // 0 approach, 1 docked, 2 bridging, 3 done
    std::vector<int> onboard;
  };

  struct PairInfo {
    int i_st = -1, j_st = -1;
    std::vector<int> walk_path;  // gap bypass on foot
    double walk_s = 0.0;
    double walk_km = 0.0;
    bool walkable = false;
  };

  const ScenarioModel& model_;
  SimOptions opt_;
  const DisruptionScenario* dis_;
  LinkGraph graph_;

  std::vector<Agent> agents_;
  std::vector<Run> runs_;
  std::vector<Repl> repls_;
  std::vector<PairInfo> pairs_;
  std::map<int, int> pair_by_i_;          // station index -> pair index
  std::vector<std::vector<int>> line_stops_;  // per line, station indices
  std::vector<int> line_cut_;  // per line: first severed stop position, -1

  std::priority_queue<Event, std::vector<Event>, std::greater<Event>> events_;
  long long seq_ = 0;
  double horizon_ = 0.0;
  double win_start_ = 0.0, win_end_ = -1.0;
  bool window_active_ = false, window_over_ = false;

  std::map<std::pair<int, int>, std::deque<int>> line_queue_;  // (line, st)
  std::vector<std::deque<int>> bridge_queue_;                  // per pair
  std::vector<std::vector<int>> docked_;                       // per pair
  std::vector<LinkFlow> flow_;
  double max_factor_ = 1.0;
  std::vector<std::string> trace_;

  //---- helpers ---------------------------------------------------------------

  void push_event(double t, Ev kind, int a) {
    events_.push(Event{t, ev_priority(kind), seq_++, kind, a});
  }

  void note(double t, const std::string& line) {
    if (opt_.trace)
      trace_.push_back(strf("{\"t\":%.3f,%s}", t, line.c_str()));
  }

  const Station& station(int idx) const {
    return model_.stations[static_cast<std::size_t>(idx)];
  }

  // VDF-adjusted traversal seconds for a vehicle entering `link_idx` at `t`.
  // Vehicles already counted in the current slice slow this one down; the
  // vehicle itself is counted afterwards, so the first entrant of a slice
  // drives exactly at free flow.
  double enter_link(int link_idx, double t, double mode_speed_kmh) {
    const Link& l = model_.links[static_cast<std::size_t>(link_idx)];
    LinkFlow& f = flow_[static_cast<std::size_t>(link_idx)];
    const auto slice = static_cast<long long>(std::floor(t / opt_.slice_s));
    if (slice != f.slice) {
      f.slice = slice;
      f.count = 0;
    }
    const double hourly = f.count * (3600.0 / opt_.slice_s);
    const double factor = vdf_factor(hourly, l.capacity_veh_h);
    f.count += 1;
    max_factor_ = std::max(max_factor_, factor);
    const double veff = std::min(mode_speed_kmh, l.free_flow_speed_kmh);
    return 3600.0 * l.length_km / veff * factor;
  }

  bool link_severed(int from_st, int to_st, ModeKind mode, double t) const {
    if (!dis_ || mode != dis_->part.disruption.mode) return false;
    if (!(t >= win_start_ && t < win_end_)) return false;
    return dis_->part.primary_pairs.count(
               {station(from_st).id, station(to_st).id}) > 0;
  }

  //---- preparation -----------------------------------------------------------

  void prepare() {
    flow_.assign(model_.links.size(), LinkFlow{});
    double last_time = 0.0;

    if (dis_) {
      win_start_ = dis_->part.disruption.start_s;
      win_end_ = win_start_ + dis_->part.disruption.duration_s;
      push_event(win_start_, Ev::WindowStart, -1);
      push_event(win_end_, Ev::WindowEnd, -1);
      last_time = std::max(last_time, win_end_);

      pairs_.resize(dis_->part.od_pairs.size());
      bridge_queue_.resize(pairs_.size());
      docked_.resize(pairs_.size());
      for (int pi = 0; pi < static_cast<int>(pairs_.size()); ++pi) {
        const DisruptedPair& pr =
            dis_->part.od_pairs[static_cast<std::size_t>(pi)];
        PairInfo& info = pairs_[static_cast<std::size_t>(pi)];
        info.i_st = model_.station_index.at(pr.i);
        info.j_st = model_.station_index.at(pr.j);
        pair_by_i_.emplace(info.i_st, pi);
        const PathResult walk =
            graph_.dijkstra(info.i_st, info.j_st, [&](const Link& l) {
              const bool walkable = l.modes_allowed.count(ModeKind::Bus) ||
                                    l.modes_allowed.count(ModeKind::Taxi) ||
                                    l.modes_allowed.count(ModeKind::Van);
              return walkable ? l.length_km : -1.0;
            });
        if (walk.found) {
          info.walkable = true;
          info.walk_path = walk.link_path;
          for (int li : walk.link_path) {
            const double km =
                model_.links[static_cast<std::size_t>(li)].length_km;
            info.walk_s += 3600.0 * km / kWalkSpeedKmh;
            info.walk_km += km;
          }
        }
      }

      for (const ReplacementSpec& spec : dis_->replacements) {
        Repl r;
        r.spec = &spec;
        for (int li : spec.path_i_j)
          r.bridge_km += model_.links[static_cast<std::size_t>(li)].length_km;
        r.rec.vehicle_id = spec.vehicle_id;
        r.rec.mode = spec.mode;
        r.rec.pair_index = spec.pair_index;
        r.rec.capacity = spec.capacity;
        repls_.push_back(std::move(r));
      }
      for (int ri = 0; ri < static_cast<int>(repls_.size()); ++ri)
        push_event(win_start_, Ev::ReplHop, ri);
    }

    // Timetabled runs, including short-turn-complement departures beyond the
    // gap during the window.
    line_stops_.resize(model_.lines.size());
    line_cut_.assign(model_.lines.size(), -1);
    for (int li = 0; li < static_cast<int>(model_.lines.size()); ++li) {
      const TransitLine& ln = model_.lines[static_cast<std::size_t>(li)];
      std::vector<int> stop_idx;
      for (const std::string& s : ln.stops)
        stop_idx.push_back(model_.station_index.at(s));
      if (dis_ && ln.mode == dis_->part.disruption.mode)
        for (std::size_t s = 0;
             s + 1 < stop_idx.size() && line_cut_[static_cast<std::size_t>(li)] < 0;
             ++s)
          if (dis_->part.primary_pairs.count({ln.stops[s], ln.stops[s + 1]}) > 0)
            line_cut_[static_cast<std::size_t>(li)] = static_cast<int>(s);
      line_stops_[static_cast<std::size_t>(li)] = stop_idx;
      const double headway_s = ln.headway_min * 60.0;
      int k = 0;
      for (double t = ln.service_start_s; t < ln.service_end_s;
           t += headway_s, ++k) {
        Run r;
        r.rec.line = ln.id;
        r.rec.run = k;
        r.rec.capacity = model_.mode_def(ln.mode).capacity;
        r.line = li;
        r.stops = stop_idx;
        runs_.push_back(std::move(r));
        push_event(t, Ev::RunStop, static_cast<int>(runs_.size()) - 1);
        last_time = std::max(last_time, t);
      }
      last_time = std::max(last_time, static_cast<double>(ln.service_end_s));

      if (dis_ && ln.mode == dis_->part.disruption.mode) {
        const int cut = line_cut_[static_cast<std::size_t>(li)];
        if (cut >= 0 && cut + 2 < static_cast<int>(stop_idx.size())) {
          // Departures from beyond the gap while the window lasts.
          std::vector<int> tail(stop_idx.begin() + cut + 1, stop_idx.end());
          int ak = 0;
          for (double t = win_start_; t < win_end_; t += headway_s, ++ak) {
            Run r;
            r.rec.line = ln.id;
            r.rec.run = ak;
            r.rec.aux = true;
            r.rec.capacity = model_.mode_def(ln.mode).capacity;
            r.line = li;
            r.stops = tail;
            runs_.push_back(std::move(r));
            push_event(t, Ev::RunStop, static_cast<int>(runs_.size()) - 1);
          }
        }
      }
    }

    // Passengers.
    for (int ei = 0; ei < static_cast<int>(model_.demand.entries.size());
         ++ei) {
      const DemandEntry& e =
          model_.demand.entries[static_cast<std::size_t>(ei)];
      const int o = model_.station_index.at(e.origin);
      const int d = model_.station_index.at(e.destination);

      int line = -1;
      std::vector<int> private_path;
      bool routable = false;
      if (is_scheduled_mode(e.mode)) {
        int best_hops = 0;
        for (int li = 0; li < static_cast<int>(model_.lines.size()); ++li) {
          const TransitLine& ln = model_.lines[static_cast<std::size_t>(li)];
          if (ln.mode != e.mode) continue;
          int po = -1, pd = -1;
          for (int s = 0; s < static_cast<int>(ln.stops.size()); ++s) {
            if (ln.stops[static_cast<std::size_t>(s)] == e.origin && po < 0)
              po = s;
            if (ln.stops[static_cast<std::size_t>(s)] == e.destination)
              pd = s;
          }
          if (po >= 0 && pd > po && (line < 0 || pd - po < best_hops)) {
            line = li;
            best_hops = pd - po;
          }
        }
        routable = line >= 0;
      } else {
        const PathResult path = graph_.shortest_path(o, d, e.mode);
        if (path.found) {
          private_path = path.link_path;
          routable = true;
        }
      }

      for (const DemandBin& b : e.bins) {
        const double dur = b.end_s - b.start_s;
        const int n =
            static_cast<int>(round_half_up(b.rate_per_h * dur / 3600.0));
        for (int a = 0; a < n; ++a) {
          Agent ag;
          ag.rec.index = static_cast<int>(agents_.size());
          ag.rec.origin = e.origin;
          ag.rec.destination = e.destination;
          ag.rec.mode = e.mode;
          ag.rec.spawn_s = b.start_s + (a + 0.5) * dur / n;
          ag.origin_st = o;
          ag.dest_st = d;
          ag.line = line;
          ag.private_path = private_path;
          ag.routable = routable;
          agents_.push_back(std::move(ag));
          push_event(agents_.back().rec.spawn_s, Ev::Spawn,
                     agents_.back().rec.index);
          last_time = std::max(last_time, agents_.back().rec.spawn_s);
        }
      }
    }

    horizon_ = last_time + 48.0 * 3600.0;
  }

  //---- event handlers --------------------------------------------------------

  void dispatch(const Event& ev) {
    switch (ev.kind) {
      case Ev::WindowStart: return on_window_start(ev.t);
      case Ev::WindowEnd: return on_window_end(ev.t);
      case Ev::Spawn: return on_spawn(ev.t, ev.a);
      case Ev::WalkDone: return on_walk_done(ev.t, ev.a);
      case Ev::ReplHop: return on_repl_hop(ev.t, ev.a);
      case Ev::PrivateHop: return on_private_hop(ev.t, ev.a);
      case Ev::RunStop: return on_run_stop(ev.t, ev.a);
    }
  }

  void on_window_start(double t) {
    window_active_ = true;
    // Passengers already queued right at a cut cannot be served by their
    // line any more; they face the leave-or-wait decision immediately.
    for (auto& [key, q] : line_queue_) {
      const auto& [line, st] = key;
      const int cut = line_cut_[static_cast<std::size_t>(line)];
      if (cut < 0 || line_stops_[static_cast<std::size_t>(line)]
                             [static_cast<std::size_t>(cut)] != st)
        continue;
      auto it = pair_by_i_.find(st);
      if (it == pair_by_i_.end()) continue;
      std::deque<int> keep;
      for (int ai : q) {
        Agent& ag = agents_[static_cast<std::size_t>(ai)];
        // Only those who must cross the gap strand; the wait they have
        // already put in carries over.
        if (crosses_cut(ag))
          strand(ai, it->second, t, /*keep_join=*/true);
        else
          keep.push_back(ai);
      }
      q = std::move(keep);
    }
  }

  void on_window_end(double t) {
    window_active_ = false;
    window_over_ = true;
    for (int pi = 0; pi < static_cast<int>(pairs_.size()); ++pi) {
      // Loaded replacements leave with what they have; empty ones retire.
      std::vector<int> still = docked_[static_cast<std::size_t>(pi)];
      for (int ri : still) {
        Repl& r = repls_[static_cast<std::size_t>(ri)];
        if (!r.onboard.empty()) {
          depart_bridge(ri, t);
        } else {
          r.phase = 3;
          r.rec.retired_unused = true;
          note(t, strf("\"ev\":\"retire\",\"veh\":\"%s\"",
                       r.rec.vehicle_id.c_str()));
        }
      }
      docked_[static_cast<std::size_t>(pi)].clear();
      // Unserved waiters fall back to the regular timetable, which crosses
      // the gap again once the window is over.
      std::deque<int>& bq = bridge_queue_[static_cast<std::size_t>(pi)];
      const int i_st = pairs_[static_cast<std::size_t>(pi)].i_st;
      for (int ai : bq) {
        Agent& ag = agents_[static_cast<std::size_t>(ai)];
        line_queue_[{ag.line, i_st}].push_back(ai);
      }
      bq.clear();
    }
  }

  void on_spawn(double t, int ai) {
    Agent& ag = agents_[static_cast<std::size_t>(ai)];
    if (!ag.routable) return;  // counted as incomplete at the end
    if (!is_scheduled_mode(ag.rec.mode)) {
      ag.ppos = 0;
      push_event(t, Ev::PrivateHop, ai);
      return;
    }
    // A passenger spawning right at a cut during the window strands now.
    if (window_active_ && ag.line >= 0) {
      const int cut = line_cut_[static_cast<std::size_t>(ag.line)];
      if (cut >= 0 &&
          line_stops_[static_cast<std::size_t>(ag.line)]
                     [static_cast<std::size_t>(cut)] == ag.origin_st &&
          crosses_cut(ag)) {
        ag.queue_join_s = t;
        strand(ai, pair_by_i_.at(ag.origin_st), t, /*keep_join=*/true);
        return;
      }
    }
    join_line_queue(ai, ag.origin_st, t);
  }

  void on_walk_done(double t, int ai) {
    Agent& ag = agents_[static_cast<std::size_t>(ai)];
    if (ag.walk_target == ag.dest_st) {
      complete(ai, t);
      return;
    }
    join_line_queue(ai, ag.walk_target, t);
  }

  void on_repl_hop(double t, int ri) {
    Repl& r = repls_[static_cast<std::size_t>(ri)];
    const ModeKind mode = r.spec->mode;
    const double speed = model_.mode_def(mode).speed_kmh;
    if (r.phase == 0) {
      if (r.pos < r.spec->path_to_i.size()) {
        const int li = r.spec->path_to_i[r.pos++];
        const double dt = enter_link(li, t, speed);
        r.ta_accum += dt;
        push_event(t + dt, Ev::ReplHop, ri);
        return;
      }
      r.rec.ta_sim_s = r.ta_accum;
      if (window_over_ || t >= win_end_) {
        r.phase = 3;
        r.rec.retired_unused = true;
        return;
      }
      r.phase = 1;
      docked_[static_cast<std::size_t>(r.spec->pair_index)].push_back(ri);
      note(t, strf("\"ev\":\"dock\",\"veh\":\"%s\",\"ta\":%.3f",
                   r.rec.vehicle_id.c_str(), r.ta_accum));
      board_bridge(r.spec->pair_index, t);
      return;
    }
    if (r.phase == 2) {
      if (r.pos < r.spec->path_i_j.size()) {
        const int li = r.spec->path_i_j[r.pos++];
        const double dt = enter_link(li, t, speed);
        push_event(t + dt, Ev::ReplHop, ri);
        return;
      }
      arrive_bridge(ri, t);
    }
  }

  void on_private_hop(double t, int ai) {
    Agent& ag = agents_[static_cast<std::size_t>(ai)];
    if (ag.ppos < ag.private_path.size()) {
      const int li = ag.private_path[ag.ppos++];
      const double dt =
          enter_link(li, t, model_.mode_def(ag.rec.mode).speed_kmh);
      ag.rec.ride_s += dt;
      ag.rec.dist_km += model_.links[static_cast<std::size_t>(li)].length_km;
      push_event(t + dt, Ev::PrivateHop, ai);
      return;
    }
    complete(ai, t);
  }

  void on_run_stop(double t, int ridx) {
    Run& run = runs_[static_cast<std::size_t>(ridx)];
    const TransitLine& ln = model_.lines[static_cast<std::size_t>(run.line)];
    const int st = run.stops[run.pos];

    // Alight finishers.
    std::vector<int> staying;
    for (int ai : run.onboard) {
      Agent& ag = agents_[static_cast<std::size_t>(ai)];
      if (ag.dest_st == st) {
        ag.rec.ride_s += t - ag.board_s;
        ag.rec.dist_km += run.dist_km - ag.board_dist_km;
        note(t, strf("\"ev\":\"alight\",\"agent\":%d,\"veh\":\"%s#%d\"",
                     ag.rec.index, run.rec.line.c_str(), run.rec.run));
        complete(ai, t);
      } else {
        staying.push_back(ai);
      }
    }
    run.onboard = std::move(staying);

    const bool terminal = run.pos + 1 >= run.stops.size();
    if (!terminal &&
        link_severed(st, run.stops[run.pos + 1], ln.mode, t)) {
      // Short turn: everyone still aboard is stranded at the cut.
      run.rec.short_turned = true;
      run.done = true;
      auto it = pair_by_i_.find(st);
      for (int ai : run.onboard) {
        Agent& ag = agents_[static_cast<std::size_t>(ai)];
        ag.rec.ride_s += t - ag.board_s;
        ag.rec.dist_km += run.dist_km - ag.board_dist_km;
        note(t, strf("\"ev\":\"alight\",\"agent\":%d,\"veh\":\"%s#%d\"",
                     ag.rec.index, run.rec.line.c_str(), run.rec.run));
        if (it != pair_by_i_.end()) {
          ag.queue_join_s = t;
          strand(ai, it->second, t, /*keep_join=*/true);
        }
      }
      run.onboard.clear();
      note(t, strf("\"ev\":\"short_turn\",\"line\":\"%s\",\"run\":%d",
                   ln.id.c_str(), run.rec.run));
      return;
    }

    if (terminal) {
      run.done = true;
      return;
    }

    // Board FIFO up to capacity.
    std::deque<int>& q = line_queue_[{run.line, st}];
    while (!q.empty() &&
           static_cast<int>(run.onboard.size()) < run.rec.capacity) {
      const int ai = q.front();
      q.pop_front();
      Agent& ag = agents_[static_cast<std::size_t>(ai)];
      ag.rec.wait_s += t - ag.queue_join_s;
      ag.board_s = t;
      ag.board_dist_km = run.dist_km;
      run.onboard.push_back(ai);
      note(t, strf("\"ev\":\"board\",\"agent\":%d,\"veh\":\"%s#%d\","
                   "\"cap\":%d",
                   ag.rec.index, run.rec.line.c_str(), run.rec.run,
                   run.rec.capacity));
    }
    run.rec.max_onboard =
        std::max(run.rec.max_onboard, static_cast<int>(run.onboard.size()));

    const Link* link = model_.find_link(station(st).id,
                                        station(run.stops[run.pos + 1]).id,
                                        ln.mode);
    const double dt = enter_link(
        static_cast<int>(link - model_.links.data()), t,
        model_.mode_def(ln.mode).speed_kmh);
    run.dist_km += link->length_km;
    run.pos += 1;
    push_event(t + dt, Ev::RunStop, ridx);
  }

  //---- passenger & bridge logic ---------------------------------------------

  // True when the passenger's itinerary continues past the severed link of
  // their line (destination lies beyond the cut position).
  bool crosses_cut(const Agent& ag) const {
    if (ag.line < 0) return false;
    const int cut = line_cut_[static_cast<std::size_t>(ag.line)];
    if (cut < 0) return false;
    const std::vector<int>& stops = line_stops_[static_cast<std::size_t>(ag.line)];
    for (int s = cut + 1; s < static_cast<int>(stops.size()); ++s)
      if (stops[static_cast<std::size_t>(s)] == ag.dest_st) return true;
    return false;
  }

  void join_line_queue(int ai, int st, double t) {
    Agent& ag = agents_[static_cast<std::size_t>(ai)];
    ag.queue_join_s = t;
    line_queue_[{ag.line, st}].push_back(ai);
  }

  void strand(int ai, int pi, double t, bool keep_join) {
    Agent& ag = agents_[static_cast<std::size_t>(ai)];
    ag.rec.stranded = true;
    const double u = hash_uniform(opt_.seed,
                                  static_cast<std::uint64_t>(ag.rec.index));
    const double announced = dis_->announced_leaving.count(pi)
                                 ? dis_->announced_leaving.at(pi)
                                 : 1.0;
    const PairInfo& info = pairs_[static_cast<std::size_t>(pi)];
    if (u < announced && info.walkable) {
      // Whatever platform wait they had already put in still counts.
      if (keep_join && ag.queue_join_s >= 0.0)
        ag.rec.wait_s += t - ag.queue_join_s;
      ag.rec.left = true;
      ag.walk_target = info.j_st;
      ag.rec.walk_s += info.walk_s;
      ag.rec.dist_km += info.walk_km;
      note(t, strf("\"ev\":\"leave\",\"agent\":%d", ag.rec.index));
      push_event(t + info.walk_s, Ev::WalkDone, ai);
      return;
    }
    if (!keep_join || ag.queue_join_s < 0.0) ag.queue_join_s = t;
    bridge_queue_[static_cast<std::size_t>(pi)].push_back(ai);
    note(t, strf("\"ev\":\"wait\",\"agent\":%d", ag.rec.index));
    board_bridge(pi, t);
  }

  void board_bridge(int pi, double t) {
    std::deque<int>& q = bridge_queue_[static_cast<std::size_t>(pi)];
    std::vector<int>& dock = docked_[static_cast<std::size_t>(pi)];
    std::size_t di = 0;
    while (!q.empty() && di < dock.size()) {
      Repl& r = repls_[static_cast<std::size_t>(dock[di])];
      if (static_cast<int>(r.onboard.size()) >= r.spec->capacity) {
        ++di;
        continue;
      }
      const int ai = q.front();
      q.pop_front();
      Agent& ag = agents_[static_cast<std::size_t>(ai)];
      ag.rec.wait_s += t - ag.queue_join_s;
      ag.board_s = t;
      ag.rec.bridged = true;
      r.onboard.push_back(ai);
      note(t, strf("\"ev\":\"board\",\"agent\":%d,\"veh\":\"%s\","
                   "\"cap\":%d",
                   ag.rec.index, r.rec.vehicle_id.c_str(),
                   r.spec->capacity));
      r.rec.boarded += 1;
      r.rec.max_onboard =
          std::max(r.rec.max_onboard, static_cast<int>(r.onboard.size()));
      if (static_cast<int>(r.onboard.size()) >= r.spec->capacity) {
        const int ri = dock[di];
        dock.erase(dock.begin() + static_cast<long>(di));
        depart_bridge(ri, t);
      }
    }
  }

  void depart_bridge(int ri, double t) {
    Repl& r = repls_[static_cast<std::size_t>(ri)];
    r.phase = 2;
    r.pos = 0;
    r.rec.depart_i_s = t;
    note(t, strf("\"ev\":\"bridge_depart\",\"veh\":\"%s\",\"load\":%d",
                 r.rec.vehicle_id.c_str(),
                 static_cast<int>(r.onboard.size())));
    push_event(t, Ev::ReplHop, ri);
  }

  void arrive_bridge(int ri, double t) {
    Repl& r = repls_[static_cast<std::size_t>(ri)];
    r.phase = 3;
    r.rec.arrive_j_s = t;
    const PairInfo& info =
        pairs_[static_cast<std::size_t>(r.spec->pair_index)];
    for (int ai : r.onboard) {
      Agent& ag = agents_[static_cast<std::size_t>(ai)];
      ag.rec.ride_s += t - ag.board_s;
      ag.rec.dist_km += r.bridge_km;
      note(t, strf("\"ev\":\"alight\",\"agent\":%d,\"veh\":\"%s\"",
                   ag.rec.index, r.rec.vehicle_id.c_str()));
      if (ag.dest_st == info.j_st)
        complete(ai, t);
      else
        join_line_queue(ai, info.j_st, t);
    }
    r.onboard.clear();
    note(t, strf("\"ev\":\"bridge_arrive\",\"veh\":\"%s\"",
                 r.rec.vehicle_id.c_str()));
  }

  void complete(int ai, double t) {
    Agent& ag = agents_[static_cast<std::size_t>(ai)];
    ag.rec.arrive_s = t;
    ag.rec.completed = true;
  }

  //---- wrap-up ---------------------------------------------------------------

  KpiReport finish() {
    KpiReport rep;
    rep.trace = std::move(trace_);
    double sum_tt = 0, sum_wait = 0, sum_ride = 0, sum_walk = 0, sum_km = 0;
    for (Agent& ag : agents_) {
      const AgentRecord& a = ag.rec;
      if (a.completed) {
        rep.completed += 1;
        sum_tt += a.arrive_s - a.spawn_s;
        sum_wait += a.wait_s;
        sum_ride += a.ride_s;
        sum_walk += a.walk_s;
        sum_km += a.dist_km;
      } else {
        rep.incomplete += 1;
      }
      rep.stranded += a.stranded ? 1 : 0;
      rep.left += a.left ? 1 : 0;
      rep.bridged += a.bridged ? 1 : 0;
      rep.agents.push_back(ag.rec);
    }
    rep.waited = rep.stranded - rep.left;
    if (rep.completed > 0) {
      rep.mean_travel_s = sum_tt / rep.completed;
      rep.mean_wait_s = sum_wait / rep.completed;
      rep.mean_ride_s = sum_ride / rep.completed;
      rep.mean_walk_s = sum_walk / rep.completed;
      rep.mean_dist_km = sum_km / rep.completed;
    }
    if (rep.stranded > 0)
      rep.leave_fraction = static_cast<double>(rep.left) / rep.stranded;

    for (Run& r : runs_) {
      if (r.rec.max_onboard > r.rec.capacity) rep.capacity_ok = false;
      rep.runs.push_back(r.rec);
    }
    std::map<ModeKind, std::pair<double, int>> ta;
    for (Repl& r : repls_) {
      if (r.rec.max_onboard > r.rec.capacity) rep.capacity_ok = false;
      if (r.rec.ta_sim_s >= 0.0) {
        auto& [sum, n] = ta[r.rec.mode];
        sum += r.rec.ta_sim_s;
        n += 1;
      }
      rep.replacements.push_back(r.rec);
    }
    for (const auto& [mode, acc] : ta)
      rep.ta_sim_by_mode[mode] = acc.first / acc.second;
    rep.max_vdf_factor = max_factor_;
    return rep;
  }
};

}  // namespace detail

inline KpiReport simulate(const ScenarioModel& model, const SimOptions& opt,
                          const DisruptionScenario* dis = nullptr) {
  detail::Simulator sim(model, opt, dis);
  return sim.run();
}

}  // namespace raas
