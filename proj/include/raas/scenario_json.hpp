#pragma once

// Scenario (de)serialization. The file format is strict: unknown keys are
// rejected, `schema_version` is required, durations are integer seconds,
// distances are kilometres (written with 3 decimals), rates are per hour.
// load(save(load(f))) is the identity on both the model and the bytes.

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "raas/scenario.hpp"

namespace raas {

using ordered_json = nlohmann::ordered_json;

namespace detail {

inline void check_keys(const ordered_json& obj, const char* where,
                       std::initializer_list<const char*> allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) { ok = true; break; }
    if (!ok)
      throw ParseError(std::string(where) + ": unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get_req(const ordered_json& obj, const char* where, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(std::string(where) + ": missing key '" + key + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string(where) + "." + key + ": " + e.what());
  }
}

inline ModeKind get_mode(const ordered_json& obj, const char* where,
                         const char* key) {
  const std::string s = get_req<std::string>(obj, where, key);
  ModeKind k;
  if (!mode_from_string(s, k))
    throw ParseError(std::string(where) + "." + key + ": unknown mode '" + s +
                     "'");
  return k;
}

// Kilometre fields are stored with 3 decimals; round on write so a
// save/load cycle is byte-stable.
inline double km3(double v) { return std::round(v * 1000.0) / 1000.0; }

}  // namespace detail

//==============================================================================
// Parsing
//==============================================================================

inline ScenarioModel scenario_from_json(const ordered_json& j) {
  using detail::check_keys;
  using detail::get_mode;
  using detail::get_req;

  if (!j.is_object()) throw ParseError("scenario: root must be an object");
  check_keys(j, "scenario",
             {"schema_version", "stations", "links", "modes", "lines",
              "vehicles", "demand", "cost_params"});

  ScenarioModel m;
  m.schema_version = get_req<int>(j, "scenario", "schema_version");

  for (const auto& js : get_req<ordered_json>(j, "scenario", "stations")) {
    check_keys(js, "station", {"id", "name", "x", "y"});
    Station s;
    s.id = get_req<std::string>(js, "station", "id");
    if (js.contains("name")) s.name = js["name"].get<std::string>();
    s.x = get_req<double>(js, "station", "x");
    s.y = get_req<double>(js, "station", "y");
    m.stations.push_back(std::move(s));
  }

  for (const auto& jl : get_req<ordered_json>(j, "scenario", "links")) {
    check_keys(jl, "link",
               {"id", "from", "to", "length_km", "free_flow_speed_kmh",
                "capacity_veh_h", "modes"});
    Link l;
    l.id = get_req<std::string>(jl, "link", "id");
    l.from = get_req<std::string>(jl, "link", "from");
    l.to = get_req<std::string>(jl, "link", "to");
    l.length_km = get_req<double>(jl, "link", "length_km");
    l.free_flow_speed_kmh = get_req<double>(jl, "link", "free_flow_speed_kmh");
    l.capacity_veh_h = get_req<double>(jl, "link", "capacity_veh_h");
    for (const auto& jm : get_req<ordered_json>(jl, "link", "modes")) {
      ModeKind k;
      const std::string s = jm.get<std::string>();
      if (!mode_from_string(s, k))
        throw ParseError("link." + l.id + ".modes: unknown mode '" + s + "'");
      l.modes_allowed.insert(k);
    }
    m.links.push_back(std::move(l));
  }

  for (const auto& jm : get_req<ordered_json>(j, "scenario", "modes")) {
    check_keys(jm, "mode",
               {"kind", "op_cost_per_pkm", "op_cost_per_pkm_per_km", "capacity",
                "speed_kmh"});
    Mode md;
    md.kind = get_mode(jm, "mode", "kind");
    md.op_cost.base = get_req<double>(jm, "mode", "op_cost_per_pkm");
    if (jm.contains("op_cost_per_pkm_per_km"))
      md.op_cost.per_km = jm["op_cost_per_pkm_per_km"].get<double>();
    md.capacity = get_req<int>(jm, "mode", "capacity");
    md.speed_kmh = get_req<double>(jm, "mode", "speed_kmh");
    m.modes.push_back(md);
  }

  for (const auto& jl : get_req<ordered_json>(j, "scenario", "lines")) {
    check_keys(jl, "line",
               {"id", "mode", "stops", "headway_min", "service_start_s",
                "service_end_s"});
    TransitLine ln;
    ln.id = get_req<std::string>(jl, "line", "id");
    ln.mode = get_mode(jl, "line", "mode");
    for (const auto& s : get_req<ordered_json>(jl, "line", "stops"))
      ln.stops.push_back(s.get<std::string>());
    ln.headway_min = get_req<double>(jl, "line", "headway_min");
    ln.service_start_s = get_req<int>(jl, "line", "service_start_s");
    ln.service_end_s = get_req<int>(jl, "line", "service_end_s");
    m.lines.push_back(std::move(ln));
  }

  for (const auto& jv : get_req<ordered_json>(j, "scenario", "vehicles")) {
    check_keys(jv, "vehicle", {"id", "mode", "assignment", "capacity"});
    Vehicle v;
    v.id = get_req<std::string>(jv, "vehicle", "id");
    v.mode = get_mode(jv, "vehicle", "mode");
    if (jv.contains("capacity"))
      v.capacity_override = jv["capacity"].get<int>();
    const ordered_json ja = get_req<ordered_json>(jv, "vehicle", "assignment");
    const std::string kind = get_req<std::string>(ja, "assignment", "kind");
    if (kind == "scheduled") {
      check_keys(ja, "assignment", {"kind", "line", "link"});
      v.kind = Vehicle::Kind::Scheduled;
      v.scheduled.line = get_req<std::string>(ja, "assignment", "line");
      const ordered_json lk = get_req<ordered_json>(ja, "assignment", "link");
      if (!lk.is_array() || lk.size() != 2)
        throw ParseError("vehicle." + v.id + ".assignment.link: need [from,to]");
      v.scheduled.link_from = lk[0].get<std::string>();
      v.scheduled.link_to = lk[1].get<std::string>();
    } else if (kind == "free") {
      check_keys(ja, "assignment", {"kind", "station", "position"});
      v.kind = Vehicle::Kind::Free;
      if (ja.contains("position")) {
        const ordered_json& pos = ja["position"];
        if (!pos.is_array() || pos.size() != 2)
          throw ParseError("vehicle." + v.id +
                           ".assignment.position: need [x,y]");
        v.free.has_position = true;
        v.free.x = pos[0].get<double>();
        v.free.y = pos[1].get<double>();
      } else {
        v.free.station = get_req<std::string>(ja, "assignment", "station");
      }
    } else if (kind == "depot") {
      check_keys(ja, "assignment", {"kind", "station"});
      v.kind = Vehicle::Kind::Depot;
      v.depot.station = get_req<std::string>(ja, "assignment", "station");
    } else {
      throw ParseError("vehicle." + v.id + ".assignment.kind: unknown kind '" +
                       kind + "'");
    }
    m.vehicles.push_back(std::move(v));
  }

  for (const auto& jd : get_req<ordered_json>(j, "scenario", "demand")) {
    check_keys(jd, "demand", {"origin", "destination", "mode", "bins"});
    DemandEntry e;
    e.origin = get_req<std::string>(jd, "demand", "origin");
    e.destination = get_req<std::string>(jd, "demand", "destination");
    e.mode = get_mode(jd, "demand", "mode");
    for (const auto& jb : get_req<ordered_json>(jd, "demand", "bins")) {
      check_keys(jb, "demand.bin", {"start_s", "end_s", "rate_per_h"});
      DemandBin b;
      b.start_s = get_req<int>(jb, "demand.bin", "start_s");
      b.end_s = get_req<int>(jb, "demand.bin", "end_s");
      b.rate_per_h = get_req<double>(jb, "demand.bin", "rate_per_h");
      e.bins.push_back(b);
    }
    m.demand.entries.push_back(std::move(e));
  }

  {
    const ordered_json jc = get_req<ordered_json>(j, "scenario", "cost_params");
    check_keys(jc, "cost_params",
               {"leave_cost", "time_cost_per_h", "p_min", "p_max",
                "arrangement_rate", "alpha", "beta", "headway_max_min",
                "theta"});
    CostParams& p = m.cost_params;
    p.leave_cost = get_req<double>(jc, "cost_params", "leave_cost");
    p.time_cost_per_h = get_req<double>(jc, "cost_params", "time_cost_per_h");
    p.p_min = get_req<double>(jc, "cost_params", "p_min");
    p.p_max = get_req<double>(jc, "cost_params", "p_max");
    p.arrangement_rate = get_req<double>(jc, "cost_params", "arrangement_rate");
    p.alpha = get_req<double>(jc, "cost_params", "alpha");
    p.beta = get_req<double>(jc, "cost_params", "beta");
    p.headway_max_min = get_req<double>(jc, "cost_params", "headway_max_min");
    p.theta = get_req<double>(jc, "cost_params", "theta");
  }

  m.validate();
  return m;
}

//==============================================================================
// Serialization
//==============================================================================

inline ordered_json scenario_to_json(const ScenarioModel& m) {
  using detail::km3;
  ordered_json j;
  j["schema_version"] = m.schema_version;

  j["stations"] = ordered_json::array();
  for (const Station& s : m.stations) {
    ordered_json js{{"id", s.id}};
    if (!s.name.empty()) js["name"] = s.name;
    js["x"] = s.x;
    js["y"] = s.y;
    j["stations"].push_back(std::move(js));
  }

  j["links"] = ordered_json::array();
  for (const Link& l : m.links) {
    ordered_json jl{{"id", l.id},
                    {"from", l.from},
                    {"to", l.to},
                    {"length_km", km3(l.length_km)},
                    {"free_flow_speed_kmh", l.free_flow_speed_kmh},
                    {"capacity_veh_h", l.capacity_veh_h}};
    jl["modes"] = ordered_json::array();
    for (ModeKind k : l.modes_allowed) jl["modes"].push_back(to_string(k));
    j["links"].push_back(std::move(jl));
  }

  j["modes"] = ordered_json::array();
  for (const Mode& md : m.modes) {
    ordered_json jm{{"kind", to_string(md.kind)},
                    {"op_cost_per_pkm", md.op_cost.base}};
    if (md.op_cost.per_km != 0.0)
      jm["op_cost_per_pkm_per_km"] = md.op_cost.per_km;
    jm["capacity"] = md.capacity;
    jm["speed_kmh"] = md.speed_kmh;
    j["modes"].push_back(std::move(jm));
  }

  j["lines"] = ordered_json::array();
  for (const TransitLine& ln : m.lines) {
    j["lines"].push_back(ordered_json{{"id", ln.id},
                                      {"mode", to_string(ln.mode)},
                                      {"stops", ln.stops},
                                      {"headway_min", ln.headway_min},
                                      {"service_start_s", ln.service_start_s},
                                      {"service_end_s", ln.service_end_s}});
  }

  j["vehicles"] = ordered_json::array();
  for (const Vehicle& v : m.vehicles) {
    ordered_json jv{{"id", v.id}, {"mode", to_string(v.mode)}};
    ordered_json ja;
    switch (v.kind) {
      case Vehicle::Kind::Scheduled:
        ja = ordered_json{{"kind", "scheduled"},
                          {"line", v.scheduled.line},
                          {"link", ordered_json::array({v.scheduled.link_from,
                                                        v.scheduled.link_to})}};
        break;
      case Vehicle::Kind::Free:
        if (v.free.has_position)
          ja = ordered_json{{"kind", "free"},
                            {"position", ordered_json::array(
                                             {v.free.x, v.free.y})}};
        else
          ja = ordered_json{{"kind", "free"}, {"station", v.free.station}};
        break;
      case Vehicle::Kind::Depot:
        ja = ordered_json{{"kind", "depot"}, {"station", v.depot.station}};
        break;
    }
    jv["assignment"] = std::move(ja);
    if (v.capacity_override) jv["capacity"] = *v.capacity_override;
    j["vehicles"].push_back(std::move(jv));
  }

  j["demand"] = ordered_json::array();
  for (const DemandEntry& e : m.demand.entries) {
    ordered_json jd{{"origin", e.origin},
                    {"destination", e.destination},
                    {"mode", to_string(e.mode)}};
    jd["bins"] = ordered_json::array();
    for (const DemandBin& b : e.bins)
      jd["bins"].push_back(ordered_json{{"start_s", b.start_s},
                                        {"end_s", b.end_s},
                                        {"rate_per_h", b.rate_per_h}});
    j["demand"].push_back(std::move(jd));
  }

  const CostParams& p = m.cost_params;
  j["cost_params"] = ordered_json{{"leave_cost", p.leave_cost},
                                  {"time_cost_per_h", p.time_cost_per_h},
                                  {"p_min", p.p_min},
                                  {"p_max", p.p_max},
                                  {"arrangement_rate", p.arrangement_rate},
                                  {"alpha", p.alpha},
                                  {"beta", p.beta},
                                  {"headway_max_min", p.headway_max_min},
                                  {"theta", p.theta}};
  return j;
}

//==============================================================================
// File-level helpers
//==============================================================================

inline ScenarioModel load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return scenario_from_json(j);
}

inline void save_scenario(const ScenarioModel& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open " + path + " for writing");
  out << scenario_to_json(m).dump(2) << "\n";
}

//==============================================================================
// Disruption descriptor files: {mode, links:[[i,j],...], start_s, duration_s}
//==============================================================================

inline DisruptionSpec disruption_from_json(const ordered_json& j) {
  using detail::check_keys;
  using detail::get_req;
  if (!j.is_object()) throw ParseError("disruption: root must be an object");
  check_keys(j, "disruption", {"mode", "links", "start_s", "duration_s"});
  DisruptionSpec d;
  d.mode = detail::get_mode(j, "disruption", "mode");
  for (const auto& jl : get_req<ordered_json>(j, "disruption", "links")) {
    if (!jl.is_array() || jl.size() != 2)
      throw ParseError("disruption.links: need [from,to] pairs");
    d.links.emplace_back(jl[0].get<std::string>(), jl[1].get<std::string>());
  }
  d.start_s = get_req<int>(j, "disruption", "start_s");
  d.duration_s = get_req<int>(j, "disruption", "duration_s");
  return d;
}

inline DisruptionSpec load_disruption(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  ordered_json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return disruption_from_json(j);
}

inline ordered_json disruption_to_json(const DisruptionSpec& d) {
  ordered_json links = ordered_json::array();
  for (const auto& [a, b] : d.links)
    links.push_back(ordered_json::array({a, b}));
  return ordered_json{{"mode", to_string(d.mode)},
                      {"links", links},
                      {"start_s", d.start_s},
                      {"duration_s", d.duration_s}};
}

}  // namespace raas
