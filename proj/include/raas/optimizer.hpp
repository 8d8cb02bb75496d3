#pragma once

// Exact binary vehicle-reallocation optimizer.
//
// Decision: which candidate vehicles to dispatch (one binary each) to bridge
// the disrupted pairs. Objective: Z1 (transfer payments + arrangement fees)
// plus Z2 (compensation and lost-time cost of leavers and waiters at the
// disrupted pairs and at deliberately disrupted source links). Constraints:
//   - a vehicle is used at most once (it may appear once per pair);
//   - per pair and mode, the mean arrival duration must fit the window;
//   - optionally (single-mode bridging baselines) the selection must first
//     minimise the number of passengers left waiting, then cost.
//
// Two engines share one evaluation function: `enumerate_solve` (exhaustive,
// the oracle) and `branch_and_bound` (default). The B&B prunes with an
// admissible bound and explores ulp-level ties, so both engines return the
// same selection under the same deterministic tie-breaks: lower objective,
// then fewer vehicles, then lexicographically smaller vehicle-id set.

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "raas/cost.hpp"
#include "raas/scenario_json.hpp"

namespace raas {

//==============================================================================
// Instance preparation
//==============================================================================

struct OptimizerOptions {
  enum class Method { BranchAndBound, Enumerate };
  Method method = Method::BranchAndBound;
  // Bridging baselines must serve every waiter the fleet can seat before
  // minimising cost (lexicographic objective).
  bool require_coverage = false;
  // Congestion feedback: arrival durations are scaled per mode.
  std::map<ModeKind, double> speed_factors;
  // Sensitivity sweeps can pin the blocked volume per pair.
  std::optional<std::vector<double>> volume_override;
};

struct PreparedCandidate {
  CandidateVehicle base;
  double ta_eff = 0.0;      // arrival duration after congestion scaling
  double y = 0.0;           // payment phase at ta_eff
  double transfer_paid = 0.0;
  double transfer_full = 0.0;
  double arrangement = 0.0;
  double unit_cost = 0.0;   // transfer_paid + arrangement
  double seat_price = 0.0;  // unit_cost / capacity, for the bound's ladder
  int xi_id = -1;           // index into PreparedInstance::xi_links
};

struct XiLinkInfo {
  std::string r, s;
  double volume = 0.0;        // V_rs over one headway
  double headway_s = 0.0;
  PassengerSplit split;       // leaving rate capped at 1-beta (no bridging)
  double leaving_cost = 0.0;  // fixed deliberate Z2 once the link is pulled
  double waiting_cost = 0.0;
  double cost = 0.0;          // leaving_cost + waiting_cost
};

struct PairContext {
  std::string i, j;
  double volume = 0.0;
  double min_ta_any = 0.0;   // fastest candidate of the pair (bound helper)
  double wait_cost = 0.0;    // EUR per waiter: TD_h * CT
  double leave_coeff = 0.0;  // EUR per leaver: CL + TD_h * CT
  int first_cand = 0, last_cand = 0;  // [first,last) block in sorted order
};

struct PreparedInstance {
  const ScenarioModel* model = nullptr;
  CostParams params;
  double td_s = 0.0;
  bool require_coverage = false;
  std::vector<PairContext> pairs;
  std::vector<PreparedCandidate> cands;  // sorted: pair, seat price, ta, id
  std::vector<XiLinkInfo> xi_links;
  bool vehicles_unique = true;  // false when a vehicle appears for 2+ pairs
};

inline PreparedInstance prepare_instance(const ScenarioModel& model,
                                         const StationPartition& part,
                                         const std::vector<CandidateVehicle>&
                                             candidates,
                                         const CostParams& params,
                                         const OptimizerOptions& opt = {}) {
  PreparedInstance inst;
  inst.model = &model;
  inst.params = params;
  inst.td_s = static_cast<double>(part.disruption.duration_s);
  inst.require_coverage = opt.require_coverage;

  const double td_h = inst.td_s / 3600.0;
  for (int pi = 0; pi < static_cast<int>(part.od_pairs.size()); ++pi) {
    const DisruptedPair& pr = part.od_pairs[static_cast<std::size_t>(pi)];
    PairContext pc;
    pc.i = pr.i;
    pc.j = pr.j;
    pc.volume = opt.volume_override
                    ? opt.volume_override->at(static_cast<std::size_t>(pi))
                    : pr.volume;
    pc.wait_cost = td_h * params.time_cost_per_h;
    pc.leave_coeff = params.leave_cost + pc.wait_cost;
    inst.pairs.push_back(std::move(pc));
  }

  std::map<std::pair<std::string, std::string>, int> xi_index;
  std::set<std::string> seen_vehicles;
  for (const CandidateVehicle& c : candidates) {
    if (c.pair_index < 0 ||
        c.pair_index >= static_cast<int>(inst.pairs.size()))
      throw ValidationError("candidate.pair_index", c.vehicle_id,
                            "outside the disrupted pair list");
    PreparedCandidate p;
    p.base = c;
    double factor = 1.0;
    auto it = opt.speed_factors.find(c.mode);
    if (it != opt.speed_factors.end()) factor = it->second;
    p.ta_eff = c.ta_s * factor;
    const Mode& mode = model.mode_def(c.mode);
    const double dist = vehicle_distance(c);
    p.y = payment_phase(p.ta_eff, inst.td_s, params.p_min, params.p_max);
    p.transfer_full = transfer_cost_full(mode, c.capacity, dist);
    p.transfer_paid = service_rate(mode, dist, p.y, params) * c.capacity * dist;
    p.arrangement =
        arrangement_cost(p.ta_eff, p.transfer_full, params.arrangement_rate);
    p.unit_cost = p.transfer_paid + p.arrangement;
    p.seat_price = p.unit_cost / c.capacity;
    if (c.has_source_link) {
      auto [xit, inserted] =
          xi_index.emplace(std::make_pair(c.source_r, c.source_s),
                           static_cast<int>(inst.xi_links.size()));
      if (inserted) {
        XiLinkInfo x;
        x.r = c.source_r;
        x.s = c.source_s;
        x.volume = c.source_volume;
        x.headway_s = c.source_headway_min * 60.0;
        // No bridging at the pulled link: the leaving rate sits at its cap.
        x.split = passenger_split(x.volume, 1.0 - params.beta, 0.0);
        const LoyaltyTerm t =
            loyalty_term(x.r + "->" + x.s, x.split, x.headway_s, params);
        x.leaving_cost = t.leaving;
        x.waiting_cost = t.waiting;
        x.cost = t.leaving + t.waiting;
        inst.xi_links.push_back(std::move(x));
      }
      p.xi_id = xit->second;
    }
    if (!seen_vehicles.insert(c.vehicle_id).second)
      inst.vehicles_unique = false;
    inst.cands.push_back(std::move(p));
  }

  std::sort(inst.cands.begin(), inst.cands.end(),
            [](const PreparedCandidate& a, const PreparedCandidate& b) {
              if (a.base.pair_index != b.base.pair_index)
                return a.base.pair_index < b.base.pair_index;
              if (a.seat_price != b.seat_price)
                return a.seat_price < b.seat_price;
              if (a.ta_eff != b.ta_eff) return a.ta_eff < b.ta_eff;
              return a.base.vehicle_id < b.base.vehicle_id;
            });

  for (int pi = 0; pi < static_cast<int>(inst.pairs.size()); ++pi) {
    PairContext& pc = inst.pairs[static_cast<std::size_t>(pi)];
    pc.first_cand = pc.last_cand = -1;
    pc.min_ta_any = inst.td_s;  // anything slower caps the leaving rate anyway
    for (int ci = 0; ci < static_cast<int>(inst.cands.size()); ++ci) {
      const PreparedCandidate& c = inst.cands[static_cast<std::size_t>(ci)];
      if (c.base.pair_index != pi) continue;
      if (pc.first_cand < 0) pc.first_cand = ci;
      pc.last_cand = ci + 1;
      pc.min_ta_any = std::min(pc.min_ta_any, c.ta_eff);
    }
    if (pc.first_cand < 0) pc.first_cand = pc.last_cand = 0;
  }
  return inst;
}

//==============================================================================
// Selection evaluation (single source of truth for both engines)
//==============================================================================

struct EvalResult {
  bool feasible = true;
  std::string infeasible_reason;
  double z1_transfer = 0.0;
  double z1_arrangement = 0.0;
  double z2_leaving_main = 0.0;
  double z2_waiting_main = 0.0;
  double z2_leaving_deliberate = 0.0;
  double z2_waiting_deliberate = 0.0;
  double objective = 0.0;
  double vw_total = 0.0;  // waiters at the disrupted pairs
  std::vector<PassengerSplit> pair_splits;
  std::vector<double> pair_min_ta;     // announced fastest arrival per pair
  std::vector<double> pair_leaving;    // leaving rate per pair
  std::vector<int> xi_selected;        // indices into inst.xi_links
  std::map<ModeKind, double> ta_by_mode;   // mean effective TA of selection
  std::map<ModeKind, int> count_by_mode;
};

inline double z1_total(const EvalResult& e) {
  return e.z1_transfer + e.z1_arrangement;
}
inline double z2_total(const EvalResult& e) {
  return e.z2_leaving_main + e.z2_waiting_main + e.z2_leaving_deliberate +
         e.z2_waiting_deliberate;
}

inline EvalResult evaluate_selection(const PreparedInstance& inst,
                                     const std::vector<int>& selection) {
  EvalResult r;
  const CostParams& p = inst.params;

  std::set<std::string> used;
  std::vector<char> xi_flag(inst.xi_links.size(), 0);
  // (pair, mode) -> (sum_ta, count) for the mean-arrival constraint.
  std::map<std::pair<int, int>, std::pair<double, int>> pm;
  const std::size_t np = inst.pairs.size();
  std::vector<double> min_ta(np, std::numeric_limits<double>::infinity());
  std::vector<double> cap(np, 0.0);

  std::map<ModeKind, std::pair<double, int>> mode_ta;
  for (int ci : selection) {
    const PreparedCandidate& c = inst.cands[static_cast<std::size_t>(ci)];
    if (!used.insert(c.base.vehicle_id).second) {
      r.feasible = false;
      r.infeasible_reason = "vehicle " + c.base.vehicle_id + " used twice";
      return r;
    }
    r.z1_transfer += c.transfer_paid;
    r.z1_arrangement += c.arrangement;
    const auto pi = static_cast<std::size_t>(c.base.pair_index);
    min_ta[pi] = std::min(min_ta[pi], c.ta_eff);
    cap[pi] += c.base.capacity;
    auto& [sum, n] = pm[{c.base.pair_index, static_cast<int>(c.base.mode)}];
    sum += c.ta_eff;
    ++n;
    if (c.xi_id >= 0) xi_flag[static_cast<std::size_t>(c.xi_id)] = 1;
    auto& [msum, mn] = mode_ta[c.base.mode];
    msum += c.ta_eff;
    ++mn;
  }

  // Mean arrival per (pair, mode) must fit the disruption window.
  for (const auto& [key, val] : pm) {
    const double mean = val.first / val.second;
    if (mean > inst.td_s) {
      r.feasible = false;
      r.infeasible_reason =
          strf("mean arrival %.0fs of %s exceeds the %gs window", mean,
               to_string(static_cast<ModeKind>(key.second)), inst.td_s);
      return r;
    }
  }

  for (std::size_t pi = 0; pi < np; ++pi) {
    const PairContext& pc = inst.pairs[pi];
    const bool any = std::isfinite(min_ta[pi]);
    // No replacement announced -> the leaving rate sits at its cap.
    const double leaving =
        any ? leaving_rate(min_ta[pi], inst.td_s, p.alpha, p.beta)
            : 1.0 - p.beta;
    const PassengerSplit split = passenger_split(pc.volume, leaving, cap[pi]);
    const LoyaltyTerm t = loyalty_term(pc.i + "->" + pc.j, split, inst.td_s, p);
    r.z2_leaving_main += t.leaving;
    r.z2_waiting_main += t.waiting;
    r.vw_total += split.waiting;
    r.pair_splits.push_back(split);
    r.pair_min_ta.push_back(any ? min_ta[pi] : inst.td_s);
    r.pair_leaving.push_back(leaving);
  }

  for (std::size_t xi = 0; xi < inst.xi_links.size(); ++xi)
    if (xi_flag[xi]) {
      const XiLinkInfo& x = inst.xi_links[xi];
      r.z2_leaving_deliberate += x.leaving_cost;
      r.z2_waiting_deliberate += x.waiting_cost;
      r.xi_selected.push_back(static_cast<int>(xi));
    }

  for (const auto& [mode, acc] : mode_ta)
    if (acc.second > 0) {
      r.ta_by_mode[mode] = acc.first / acc.second;
      r.count_by_mode[mode] = acc.second;
    }

  r.objective = z1_total(r) + z2_total(r);
  return r;
}

//==============================================================================
// Deterministic total order on outcomes
//==============================================================================

struct Outcome {
  bool valid = false;
  std::vector<int> selection;        // candidate indices
  std::vector<std::string> ids;      // sorted vehicle ids (tie-break key)
  EvalResult eval;
};

// Returns true when `a` beats `b`. Coverage mode compares waiters first.
inline bool outcome_better(const PreparedInstance& inst, const Outcome& a,
                           const Outcome& b) {
  if (!b.valid) return a.valid;
  if (!a.valid) return false;
  if (inst.require_coverage && a.eval.vw_total != b.eval.vw_total)
    return a.eval.vw_total < b.eval.vw_total;
  if (a.eval.objective != b.eval.objective)
    return a.eval.objective < b.eval.objective;
  if (a.selection.size() != b.selection.size())
    return a.selection.size() < b.selection.size();
  return a.ids < b.ids;
}

inline Outcome make_outcome(const PreparedInstance& inst,
                            std::vector<int> selection) {
  Outcome o;
  o.eval = evaluate_selection(inst, selection);
  if (!o.eval.feasible) return o;
  o.valid = true;
  o.selection = std::move(selection);
  for (int ci : o.selection)
    o.ids.push_back(inst.cands[static_cast<std::size_t>(ci)].base.vehicle_id);
  std::sort(o.ids.begin(), o.ids.end());
  return o;
}

//==============================================================================
// Admissible lower bound
//==============================================================================

// Bound on the cost of any completion of a partial assignment: the committed
// Z1 and deliberate Z2, plus per pair an optimistic Z2 that prices leavers
// at the fastest still-achievable arrival and fills the remaining uncovered
// waiters with the cheapest fractional seats among the undecided candidates
// (a waiter never costs more than the waiting rate, so each uncovered unit
// contributes min(seat price, waiting cost)).
//
// `included` / `excluded` partition the decided candidates; everything else
// is undecided.
inline double lower_bound(const PreparedInstance& inst,
                          const std::vector<int>& included,
                          const std::vector<int>& excluded) {
  const CostParams& p = inst.params;
  std::vector<char> state(inst.cands.size(), 0);  // 0 undecided, 1 in, 2 out
  for (int ci : included) state[static_cast<std::size_t>(ci)] = 1;
  for (int ci : excluded) state[static_cast<std::size_t>(ci)] = 2;

  double bound = 0.0;
  std::vector<char> xi_flag(inst.xi_links.size(), 0);
  const std::size_t np = inst.pairs.size();
  std::vector<double> min_ta(np, std::numeric_limits<double>::infinity());
  std::vector<double> cap(np, 0.0);
  for (std::size_t ci = 0; ci < inst.cands.size(); ++ci) {
    const PreparedCandidate& c = inst.cands[ci];
    const auto pi = static_cast<std::size_t>(c.base.pair_index);
    if (state[ci] == 1) {
      bound += c.unit_cost;
      cap[pi] += c.base.capacity;
      min_ta[pi] = std::min(min_ta[pi], c.ta_eff);
      if (c.xi_id >= 0 && !xi_flag[static_cast<std::size_t>(c.xi_id)]) {
        xi_flag[static_cast<std::size_t>(c.xi_id)] = 1;
        bound += inst.xi_links[static_cast<std::size_t>(c.xi_id)].cost;
      }
    } else if (state[ci] == 0) {
      min_ta[pi] = std::min(min_ta[pi], c.ta_eff);  // optimistic arrival
    }
  }

  for (std::size_t pi = 0; pi < np; ++pi) {
    const PairContext& pc = inst.pairs[pi];
    const bool any = std::isfinite(min_ta[pi]);
    const double leaving = any
                               ? leaving_rate(min_ta[pi], inst.td_s, p.alpha,
                                              p.beta)
                               : 1.0 - p.beta;
    // Same split code path as the leaf evaluation so math-equal states
    // compare bit-for-bit.
    const PassengerSplit sp = passenger_split(pc.volume, leaving, cap[pi]);
    bound += pc.leave_coeff * sp.leavers;
    double need = sp.waiting;
    if (need <= 0.0) continue;
    // Cheapest fractional seats among undecided candidates of this pair,
    // ascending by seat price (the sort order within the pair's block).
    for (int ci = pc.first_cand; ci < pc.last_cand && need > 0.0; ++ci) {
      const PreparedCandidate& c = inst.cands[static_cast<std::size_t>(ci)];
      if (state[static_cast<std::size_t>(ci)] != 0) continue;
      if (c.seat_price >= pc.wait_cost) break;  // waiting is cheaper now
      const double seats = std::min(need, static_cast<double>(c.base.capacity));
      bound += seats * c.seat_price;
      need -= seats;
    }
    bound += need * pc.wait_cost;
  }
  return bound;
}

//==============================================================================
// Engines
//==============================================================================

struct SolveReport {
  std::string method;
  long long nodes_explored = 0;
  double root_bound = 0.0;
  double best_bound = 0.0;
  bool proven_optimal = false;
  double wall_ms = 0.0;
};

namespace detail {

// Safety margin so FP noise in the bound can never prune a true tie.
inline bool prunes(double bound, double incumbent) {
  return bound * (1.0 - 1e-12) - 1e-9 > incumbent;
}

struct BnbState {
  const PreparedInstance* inst;
  Outcome best;
  long long nodes = 0;
  std::vector<int> chosen;
  std::vector<char> state;             // per candidate: 0 und, 1 in, 2 out
  std::set<std::string> used_vehicles; // only consulted when !vehicles_unique

  // Incremental per-pair commitments.
  std::vector<double> cap;
  std::vector<double> committed_cost_stack;

  // xi refcounts.
  std::vector<int> xi_ref;
  double committed = 0.0;
};

// Node bound using the incremental state; mirrors lower_bound() exactly but
// exploits that decided candidates form the prefix [0, depth).
inline double node_bound(BnbState& st, int depth) {
  const PreparedInstance& inst = *st.inst;
  const CostParams& p = inst.params;
  double bound = st.committed;
  for (std::size_t pi = 0; pi < inst.pairs.size(); ++pi) {
    const PairContext& pc = inst.pairs[pi];
    // Fastest arrival still achievable: selected ones or any undecided.
    double mta = std::numeric_limits<double>::infinity();
    for (int ci : st.chosen)
      if (inst.cands[static_cast<std::size_t>(ci)].base.pair_index ==
          static_cast<int>(pi))
        mta = std::min(mta,
                       inst.cands[static_cast<std::size_t>(ci)].ta_eff);
    for (int ci = std::max(pc.first_cand, depth); ci < pc.last_cand; ++ci)
      mta = std::min(mta, inst.cands[static_cast<std::size_t>(ci)].ta_eff);
    const bool any = std::isfinite(mta);
    const double leaving =
        any ? leaving_rate(mta, inst.td_s, p.alpha, p.beta) : 1.0 - p.beta;
    const PassengerSplit sp = passenger_split(pc.volume, leaving, st.cap[pi]);
    bound += pc.leave_coeff * sp.leavers;
    double need = sp.waiting;
    for (int ci = std::max(pc.first_cand, depth);
         ci < pc.last_cand && need > 0.0; ++ci) {
      const PreparedCandidate& c = inst.cands[static_cast<std::size_t>(ci)];
      if (c.seat_price >= pc.wait_cost) break;
      const double seats = std::min(need, static_cast<double>(c.base.capacity));
      bound += seats * c.seat_price;
      need -= seats;
    }
    bound += need * pc.wait_cost;
  }
  return bound;
}

// Cost bound for coverage-first mode. The pure-cost bound prices uncovered
// passengers at the waiting cost, which coverage mode forbids, so it stays
// far below any covering selection and barely prunes. Here each pair is
// bounded by the best announced-arrival scenario instead: a completion's
// announcement is the fastest selected candidate's arrival, one of finitely
// many values, and under announcement t every selected candidate has
// ta >= t. So min over t of [leaving cost at t + cheapest fill of the
// remaining demand from seats with ta >= t, at most vw_allow of it waiting]
// underestimates every completion. Residual demand beyond the allowance is
// priced at the waiting cost; completions needing it exceed the incumbent's
// waiter count and lose the lexicographic comparison anyway.
inline double node_bound_coverage(BnbState& st, int depth, double vw_allow) {
  const PreparedInstance& inst = *st.inst;
  const CostParams& p = inst.params;
  double bound = st.committed;
  for (std::size_t pi = 0; pi < inst.pairs.size(); ++pi) {
    const PairContext& pc = inst.pairs[pi];
    double mta_chosen = std::numeric_limits<double>::infinity();
    for (int ci : st.chosen)
      if (inst.cands[static_cast<std::size_t>(ci)].base.pair_index ==
          static_cast<int>(pi))
        mta_chosen = std::min(mta_chosen,
                              inst.cands[static_cast<std::size_t>(ci)].ta_eff);

    // Candidate announcement values: distinct arrivals no later than the
    // fastest already-chosen one, plus "nothing selected" when allowed.
    std::vector<double> scenarios;
    if (std::isfinite(mta_chosen)) scenarios.push_back(mta_chosen);
    for (int ci = std::max(pc.first_cand, depth); ci < pc.last_cand; ++ci) {
      const double t = inst.cands[static_cast<std::size_t>(ci)].ta_eff;
      if (t <= mta_chosen) scenarios.push_back(t);
    }
    std::sort(scenarios.begin(), scenarios.end());
    scenarios.erase(std::unique(scenarios.begin(), scenarios.end()),
                    scenarios.end());

    double best_pair = std::numeric_limits<double>::infinity();
    if (!std::isfinite(mta_chosen)) {
      // No selection at all for this pair.
      const PassengerSplit sp =
          passenger_split(pc.volume, 1.0 - p.beta, st.cap[pi]);
      best_pair = pc.leave_coeff * sp.leavers + sp.waiting * pc.wait_cost;
    }
    for (double t : scenarios) {
      const double leaving = leaving_rate(t, inst.td_s, p.alpha, p.beta);
      const PassengerSplit sp = passenger_split(pc.volume, leaving, st.cap[pi]);
      double cost = pc.leave_coeff * sp.leavers;
      double need = sp.waiting;
      double allow = vw_allow;
      for (int ci = std::max(pc.first_cand, depth);
           ci < pc.last_cand && need > 0.0; ++ci) {
        const PreparedCandidate& c = inst.cands[static_cast<std::size_t>(ci)];
        if (c.ta_eff < t) continue;
        if (c.seat_price >= pc.wait_cost && allow > 0.0) {
          const double w = std::min(allow, need);
          cost += w * pc.wait_cost;
          need -= w;
          allow = 0.0;
          if (need <= 0.0) break;
        }
        const double seats =
            std::min(need, static_cast<double>(c.base.capacity));
        cost += seats * c.seat_price;
        need -= seats;
      }
      cost += need * pc.wait_cost;
      best_pair = std::min(best_pair, cost);
    }
    bound += best_pair;
  }
  return bound;
}

// Waiters lower bound for the coverage-first comparison: assumes every
// remaining seat gets added and the committed selection's announcement
// holds (adding vehicles can only add capacity; leavers can only shrink
// when faster vehicles join, which frees seats, so this underestimates).
inline double node_vw_bound(BnbState& st, int depth) {
  const PreparedInstance& inst = *st.inst;
  const CostParams& p = inst.params;
  double vw = 0.0;
  for (std::size_t pi = 0; pi < inst.pairs.size(); ++pi) {
    const PairContext& pc = inst.pairs[pi];
    double mta_committed = std::numeric_limits<double>::infinity();
    for (int ci : st.chosen)
      if (inst.cands[static_cast<std::size_t>(ci)].base.pair_index ==
          static_cast<int>(pi))
        mta_committed =
            std::min(mta_committed,
                     inst.cands[static_cast<std::size_t>(ci)].ta_eff);
    const bool any = std::isfinite(mta_committed);
    const double l_hi = any ? leaving_rate(mta_committed, inst.td_s, p.alpha,
                                           p.beta)
                            : 1.0 - p.beta;
    double cap_all = st.cap[pi];
    for (int ci = std::max(pc.first_cand, depth); ci < pc.last_cand; ++ci)
      cap_all += inst.cands[static_cast<std::size_t>(ci)].base.capacity;
    vw += passenger_split(pc.volume, l_hi, cap_all).waiting;
  }
  return vw;
}

inline void bnb_dfs(BnbState& st, int depth) {
  const PreparedInstance& inst = *st.inst;
  ++st.nodes;

  if (st.best.valid) {
    if (inst.require_coverage) {
      // Waiter counts from math-equal states compare exactly (identical
      // split code path), so no epsilon is needed; states that could still
      // improve the waiter count are never cost-pruned.
      const double vwb = node_vw_bound(st, depth);
      if (vwb > st.best.eval.vw_total) return;
      if (vwb == st.best.eval.vw_total &&
          prunes(node_bound_coverage(st, depth, st.best.eval.vw_total),
                 st.best.eval.objective))
        return;
    } else if (prunes(node_bound(st, depth), st.best.eval.objective)) {
      return;
    }
  }

  if (depth == static_cast<int>(inst.cands.size())) {
    Outcome o = make_outcome(inst, st.chosen);
    if (o.valid && outcome_better(inst, o, st.best)) st.best = std::move(o);
    return;
  }

  const PreparedCandidate& c = inst.cands[static_cast<std::size_t>(depth)];

  // Canonical-prefix rule: inside a run of interchangeable candidates
  // (same pair, costs, arrival, capacity, source link) selections must be
  // prefixes — once one is skipped, its identical successors are skipped
  // too. Every selection has exactly one canonical representative, and the
  // canonical one is also the id-lexicographic minimum, so tie-breaks agree
  // with exhaustive enumeration. Only sound when no vehicle serves two
  // pairs: swapping class members must never resurrect a vehicle conflict.
  bool blocked = false;
  if (depth > 0 && inst.vehicles_unique) {
    const PreparedCandidate& prev =
        inst.cands[static_cast<std::size_t>(depth - 1)];
    const bool same_class =
        prev.base.pair_index == c.base.pair_index &&
        prev.base.capacity == c.base.capacity && prev.ta_eff == c.ta_eff &&
        prev.unit_cost == c.unit_cost && prev.xi_id == c.xi_id;
    if (same_class && st.state[static_cast<std::size_t>(depth - 1)] == 2)
      blocked = true;
  }

  const bool dup =
      !inst.vehicles_unique && st.used_vehicles.count(c.base.vehicle_id) > 0;

  if (!blocked && !dup) {  // include branch first: greedy-ish incumbents
    st.state[static_cast<std::size_t>(depth)] = 1;
    st.chosen.push_back(depth);
    st.cap[static_cast<std::size_t>(c.base.pair_index)] += c.base.capacity;
    st.committed += c.unit_cost;
    if (c.xi_id >= 0 && st.xi_ref[static_cast<std::size_t>(c.xi_id)]++ == 0)
      st.committed += inst.xi_links[static_cast<std::size_t>(c.xi_id)].cost;
    if (!inst.vehicles_unique) st.used_vehicles.insert(c.base.vehicle_id);

    bnb_dfs(st, depth + 1);

    if (!inst.vehicles_unique) st.used_vehicles.erase(c.base.vehicle_id);
    if (c.xi_id >= 0 && --st.xi_ref[static_cast<std::size_t>(c.xi_id)] == 0)
      st.committed -= inst.xi_links[static_cast<std::size_t>(c.xi_id)].cost;
    st.committed -= c.unit_cost;
    st.cap[static_cast<std::size_t>(c.base.pair_index)] -= c.base.capacity;
    st.chosen.pop_back();
  }

  st.state[static_cast<std::size_t>(depth)] = 2;
  bnb_dfs(st, depth + 1);
  st.state[static_cast<std::size_t>(depth)] = 0;
}

}  // namespace detail

inline Outcome enumerate_solve(const PreparedInstance& inst,
                               SolveReport* report = nullptr) {
  const int n = static_cast<int>(inst.cands.size());
  if (n > 30)
    throw ValidationError("enumerate.candidates", std::to_string(n),
                          "exhaustive enumeration capped at 30 candidates");
  const auto t0 = std::chrono::steady_clock::now();
  Outcome best;
  long long nodes = 0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    std::vector<int> sel;
    for (int i = 0; i < n; ++i)
      if (mask & (1ULL << i)) sel.push_back(i);
    ++nodes;
    Outcome o = make_outcome(inst, std::move(sel));
    if (o.valid && outcome_better(inst, o, best)) best = std::move(o);
  }
  if (report) {
    report->method = "enumerate";
    report->nodes_explored = nodes;
    report->root_bound = lower_bound(inst, {}, {});
    report->best_bound = best.valid ? best.eval.objective : 0.0;
    report->proven_optimal = true;
    report->wall_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();
  }
  return best;
}

inline Outcome branch_and_bound(const PreparedInstance& inst,
                                SolveReport* report = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  detail::BnbState st;
  st.inst = &inst;
  st.state.assign(inst.cands.size(), 0);
  st.cap.assign(inst.pairs.size(), 0.0);
  st.xi_ref.assign(inst.xi_links.size(), 0);
  // Seed with the empty selection so pruning has a baseline: it is always
  // feasible (never "Infeasible" at the solver level).
  st.best = make_outcome(inst, {});
  detail::bnb_dfs(st, 0);
  if (report) {
    report->method = "branch_and_bound";
    report->nodes_explored = st.nodes;
    report->root_bound = lower_bound(inst, {}, {});
    report->best_bound = st.best.valid ? st.best.eval.objective : 0.0;
    report->proven_optimal = true;
    report->wall_ms =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - t0)
            .count();
  }
  return st.best;
}

//==============================================================================
// Plan assembly & serialization
//==============================================================================

struct PlanVehicle {
  std::string vehicle_id;
  ModeKind mode = ModeKind::Bus;
  int pair_index = 0;
  double ta_s = 0.0;        // effective (congestion-scaled) arrival duration
  double d_ri_km = 0.0, d_ij_km = 0.0;
  double transfer = 0.0, arrangement = 0.0;
};

struct ReallocationPlan {
  std::vector<PlanVehicle> gamma;
  std::vector<std::pair<std::string, std::string>> xi;  // pulled source links
  std::map<ModeKind, int> u_by_mode;
  std::map<ModeKind, double> ta_by_mode;
  EvalResult eval;
  SolveReport report;
  // Candidate indices into the instance (for replaying paths in simulation).
  std::vector<int> selection;
};

inline ReallocationPlan solve(const PreparedInstance& inst,
                              OptimizerOptions::Method method =
                                  OptimizerOptions::Method::BranchAndBound) {
  SolveReport rep;
  Outcome best = method == OptimizerOptions::Method::Enumerate
                     ? enumerate_solve(inst, &rep)
                     : branch_and_bound(inst, &rep);
  ReallocationPlan plan;
  plan.report = rep;
  plan.eval = best.eval;
  plan.selection = best.selection;
  for (int ci : best.selection) {
    const PreparedCandidate& c = inst.cands[static_cast<std::size_t>(ci)];
    PlanVehicle v;
    v.vehicle_id = c.base.vehicle_id;
    v.mode = c.base.mode;
    v.pair_index = c.base.pair_index;
    v.ta_s = c.ta_eff;
    v.d_ri_km = c.base.d_ri_km;
    v.d_ij_km = c.base.d_ij_km;
    v.transfer = c.transfer_paid;
    v.arrangement = c.arrangement;
    plan.gamma.push_back(std::move(v));
  }
  std::sort(plan.gamma.begin(), plan.gamma.end(),
            [](const PlanVehicle& a, const PlanVehicle& b) {
              return a.vehicle_id < b.vehicle_id;
            });
  for (int xi : best.eval.xi_selected) {
    const XiLinkInfo& x = inst.xi_links[static_cast<std::size_t>(xi)];
    plan.xi.emplace_back(x.r, x.s);
  }
  plan.u_by_mode = best.eval.count_by_mode;
  plan.ta_by_mode = best.eval.ta_by_mode;
  return plan;
}

inline ordered_json plan_to_json(const PreparedInstance& inst,
                                 const ReallocationPlan& plan) {
  ordered_json j;
  j["gamma"] = ordered_json::array();
  for (const PlanVehicle& v : plan.gamma)
    j["gamma"].push_back(ordered_json{{"vehicle", v.vehicle_id},
                                      {"mode", to_string(v.mode)},
                                      {"pair", v.pair_index},
                                      {"ta_s", v.ta_s},
                                      {"d_ri_km", v.d_ri_km},
                                      {"d_ij_km", v.d_ij_km},
                                      {"transfer_eur", v.transfer},
                                      {"arrangement_eur", v.arrangement}});
  j["xi"] = ordered_json::array();
  for (const auto& [r, s] : plan.xi)
    j["xi"].push_back(ordered_json::array({r, s}));
  ordered_json ju = ordered_json::object(), jta = ordered_json::object();
  for (const auto& [mode, n] : plan.u_by_mode) ju[to_string(mode)] = n;
  for (const auto& [mode, ta] : plan.ta_by_mode) jta[to_string(mode)] = ta;
  j["U"] = std::move(ju);
  j["TA_per_mode"] = std::move(jta);
  const EvalResult& e = plan.eval;
  ordered_json pairs = ordered_json::array();
  for (std::size_t pi = 0; pi < inst.pairs.size(); ++pi) {
    const PassengerSplit& s = e.pair_splits[pi];
    pairs.push_back(ordered_json{
        {"i", inst.pairs[pi].i},
        {"j", inst.pairs[pi].j},
        {"volume", s.total},
        {"leavers", s.leavers},
        {"served", s.served},
        {"waiting", s.waiting},
        {"leaving_rate", e.pair_leaving[pi]},
        {"min_ta_s", e.pair_min_ta[pi]},
        {"willingness_to_wait",
         willingness_to_wait(e.pair_min_ta[pi], inst.td_s,
                             inst.params.theta)}});
  }
  j["cost_breakdown"] =
      ordered_json{{"z1_transfer", e.z1_transfer},
                   {"z1_arrangement", e.z1_arrangement},
                   {"z1", z1_total(e)},
                   {"z2_leaving_main", e.z2_leaving_main},
                   {"z2_waiting_main", e.z2_waiting_main},
                   {"z2_leaving_deliberate", e.z2_leaving_deliberate},
                   {"z2_waiting_deliberate", e.z2_waiting_deliberate},
                   {"z2", z2_total(e)},
                   {"pairs", std::move(pairs)}};
  j["objective"] = e.objective;
  // Deliberately no wall time here: plan files are byte-deterministic.
  j["solve_report"] = ordered_json{{"method", plan.report.method},
                                   {"nodes_explored", plan.report.nodes_explored},
                                   {"root_bound", plan.report.root_bound},
                                   {"best_bound", plan.report.best_bound},
                                   {"proven_optimal", plan.report.proven_optimal}};
  return j;
}

}  // namespace raas
