#pragma once

// The monetary model. Everything here is a pure function of its arguments:
//
//   payment_phase      step function deciding the service-payment level from
//                      the arrival duration relative to the disruption window
//   service_rate       per-passenger-km rate actually paid for a vehicle
//   arrangement_cost   dispatch fee, inversely proportional to arrival time
//   leaving_rate       share of blocked passengers abandoning the system
//   willingness_to_wait companion indicator (reported, not optimized over)
//   passenger_split    leavers / served / still-waiting head counts
//   loyalty_cost       Z2: compensation + time cost of leavers and waiters
//   monetary_cost      Z1: transfer payments + arrangement fees
//
// Durations are seconds, distances km, money EUR. The CT rate is per hour;
// the hour conversion happens exactly once, here.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "raas/candidates.hpp"
#include "raas/scenario.hpp"

namespace raas {

//==============================================================================
// Service payment
//==============================================================================

// Payment phase y:
//   arrival in the first half of the window  -> 1   (full rate)
//   arrival in the second half               -> 0   (reduced rate)
//   arrival at/after the window's end        -> -p_min/(p_max-p_min),
//     the value that zeroes the paid rate (only the arrangement fee is due).
inline double payment_phase(double ta_s, double td_s, double p_min,
                            double p_max) {
  if (!(td_s > 0.0))
    throw ValidationError("payment_phase.td", "window", "must be > 0");
  if (ta_s >= td_s) {
    if (!(p_max > p_min))
      throw DegenerateRates(
          "payment_phase: P_max must exceed P_min for post-window arrivals");
    return -p_min / (p_max - p_min);
  }
  return ta_s <= td_s / 2.0 ? 1.0 : 0.0;
}

// Per-passenger-km rate paid for a vehicle: the operating rate scaled by
// the payment mix y*P_max + (1-y)*P_min. The post-window phase pays zero
// exactly (y is negative only in that branch).
inline double service_rate(const Mode& mode, double trip_km, double y,
                           const CostParams& p) {
  if (y < 0.0) return 0.0;
  return mode.op_cost.eval(trip_km) * (y * p.p_max + (1.0 - y) * p.p_min);
}

inline double vehicle_distance(const CandidateVehicle& c) {
  return c.d_ri_km + c.d_ij_km;
}

// Distance-based transfer cost at the full operating rate: the base both the
// actual payment and the arrangement fee are derived from.
inline double transfer_cost_full(const Mode& mode, int capacity,
                                 double trip_km) {
  return mode.op_cost.eval(trip_km) * capacity * trip_km;
}

// Arrangement fee: a fixed share of the distance-based transfer cost, paid
// per unit of arrival time — fast dispatches are the expensive ones. The
// divisor is the arrival duration in minutes, floored at one minute. Due
// even when the service payment itself is zero.
inline double arrangement_cost(double ta_s, double transfer_full,
                               double arrangement_rate) {
  const double minutes = std::max(ta_s / 60.0, 1.0);
  return arrangement_rate * transfer_full / minutes;
}

//==============================================================================
// Arrival aggregation & passenger behaviour
//==============================================================================

// Mean arrival duration of the selected vehicles of one mode; 0 if none.
inline double avg_arrival(const std::vector<const CandidateVehicle*>& selected,
                          ModeKind mode) {
  double sum = 0.0;
  int n = 0;
  for (const CandidateVehicle* c : selected)
    if (c->mode == mode) {
      sum += c->ta_s;
      ++n;
    }
  return n == 0 ? 0.0 : sum / n;
}

// Share of blocked passengers who leave, as a function of the earliest
// announced replacement arrival. Ranges from alpha (instant replacement)
// to 1-beta (no replacement within the window).
inline double leaving_rate(double min_ta_s, double td_s, double alpha,
                           double beta) {
  if (!(td_s > 0.0))
    throw ValidationError("leaving_rate.td", "window", "must be > 0");
  const double r = std::min(min_ta_s, td_s) / td_s;
  return alpha + (1.0 - beta - alpha) * r;
}

// Companion indicator: willingness to keep waiting decays linearly from 1
// (instant replacement) to theta (arrival at the window's end).
inline double willingness_to_wait(double ta_s, double td_s, double theta) {
  if (!(td_s > 0.0))
    throw ValidationError("willingness_to_wait.td", "window", "must be > 0");
  const double r = std::min(ta_s, td_s) / td_s;
  return 1.0 - (1.0 - theta) * r;
}

// Leavers / served / waiting split of a blocked volume V given leaving rate
// L and the replacement seat capacity. Leavers are rounded to whole
// passengers (half up); the waiting remainder keeps the exact balance
// VL + served + VW = V whenever capacity binds.
struct PassengerSplit {
  double total = 0.0;    // V
  double leavers = 0.0;  // VL, whole passengers
  double served = 0.0;
  double waiting = 0.0;  // VW
};

inline PassengerSplit passenger_split(double volume, double leaving,
                                      double served_capacity) {
  if (volume < 0.0)
    throw ValidationError("passenger_split.volume", "split", "must be >= 0");
  PassengerSplit s;
  s.total = volume;
  s.leavers = std::min(round_half_up(leaving * volume), volume);
  const double rest = std::max(volume - s.leavers, 0.0);
  s.served = std::min(rest, served_capacity);
  s.waiting = std::max(volume - s.leavers - served_capacity, 0.0);
  return s;
}

//==============================================================================
// Z2: loyalty cost
//==============================================================================

// One Z2 contribution: leavers are compensated and charged the full window
// as lost time; waiters pay the window in time cost only. `window_s` is TD
// for primarily disrupted pairs and one headway H for deliberately
// disrupted source links.
struct LoyaltyTerm {
  std::string label;
  double leaving = 0.0;  // (CL + window*CT) * VL
  double waiting = 0.0;  // window*CT * VW
};

inline LoyaltyTerm loyalty_term(const std::string& label,
                                const PassengerSplit& split, double window_s,
                                const CostParams& p) {
  LoyaltyTerm t;
  t.label = label;
  const double window_h = window_s / 3600.0;
  t.leaving = (p.leave_cost + window_h * p.time_cost_per_h) * split.leavers;
  t.waiting = window_h * p.time_cost_per_h * split.waiting;
  return t;
}

struct LoyaltyCost {
  std::vector<LoyaltyTerm> main_terms;        // per disrupted (i,j)
  std::vector<LoyaltyTerm> deliberate_terms;  // per pulled source link (r,s)
  double leaving_main = 0.0;
  double waiting_main = 0.0;
  double leaving_deliberate = 0.0;
  double waiting_deliberate = 0.0;
  double total = 0.0;
};

inline LoyaltyCost loyalty_cost(
    const std::vector<std::pair<PassengerSplit, double>>& main_splits,
    const std::vector<std::pair<PassengerSplit, double>>& deliberate_splits,
    const CostParams& p) {
  LoyaltyCost z2;
  int k = 0;
  for (const auto& [split, window_s] : main_splits) {
    LoyaltyTerm t =
        loyalty_term("pair#" + std::to_string(k++), split, window_s, p);
    z2.leaving_main += t.leaving;
    z2.waiting_main += t.waiting;
    z2.main_terms.push_back(std::move(t));
  }
  k = 0;
  for (const auto& [split, window_s] : deliberate_splits) {
    LoyaltyTerm t =
        loyalty_term("source#" + std::to_string(k++), split, window_s, p);
    z2.leaving_deliberate += t.leaving;
    z2.waiting_deliberate += t.waiting;
    z2.deliberate_terms.push_back(std::move(t));
  }
  z2.total = z2.leaving_main + z2.waiting_main + z2.leaving_deliberate +
             z2.waiting_deliberate;
  return z2;
}

//==============================================================================
// Z1: monetary cost of the reallocation
//==============================================================================

struct VehicleCost {
  std::string vehicle_id;
  double y = 0.0;
  double transfer = 0.0;     // CS * capacity * distance (0 post-window)
  double arrangement = 0.0;  // rate * full transfer / minutes
};

struct MonetaryCost {
  std::vector<VehicleCost> items;
  double transfer = 0.0;
  double arrangement = 0.0;
  double total = 0.0;
};

// Z1 over a selection. `td_s` is the disruption window the payment phase is
// judged against; each vehicle's `ta_s` must already include any congestion
// scaling in force.
inline MonetaryCost monetary_cost(const ScenarioModel& model,
                                  const std::vector<const CandidateVehicle*>&
                                      selected,
                                  double td_s, const CostParams& p) {
  MonetaryCost z1;
  for (const CandidateVehicle* c : selected) {
    const Mode& mode = model.mode_def(c->mode);
    const double dist = vehicle_distance(*c);
    VehicleCost item;
    item.vehicle_id = c->vehicle_id;
    item.y = payment_phase(c->ta_s, td_s, p.p_min, p.p_max);
    item.transfer = service_rate(mode, dist, item.y, p) * c->capacity * dist;
    item.arrangement = arrangement_cost(
        c->ta_s, transfer_cost_full(mode, c->capacity, dist),
        p.arrangement_rate);
    z1.transfer += item.transfer;
    z1.arrangement += item.arrangement;
    z1.items.push_back(std::move(item));
  }
  z1.total = z1.transfer + z1.arrangement;
  return z1;
}

}  // namespace raas
