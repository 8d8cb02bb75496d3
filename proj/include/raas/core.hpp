#pragma once

// Core vocabulary shared by every raas component: transport mode kinds, error
// types thrown by loaders/validators, and small deterministic utilities
// (hash-based uniform draws, locale-free numeric formatting).

#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>

namespace raas {

//==============================================================================
// Modes
//==============================================================================

enum class ModeKind { Rail, Subway, Tram, Bus, Taxi, Van };

inline const char* to_string(ModeKind k) {
  switch (k) {
    case ModeKind::Rail:   return "rail";
    case ModeKind::Subway: return "subway";
    case ModeKind::Tram:   return "tram";
    case ModeKind::Bus:    return "bus";
    case ModeKind::Taxi:   return "taxi";
    case ModeKind::Van:    return "van";
  }
  return "?";
}

inline bool mode_from_string(const std::string& s, ModeKind& out) {
  if (s == "rail")   { out = ModeKind::Rail;   return true; }
  if (s == "subway") { out = ModeKind::Subway; return true; }
  if (s == "tram")   { out = ModeKind::Tram;   return true; }
  if (s == "bus")    { out = ModeKind::Bus;    return true; }
  if (s == "taxi")   { out = ModeKind::Taxi;   return true; }
  if (s == "van")    { out = ModeKind::Van;    return true; }
  return false;
}

// Scheduled modes run fixed lines with headways; free-ranging modes are
// dispatched from wherever they currently stand.
inline bool is_scheduled_mode(ModeKind k) {
  return k == ModeKind::Rail || k == ModeKind::Subway || k == ModeKind::Tram ||
         k == ModeKind::Bus;
}

//==============================================================================
// Errors
//==============================================================================

// Malformed input (bad JSON, missing/unknown keys, wrong types).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Structurally valid input violating a model invariant. Carries the offending
// field path and entity id so callers can report actionable messages.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& field, const std::string& entity,
                  const std::string& detail)
      : std::runtime_error(field + " [" + entity + "]: " + detail),
        field_(field), entity_(entity) {}
  const std::string& field() const { return field_; }
  const std::string& entity() const { return entity_; }

 private:
  std::string field_, entity_;
};

class UnknownLink : public std::runtime_error {
 public:
  explicit UnknownLink(const std::string& what) : std::runtime_error(what) {}
};

// Payment-phase rates with P_max == P_min make the post-window branch
// undefined (division by P_max - P_min).
class DegenerateRates : public std::runtime_error {
 public:
  explicit DegenerateRates(const std::string& what)
      : std::runtime_error(what) {}
};

//==============================================================================
// Deterministic utilities
//==============================================================================

// splitmix64: tiny, fully specified mixer. Used for order-independent
// per-entity draws (a reordered event queue cannot shift anyone's draw).
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform draw in [0,1) keyed by (seed, entity index). 53-bit mantissa.
inline double hash_uniform(std::uint64_t seed, std::uint64_t key) {
  const std::uint64_t h = splitmix64(splitmix64(seed) ^ key);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Locale-independent printf-style formatting (GCC 11 lacks <format>).
inline std::string strf(const char* fmt, ...) {
  va_list args;
  va_start(args, fmt);
  char buf[256];
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return std::string(buf);
}

// Commercial rounding of fractional passengers to whole ones (half away
// from zero; inputs are nonnegative in practice).
inline double round_half_up(double v) {
  return std::floor(v + 0.5);
}

// hh:mm:ss rendering for duration KPIs.
inline std::string format_hms(double seconds) {
  long long s = static_cast<long long>(seconds + 0.5);
  if (s < 0) s = 0;
  return strf("%lld:%02lld:%02lld", s / 3600, (s / 60) % 60, s % 60);
}

}  // namespace raas
