#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emberops/fire.hpp"
#include "emberops/world.hpp"

namespace emberops {

enum class SelectPoi : std::uint8_t { WaterResources, CombustibleVegetation, UpslopeSpread, IndirectEllipse };
enum class TrackPoi : std::uint8_t { Direct, Indirect, FollowFireFront };
enum class SuppressMode : std::uint8_t { DirectSuppress, IndirectSuppress };

inline constexpr int kSelectPoiCount = 4;
inline constexpr int kTrackPoiCount = 3;
inline constexpr int kSuppressModeCount = 2;
inline constexpr int kTacticCount = kSelectPoiCount * kTrackPoiCount * kSuppressModeCount;

struct Tactic {
  SelectPoi select = SelectPoi::WaterResources;
  TrackPoi track = TrackPoi::Direct;
  SuppressMode suppress = SuppressMode::DirectSuppress;

  friend constexpr auto operator<=>(const Tactic&, const Tactic&) = default;
};

// Mixed radix: index = select * 6 + track * 2 + suppress.
Tactic decode_tactic(int index);
int encode_tactic(const Tactic& tactic);
std::string to_string(const Tactic& tactic);

struct AircraftSpec {
  std::string type = "DHC-515";
  double cruise_speed_mps = 92.5;       // 333 km/h
  double capacity_l = 7000.0;
  double burn_rate_per_min = 1.0 / 240.0;  // ~4 h endurance
  int start_airport = 0;
  double scoop_time_min = 2.0;
  double refuel_time_min = 20.0;
  double drop_length_m = 400.0;
  double drop_width_m = 60.0;

  friend bool operator==(const AircraftSpec&, const AircraftSpec&) = default;
};

using FleetConfig = std::vector<AircraftSpec>;

enum class FlightPhase : std::uint8_t { AtBase, Transit, Scooping, Dropping, Refueling };

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  friend bool operator==(const Vec3&, const Vec3&) = default;
};

// Fixed altitude band per phase; kinematics are planar.
double altitude_for(FlightPhase phase);
inline constexpr double kMaxAltitude = 300.0;

struct Aircraft {
  int id = 0;
  AircraftSpec spec;
  Vec3 position;
  double payload = 0.0;     // L
  double propellant = 1.0;  // fraction
  FlightPhase phase = FlightPhase::AtBase;
  std::optional<GridCoord> current_poi;
  bool returning = false;      // safety override towards the nearest airport
  double phase_minutes = 0.0;  // time spent scooping / refuelling

  Vec2 planar() const { return {position.x, position.y}; }
  bool airborne() const {
    return phase == FlightPhase::Transit || phase == FlightPhase::Scooping || phase == FlightPhase::Dropping;
  }
  friend bool operator==(const Aircraft&, const Aircraft&) = default;
};

Aircraft make_aircraft(int id, const AircraftSpec& spec, const GridMap& map);

// Everything the tactic logic reads about the fire at one instant.
struct FireContext {
  const GridMap& map;
  const FireStats& stats;
  const WeatherState& weather;
  const SpreadTracker& tracker;
  const SpreadParams& params;
};

// Radius within which FollowFireFront searches for the fastest frontier cell.
inline constexpr double kFollowRadiusCells = 10.0;
// Scale applied to the burning set's bounding ellipse for IndirectEllipse.
inline constexpr double kEllipseScale = 1.5;
// Candidate headings tried when orienting a direct drop.
inline constexpr int kDropHeadings = 16;

// Throws NoFire when there is no burning cell to reason about.
GridCoord select_poi(const Tactic& tactic, const FireContext& ctx);

GridCoord track_poi(const Tactic& tactic, GridCoord current_poi, const FireContext& ctx);

// Propellant left after reserving what the flight to the nearest airport needs.
double return_margin(const Aircraft& aircraft, const GridMap& map);

// The forced return triggers once the margin falls to this buffer, which covers
// one minute of outbound flight so the override can never fire too late.
double return_trigger(const Aircraft& aircraft, double dt);

Footprint plan_drop(const Aircraft& aircraft, const Tactic& tactic, const FireContext& ctx);

struct DropEvent {
  int aircraft_id = 0;
  Footprint footprint;
  double amount_l = 0.0;
  SuppressMode mode = SuppressMode::DirectSuppress;
};

struct AdvanceResult {
  std::vector<DropEvent> drops;
};

// One time slice of the aircraft state machine.
AdvanceResult advance_aircraft(Aircraft& aircraft, const Tactic& tactic, const FireContext& ctx, double dt);

}  // namespace emberops
