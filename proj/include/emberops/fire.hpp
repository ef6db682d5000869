#pragma once

#include <array>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <optional>
#include <vector>

#include "emberops/rng.hpp"
#include "emberops/world.hpp"

namespace emberops {

// Probabilistic cellular-automaton spread law. A Combustible 8-neighbour of a
// FullBurning cell ignites within one minute with probability
//
//   clamp(base * flammability(fuel) * exp(wind_coupling * w * cos(wind - bearing))
//         * (1 + slope_coupling * max(0, atan(rise / run)))
//         * (1 + temp_coupling * T^) * (1 - humidity_coupling * H^)
//         * (1 - moisture), 0, 1)
//
// where T^ and H^ are temperature and humidity normalised to their ranges.
struct SpreadParams {
  double base_ignition_prob = 0.15;
  std::array<double, kFuelTypeCount> fuel_flammability{1.0, 1.3, 1.15, 1.2};
  double wind_coupling = 0.12;  // per m/s
  double slope_coupling = 1.0;  // per radian
  double temp_coupling = 0.3;
  double humidity_coupling = 0.5;
  double early_dwell = 10.0;       // min
  double full_dwell = 30.0;        // min
  double extinguish_dwell = 20.0;  // min
  double saturation = 0.5;         // L/m^2 of suppressant that saturates a cell

  // Normalisation ranges for T^ and H^, copied from the scenario weather.
  double temp_min = 0.0, temp_max = 1.0;
  double hum_min = 0.0, hum_max = 1.0;

  double flammability(FuelType f) const {
    return f == FuelType::None ? 0.0 : fuel_flammability[static_cast<std::size_t>(f)];
  }

  friend bool operator==(const SpreadParams&, const SpreadParams&) = default;
};

void validate(const SpreadParams& params);

struct Transition {
  std::size_t cell = 0;
  BurnPhase from = BurnPhase::Combustible;
  BurnPhase to = BurnPhase::EarlyBurning;
  std::optional<std::size_t> source;  // igniting cell, for spread events

  friend bool operator==(const Transition&, const Transition&) = default;
};

// Sets a Combustible cell to EarlyBurning. Throws OutOfBounds / NotFlammable.
void ignite(GridMap& map, GridCoord at);

double ignition_probability(const GridMap& map, std::size_t source, std::size_t target,
                            const WeatherState& weather, const SpreadParams& params);

// Advances the fire by dt minutes: spread from FullBurning cells (decided
// synchronously from the phases at entry) and dwell-driven transitions along
// Combustible -> EarlyBurning -> FullBurning -> Extinguishing -> Burnt.
std::vector<Transition> step_fire(GridMap& map, const WeatherState& weather, const SpreadParams& params,
                                  double dt, RngStream& rng);

// Suppressant drop pattern: a segment with a width, in meters.
struct Footprint {
  Vec2 start;
  Vec2 end;
  double width = 60.0;

  double length() const { return distance(start, end); }
  double area() const { return length() * width; }
  friend bool operator==(const Footprint&, const Footprint&) = default;
};

// Indices of cells whose square overlaps the footprint rectangle with
// positive area, in ascending order.
std::vector<std::size_t> footprint_cells(const GridMap& map, const Footprint& footprint);

struct SuppressionResult {
  int suppressed_count = 0;
  std::vector<std::size_t> covered;
  std::vector<Transition> transitions;
};

// Burning cells under the footprint go to Extinguishing; Combustible ones gain
// moisture amount / (area * saturation), clamped to 1. Throws
// DegenerateFootprint for a zero-length or zero-width footprint.
SuppressionResult apply_suppressant(GridMap& map, const Footprint& footprint, double amount_l,
                                    const SpreadParams& params);

struct DamageLedger {
  double burnt_area = 0.0;  // m^2
  double cost = 0.0;        // EUR
  double emissions = 0.0;   // t CO2
  double casualties = 0.0;  // persons (expected)

  friend bool operator==(const DamageLedger&, const DamageLedger&) = default;
};

struct DamageCoeffs {
  double cost_per_urban_cell = 2.0e6;
  double cost_per_forest_cell = 5.0e4;
  double emissions_per_kg_fuel = 1.6e-3;  // t CO2 per kg
  double lethality = 0.01;

  friend bool operator==(const DamageCoeffs&, const DamageCoeffs&) = default;
};

struct RegionMaxima {
  double burnt_area = 1.0;
  double cost = 1.0;
  double emissions = 1.0;
  double casualties = 1.0;

  friend bool operator==(const RegionMaxima&, const RegionMaxima&) = default;
};

// Damage if every flammable cell of the map burnt.
DamageLedger total_damage(const GridMap& map, const DamageCoeffs& coeffs);

DamageLedger accrue_damage(const DamageLedger& ledger, const std::vector<Transition>& transitions,
                           const GridMap& map, const DamageCoeffs& coeffs);

// Ignitions attributed to their source cell over a trailing time window.
class SpreadTracker {
 public:
  explicit SpreadTracker(double window_minutes = 10.0) : window_(window_minutes) {}

  void record(const std::vector<Transition>& transitions, double minute);
  // Drops events at or before now - window.
  void prune(double now);
  int recent_ignitions(std::size_t cell) const;
  void clear() { events_.clear(); }

 private:
  struct Event {
    std::size_t source;
    double minute;
  };
  double window_;
  std::deque<Event> events_;
};

// Cells accumulated from indirect-mode drops during the current episode.
struct FireLine {
  std::vector<std::size_t> cells;  // sorted, unique

  void add(const std::vector<std::size_t>& covered);
  bool empty() const { return cells.empty(); }
};

struct FireStats {
  int active_front_count = 0;  // burning cells
  double burnt_fraction = 0.0;
  Vec2 fire_center;  // cell coordinates
  double spread_angle = 0.0;
  std::array<double, 4> dist_to_boundaries{};  // N, E, S, W in m
  double dist_to_water = 0.0;                  // m
  double dist_to_fireline = 0.0;               // m; map diagonal with no fire line
};

std::vector<std::size_t> burning_cells(const GridMap& map);
// Burning cells with at least one Combustible 8-neighbour.
std::vector<std::size_t> frontier_cells(const GridMap& map);

// previous supplies the centre and spread angle when nothing is burning or no
// frontier cell has spread recently.
FireStats fire_stats(const GridMap& map, const FireLine& fireline, const SpreadTracker& tracker,
                     const FireStats* previous = nullptr);

// Binary PGM (P5, maxval 5) of burn-phase codes; the first row is the
// northern edge.
void write_frame_pgm(const GridMap& map, const std::filesystem::path& path);

}  // namespace emberops
