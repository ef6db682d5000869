#pragma once

#include <array>
#include <filesystem>
#include <string>

#include "emberops/fire.hpp"
#include "emberops/fleet.hpp"
#include "emberops/world.hpp"

namespace emberops {

struct EpisodeConfig {
  int step_minutes = 10;
  int max_steps = 96;
  int detection_delay_min = 60;
  double discount = 0.99;

  friend bool operator==(const EpisodeConfig&, const EpisodeConfig&) = default;
};

// Per-fuel constants shared by every cell of that fuel type.
struct FuelTable {
  std::array<double, kFuelTypeCount> load_kg_m2{2.0, 0.8, 1.2, 1.0};

  friend bool operator==(const FuelTable&, const FuelTable&) = default;
};

// Everything a scenario file describes. Cells carry derived per-cell values
// (fuel load, moisture, population density) expanded from the scalar keys.
struct Scenario {
  std::string name;
  GridMap map;
  GridCoord ignition;
  WeatherConfig weather;
  FleetConfig fleet;
  EpisodeConfig episode;
  RegionMaxima maxima;
  DamageCoeffs damage;
  SpreadParams spread;
  FuelTable fuel;
  double base_moisture = 0.1;
  double urban_population_density = 0.004;  // persons/m^2
  FuelType urban_fuel = FuelType::LeafLitter;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Throws ParseError (malformed text, missing or mistyped key) or
// ValidationError (broken invariant); both name the offending key.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);

// Inverse of parse_scenario: parse_scenario(serialize_scenario(s)) == s.
std::string serialize_scenario(const Scenario& scenario);

// Applies the invariant checks that load_scenario runs.
void validate(const Scenario& scenario);

char terrain_code(const Cell& cell);

}  // namespace emberops
