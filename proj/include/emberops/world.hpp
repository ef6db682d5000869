#pragma once

#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace emberops {

enum class TerrainClass : std::uint8_t { Road, Water, Urban, Forest };

enum class FuelType : std::uint8_t { Pine, LeafLitter, Needles, FallenLeaves, None };

inline constexpr int kFuelTypeCount = 4;  // excluding None

// Numeric values are the codes written to replay frames.
enum class BurnPhase : std::uint8_t {
  NonFlammable = 0,
  Combustible = 1,
  EarlyBurning = 2,
  FullBurning = 3,
  Extinguishing = 4,
  Burnt = 5,
};

constexpr bool is_burning(BurnPhase p) noexcept {
  return p == BurnPhase::EarlyBurning || p == BurnPhase::FullBurning;
}

struct GridCoord {
  int x = 0;
  int y = 0;
  friend constexpr auto operator<=>(const GridCoord&, const GridCoord&) = default;
};

// Continuous position in meters. Cell (x, y) spans [x*cs, (x+1)*cs) on the
// x axis and likewise on y; y grows northwards.
struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

inline double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Bearing in degrees, 0 = east (+x), 90 = north (+y), wrapped to [0, 360).
double bearing_deg(double dx, double dy);
double wrap_degrees(double deg);

struct Cell {
  TerrainClass terrain = TerrainClass::Forest;
  FuelType fuel = FuelType::Pine;
  BurnPhase phase = BurnPhase::Combustible;
  double elevation = 0.0;           // m
  double moisture = 0.0;            // [0, 1]
  double fuel_load = 0.0;           // kg/m^2
  double population_density = 0.0;  // persons/m^2, urban cells only
  double phase_minutes = 0.0;       // time spent in the current phase

  friend bool operator==(const Cell&, const Cell&) = default;
};

struct GridMap {
  int width = 0;
  int height = 0;
  double cell_size = 100.0;  // m
  std::vector<Cell> cells;   // row-major, index = y * width + x
  std::vector<GridCoord> airports;
  std::vector<GridCoord> water_sources;

  // Derived by finalize(); immutable for the lifetime of a scenario.
  std::vector<double> water_distance;  // m, cell center to nearest water source
  int flammable_count = 0;

  bool in_bounds(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }
  bool in_bounds(GridCoord c) const noexcept { return in_bounds(c.x, c.y); }
  std::size_t index(int x, int y) const noexcept { return static_cast<std::size_t>(y) * width + x; }
  std::size_t index(GridCoord c) const noexcept { return index(c.x, c.y); }
  GridCoord coord(std::size_t i) const noexcept {
    return {static_cast<int>(i % width), static_cast<int>(i / width)};
  }
  Cell& at(GridCoord c) { return cells[index(c)]; }
  const Cell& at(GridCoord c) const { return cells[index(c)]; }

  Vec2 center(GridCoord c) const noexcept { return {(c.x + 0.5) * cell_size, (c.y + 0.5) * cell_size}; }
  Vec2 center(std::size_t i) const noexcept { return center(coord(i)); }
  double width_m() const noexcept { return width * cell_size; }
  double height_m() const noexcept { return height * cell_size; }
  double diagonal_m() const noexcept { return std::hypot(width_m(), height_m()); }
  bool on_edge(GridCoord c) const noexcept {
    return c.x == 0 || c.y == 0 || c.x == width - 1 || c.y == height - 1;
  }

  // Recomputes the derived fields after the static layout changes.
  void finalize();

  friend bool operator==(const GridMap&, const GridMap&) = default;

  // Nearest airport to a position (first one on ties).
  std::size_t nearest_airport(Vec2 p) const;
  std::optional<GridCoord> nearest_water_source(Vec2 p) const;
};

struct WeatherConfig {
  double temp_min = 10.0;      // degC
  double temp_max = 30.0;      // degC
  double hum_min = 15.0;       // %
  double hum_max = 60.0;       // %
  double wind_base = 6.0;      // m/s
  double wind_amp = 2.0;       // m/s
  double wind_period = 240.0;  // min
  double day_length = 1440.0;  // min
  double wind_jitter = 10.0;   // deg half-width

  friend bool operator==(const WeatherConfig&, const WeatherConfig&) = default;
};

struct WeatherState {
  double temperature = 0.0;     // degC
  double humidity = 0.0;        // %
  double wind_speed = 0.0;      // m/s
  double wind_direction = 0.0;  // deg, heading the wind blows towards

  friend bool operator==(const WeatherState&, const WeatherState&) = default;
};

// Throws ValidationError naming the offending weather.* key.
void validate(const WeatherConfig& config);

// Uniform base heading for an episode, in [0, 360).
double sample_wind_direction(std::uint64_t episode_seed);

// Weather at a simulation minute. Temperature follows a raised-cosine bump
// peaking at day_length / 2, humidity the mirrored bump, wind speed a sine
// around its base, and wind direction the episode base heading plus a
// bounded jitter hashed from (seed, minute). Pure.
WeatherState weather_at(const WeatherConfig& config, double minute, std::uint64_t episode_seed);

}  // namespace emberops
