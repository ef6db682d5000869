#include "emberops/world.hpp"

#include <algorithm>
#include <bit>
#include <limits>
#include <numbers>

#include "emberops/errors.hpp"
#include "emberops/rng.hpp"

namespace emberops {

double wrap_degrees(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  // fmod of a tiny negative can round back up to exactly 360
  if (w >= 360.0) w = 0.0;
  return w;
}

double bearing_deg(double dx, double dy) {
  return wrap_degrees(std::atan2(dy, dx) * 180.0 / std::numbers::pi);
}

void GridMap::finalize() {
  flammable_count = 0;
  for (const Cell& c : cells) {
    if (c.terrain == TerrainClass::Urban || c.terrain == TerrainClass::Forest) ++flammable_count;
  }
  water_distance.assign(cells.size(), std::numeric_limits<double>::infinity());
  if (water_sources.empty()) return;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Vec2 p = center(i);
    double best = std::numeric_limits<double>::infinity();
    for (GridCoord w : water_sources) best = std::min(best, distance(p, center(w)));
    water_distance[i] = best;
  }
}

std::size_t GridMap::nearest_airport(Vec2 p) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < airports.size(); ++i) {
    const double d = distance(p, center(airports[i]));
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

std::optional<GridCoord> GridMap::nearest_water_source(Vec2 p) const {
  std::optional<GridCoord> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (GridCoord w : water_sources) {
    const double d = distance(p, center(w));
    if (d < best_d) {
      best_d = d;
      best = w;
    }
  }
  return best;
}

void validate(const WeatherConfig& c) {
  if (!(c.temp_min <= c.temp_max)) throw ValidationError("weather.temp_min", "must not exceed temp_max");
  if (!(c.hum_min <= c.hum_max)) throw ValidationError("weather.hum_min", "must not exceed hum_max");
  if (!(c.wind_base >= 0.0)) throw ValidationError("weather.wind_base", "must be non-negative");
  if (!(c.wind_amp >= 0.0)) throw ValidationError("weather.wind_amp", "must be non-negative");
  if (c.wind_amp > 0.0 && !(c.wind_amp < c.wind_base))
    throw ValidationError("weather.wind_amp", "must be below wind_base so speed stays non-negative");
  if (!(c.wind_period > 0.0)) throw ValidationError("weather.wind_period", "must be positive");
  if (!(c.day_length > 0.0)) throw ValidationError("weather.day_length", "must be positive");
  if (!(c.wind_jitter >= 0.0 && c.wind_jitter <= 180.0))
    throw ValidationError("weather.wind_jitter", "must lie in [0, 180]");
}

double sample_wind_direction(std::uint64_t episode_seed) {
  return 360.0 * unit_from_bits(hash64(episode_seed, salt::kWindBase));
}

WeatherState weather_at(const WeatherConfig& config, double minute, std::uint64_t episode_seed) {
  if (!(minute >= 0.0) || minute > config.day_length)
    throw OutOfRange("weather_at: minute outside [0, day_length]");

  constexpr double two_pi = 2.0 * std::numbers::pi;
  // Fold onto the first half so the bump is exactly symmetric about midday.
  const double folded = std::min(minute, config.day_length - minute);
  const double bump = 0.5 * (1.0 - std::cos(two_pi * folded / config.day_length));

  WeatherState w;
  w.temperature = std::lerp(config.temp_min, config.temp_max, bump);
  w.humidity = std::lerp(config.hum_max, config.hum_min, bump);
  w.wind_speed = std::max(0.0, config.wind_base + config.wind_amp * std::sin(two_pi * minute / config.wind_period));

  const std::uint64_t jitter_bits =
      hash64(hash64(episode_seed, salt::kWindJitter), std::bit_cast<std::uint64_t>(minute));
  const double jitter = (2.0 * unit_from_bits(jitter_bits) - 1.0) * config.wind_jitter;
  w.wind_direction = wrap_degrees(sample_wind_direction(episode_seed) + jitter);
  return w;
}

}  // namespace emberops
