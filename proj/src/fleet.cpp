#include "emberops/fleet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "emberops/errors.hpp"

namespace emberops {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// 8-neighbour offset closest to a bearing.
GridCoord offset_towards(double bearing) {
  static constexpr std::array<GridCoord, 8> kOffsets{{
      {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1}, {0, -1}, {1, -1},
  }};
  const int k = static_cast<int>(std::lround(wrap_degrees(bearing) / 45.0)) % 8;
  return kOffsets[static_cast<std::size_t>(k)];
}

std::vector<std::size_t> candidate_cells(const GridMap& map) {
  std::vector<std::size_t> cells = frontier_cells(map);
  if (cells.empty()) cells = burning_cells(map);
  return cells;
}

GridCoord clamp_to_map(const GridMap& map, double x, double y) {
  return {std::clamp(static_cast<int>(std::lround(x)), 0, map.width - 1),
          std::clamp(static_cast<int>(std::lround(y)), 0, map.height - 1)};
}

Footprint segment(Vec2 center, double heading_deg, double length, double width) {
  const double h = heading_deg * kDegToRad;
  const Vec2 half{std::cos(h) * length / 2.0, std::sin(h) * length / 2.0};
  return {{center.x - half.x, center.y - half.y}, {center.x + half.x, center.y + half.y}, width};
}

}  // namespace

Tactic decode_tactic(int index) {
  if (index < 0 || index >= kTacticCount) throw OutOfRange("decode_tactic: index outside 0..23");
  return {static_cast<SelectPoi>(index / (kTrackPoiCount * kSuppressModeCount)),
          static_cast<TrackPoi>((index / kSuppressModeCount) % kTrackPoiCount),
          static_cast<SuppressMode>(index % kSuppressModeCount)};
}

int encode_tactic(const Tactic& t) {
  return static_cast<int>(t.select) * kTrackPoiCount * kSuppressModeCount +
         static_cast<int>(t.track) * kSuppressModeCount + static_cast<int>(t.suppress);
}

std::string to_string(const Tactic& t) {
  static constexpr std::array<const char*, 4> kSelect{"water", "vegetation", "upslope", "ellipse"};
  static constexpr std::array<const char*, 3> kTrack{"direct", "indirect", "follow"};
  static constexpr std::array<const char*, 2> kSuppress{"direct", "indirect"};
  return std::string(kSelect[static_cast<std::size_t>(t.select)]) + "/" +
         kTrack[static_cast<std::size_t>(t.track)] + "/" + kSuppress[static_cast<std::size_t>(t.suppress)];
}

double altitude_for(FlightPhase phase) {
  switch (phase) {
    case FlightPhase::Transit:
      return 300.0;
    case FlightPhase::Dropping:
      return 50.0;
    case FlightPhase::Scooping:
    case FlightPhase::AtBase:
    case FlightPhase::Refueling:
      return 0.0;
  }
  return 0.0;
}

Aircraft make_aircraft(int id, const AircraftSpec& spec, const GridMap& map) {
  Aircraft a;
  a.id = id;
  a.spec = spec;
  const Vec2 p = map.center(map.airports.at(static_cast<std::size_t>(spec.start_airport)));
  a.position = {p.x, p.y, 0.0};
  return a;
}

GridCoord select_poi(const Tactic& tactic, const FireContext& ctx) {
  const GridMap& map = ctx.map;
  const std::vector<std::size_t> candidates = candidate_cells(map);
  if (candidates.empty()) throw NoFire("select_poi: no burning cell");

  switch (tactic.select) {
    case SelectPoi::WaterResources: {
      std::size_t best = candidates.front();
      for (std::size_t i : candidates) {
        if (map.water_distance[i] < map.water_distance[best]) best = i;
      }
      return map.coord(best);
    }
    case SelectPoi::CombustibleVegetation: {
      const GridCoord off = offset_towards(ctx.weather.wind_direction);
      std::size_t best = candidates.front();
      double best_score = -1.0;
      for (std::size_t i : candidates) {
        const GridCoord c = map.coord(i);
        const GridCoord n{c.x + off.x, c.y + off.y};
        double score = 0.0;
        if (map.in_bounds(n)) {
          const Cell& down = map.at(n);
          if (down.phase == BurnPhase::Combustible) score = ctx.params.flammability(down.fuel) * down.fuel_load;
        }
        if (score > best_score) {
          best_score = score;
          best = i;
        }
      }
      return map.coord(best);
    }
    case SelectPoi::UpslopeSpread: {
      const GridCoord off = offset_towards(ctx.stats.spread_angle);
      const double run = std::hypot(off.x, off.y) * map.cell_size;
      std::size_t best = candidates.front();
      double best_score = -1.0;
      for (std::size_t i : candidates) {
        const GridCoord c = map.coord(i);
        const GridCoord n{c.x + off.x, c.y + off.y};
        double score = 0.0;
        if (map.in_bounds(n)) score = std::max(0.0, (map.at(n).elevation - map.cells[i].elevation) / run);
        if (score > best_score) {
          best_score = score;
          best = i;
        }
      }
      return map.coord(best);
    }
    case SelectPoi::IndirectEllipse: {
      const Vec2 c = ctx.stats.fire_center;
      double reach_x = 0.0, reach_y = 0.0;
      for (std::size_t i : burning_cells(map)) {
        const GridCoord g = map.coord(i);
        reach_x = std::max(reach_x, std::abs(g.x - c.x));
        reach_y = std::max(reach_y, std::abs(g.y - c.y));
      }
      const double a = std::max(1.0, kEllipseScale * reach_x);
      const double b = std::max(1.0, kEllipseScale * reach_y);
      const double phi = ctx.stats.spread_angle * kDegToRad;
      return clamp_to_map(map, c.x + a * std::cos(phi), c.y + b * std::sin(phi));
    }
  }
  return map.coord(candidates.front());
}

GridCoord track_poi(const Tactic& tactic, GridCoord current, const FireContext& ctx) {
  const GridMap& map = ctx.map;
  auto reselect = [&]() {
    try {
      return select_poi(tactic, ctx);
    } catch (const NoFire&) {
      return current;
    }
  };

  switch (tactic.track) {
    case TrackPoi::Direct:
      return current;
    case TrackPoi::Indirect: {
      const BurnPhase p = map.at(current).phase;
      if (p == BurnPhase::Burnt || p == BurnPhase::Extinguishing) return reselect();
      return current;
    }
    case TrackPoi::FollowFireFront: {
      const double r2 = kFollowRadiusCells * kFollowRadiusCells;
      std::optional<std::size_t> best;
      int best_count = -1;
      for (std::size_t i : frontier_cells(map)) {
        const GridCoord c = map.coord(i);
        const double dx = c.x - current.x;
        const double dy = c.y - current.y;
        if (dx * dx + dy * dy > r2) continue;
        const int n = ctx.tracker.recent_ignitions(i);
        if (n > best_count) {
          best_count = n;
          best = i;
        }
      }
      return best ? map.coord(*best) : reselect();
    }
  }
  return current;
}

double return_margin(const Aircraft& a, const GridMap& map) {
  const Vec2 p = a.planar();
  const double d = distance(p, map.center(map.airports.at(map.nearest_airport(p))));
  return a.propellant - a.spec.burn_rate_per_min * (d / a.spec.cruise_speed_mps / 60.0);
}

double return_trigger(const Aircraft& a, double dt) { return 2.0 * a.spec.burn_rate_per_min * dt; }

Footprint plan_drop(const Aircraft& a, const Tactic& tactic, const FireContext& ctx) {
  const GridMap& map = ctx.map;
  const GridCoord poi = a.current_poi.value_or(clamp_to_map(map, a.position.x / map.cell_size - 0.5,
                                                            a.position.y / map.cell_size - 0.5));
  const Vec2 center = map.center(poi);
  const double len = a.spec.drop_length_m;
  const double width = a.spec.drop_width_m;

  if (tactic.suppress == SuppressMode::IndirectSuppress) {
    // Tangential to the spread direction, one and a half cells ahead of the POI.
    const double s = ctx.stats.spread_angle * kDegToRad;
    const double ahead = 1.5 * map.cell_size;
    const Vec2 c{center.x + std::cos(s) * ahead, center.y + std::sin(s) * ahead};
    return segment(c, ctx.stats.spread_angle + 90.0, len, width);
  }

  // Maximise burning cells captured, discounting cells already being put out.
  Footprint best = segment(center, 0.0, len, width);
  double best_score = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < kDropHeadings; ++k) {
    const Footprint fp = segment(center, k * 180.0 / kDropHeadings, len, width);
    double score = 0.0;
    for (std::size_t i : footprint_cells(map, fp)) {
      const BurnPhase p = map.cells[i].phase;
      if (is_burning(p)) score += 1.0;
      else if (p == BurnPhase::Extinguishing) score -= 0.5;
    }
    if (score > best_score) {
      best_score = score;
      best = fp;
    }
  }
  return best;
}

AdvanceResult advance_aircraft(Aircraft& a, const Tactic& tactic, const FireContext& ctx, double dt) {
  AdvanceResult result;
  if (!(dt > 0.0)) return result;
  const GridMap& map = ctx.map;

  if (a.airborne()) {
    a.propellant = std::max(0.0, a.propellant - a.spec.burn_rate_per_min * dt);
    if (!a.returning && return_margin(a, map) <= return_trigger(a, dt)) {
      a.returning = true;
      a.phase = FlightPhase::Transit;
      a.phase_minutes = 0.0;
    }
  }

  switch (a.phase) {
    case FlightPhase::AtBase:
      if (a.propellant < 1.0) {
        a.phase = FlightPhase::Refueling;
        a.phase_minutes = 0.0;
        break;
      }
      a.phase = FlightPhase::Transit;
      [[fallthrough]];
    case FlightPhase::Transit: {
      std::optional<Vec2> target;
      if (a.returning) {
        target = map.center(map.airports.at(map.nearest_airport(a.planar())));
      } else if (a.payload > 0.0) {
        if (a.current_poi) target = map.center(*a.current_poi);
      } else if (auto w = map.nearest_water_source(a.planar())) {
        target = map.center(*w);
      }
      if (!target) break;  // hold position

      const Vec2 p = a.planar();
      const double d = distance(p, *target);
      const double reach = a.spec.cruise_speed_mps * 60.0 * dt;
      if (d > reach) {
        a.position.x = p.x + (target->x - p.x) * reach / d;
        a.position.y = p.y + (target->y - p.y) * reach / d;
        break;
      }
      a.position.x = target->x;
      a.position.y = target->y;
      a.phase_minutes = 0.0;
      if (a.returning) {
        a.phase = FlightPhase::Refueling;
      } else if (a.payload > 0.0) {
        a.phase = FlightPhase::Dropping;
      } else {
        a.phase = FlightPhase::Scooping;
      }
      break;
    }
    case FlightPhase::Scooping:
      a.phase_minutes += dt;
      a.payload = std::min(a.spec.capacity_l, a.payload + a.spec.capacity_l * dt / a.spec.scoop_time_min);
      if (a.payload >= a.spec.capacity_l) {
        a.phase = FlightPhase::Transit;
        a.phase_minutes = 0.0;
      }
      break;
    case FlightPhase::Dropping:
      if (a.payload > 0.0) {
        result.drops.push_back({a.id, plan_drop(a, tactic, ctx), a.payload, tactic.suppress});
        a.payload = 0.0;
      }
      a.phase = FlightPhase::Transit;
      break;
    case FlightPhase::Refueling:
      a.phase_minutes += dt;
      a.propellant = std::min(1.0, a.propellant + dt / a.spec.refuel_time_min);
      if (a.propellant >= 1.0) {
        a.phase = FlightPhase::AtBase;
        a.returning = false;
        a.phase_minutes = 0.0;
      }
      break;
  }
  a.position.z = altitude_for(a.phase);
  return result;
}

}  // namespace emberops
