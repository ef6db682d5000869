#include "emberops/fire.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "emberops/errors.hpp"

namespace emberops {

namespace {

constexpr std::array<std::array<int, 2>, 8> kNeighbours{{
    {-1, -1}, {0, -1}, {1, -1}, {-1, 0}, {1, 0}, {-1, 1}, {0, 1}, {1, 1},
}};

double normalised(double v, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
}

}  // namespace

void validate(const SpreadParams& p) {
  auto non_negative = [](double v, const char* key) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ValidationError(key, "must be finite and non-negative");
  };
  non_negative(p.base_ignition_prob, "spread.base_ignition_prob");
  for (double f : p.fuel_flammability) non_negative(f, "fuel.flammability");
  non_negative(p.wind_coupling, "spread.wind_coupling");
  non_negative(p.slope_coupling, "spread.slope_coupling");
  non_negative(p.temp_coupling, "spread.temp_coupling");
  non_negative(p.humidity_coupling, "spread.humidity_coupling");
  if (p.humidity_coupling > 1.0) throw ValidationError("spread.humidity_coupling", "must not exceed 1");
  if (!(p.early_dwell > 0.0)) throw ValidationError("spread.early_dwell_min", "must be positive");
  if (!(p.full_dwell > 0.0)) throw ValidationError("spread.full_dwell_min", "must be positive");
  if (!(p.extinguish_dwell > 0.0)) throw ValidationError("spread.extinguish_dwell_min", "must be positive");
  if (!(p.saturation > 0.0)) throw ValidationError("spread.saturation_l_per_m2", "must be positive");
}

void ignite(GridMap& map, GridCoord at) {
  if (!map.in_bounds(at)) throw OutOfBounds("ignite: cell outside the map");
  Cell& c = map.at(at);
  if (c.phase != BurnPhase::Combustible) throw NotFlammable("ignite: cell is not combustible");
  c.phase = BurnPhase::EarlyBurning;
  c.phase_minutes = 0.0;
}

double ignition_probability(const GridMap& map, std::size_t source, std::size_t target,
                            const WeatherState& weather, const SpreadParams& params) {
  const Cell& to = map.cells[target];
  const GridCoord s = map.coord(source);
  const GridCoord t = map.coord(target);
  const double dx = t.x - s.x;
  const double dy = t.y - s.y;
  const double run = std::hypot(dx, dy) * map.cell_size;

  const double theta = std::atan2(dy, dx);
  const double wind = weather.wind_direction * std::numbers::pi / 180.0;
  const double wind_term = std::exp(params.wind_coupling * weather.wind_speed * std::cos(wind - theta));

  const double rise = to.elevation - map.cells[source].elevation;
  const double slope = std::atan2(rise, run);
  const double slope_term = 1.0 + params.slope_coupling * std::max(0.0, slope);

  const double t_hat = normalised(weather.temperature, params.temp_min, params.temp_max);
  const double h_hat = normalised(weather.humidity, params.hum_min, params.hum_max);

  const double p = params.base_ignition_prob * params.flammability(to.fuel) * wind_term * slope_term *
                   (1.0 + params.temp_coupling * t_hat) * (1.0 - params.humidity_coupling * h_hat) *
                   (1.0 - to.moisture);
  return std::clamp(p, 0.0, 1.0);
}

std::vector<Transition> step_fire(GridMap& map, const WeatherState& weather, const SpreadParams& params,
                                  double dt, RngStream& rng) {
  std::vector<Transition> out;
  if (!(dt > 0.0)) return out;

  // Spread is decided against the phases at entry; ignitions land afterwards.
  std::vector<Transition> ignitions;
  std::vector<char> claimed(map.cells.size(), 0);
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    if (map.cells[i].phase != BurnPhase::FullBurning) continue;
    const GridCoord s = map.coord(i);
    for (auto [ox, oy] : kNeighbours) {
      const int nx = s.x + ox;
      const int ny = s.y + oy;
      if (!map.in_bounds(nx, ny)) continue;
      const std::size_t j = map.index(nx, ny);
      if (claimed[j] || map.cells[j].phase != BurnPhase::Combustible) continue;
      const double p = ignition_probability(map, i, j, weather, params);
      const double p_dt = dt == 1.0 ? p : 1.0 - std::pow(1.0 - p, dt);
      // Always consume a draw so the stream position does not depend on p.
      const double u = uniform01(rng);
      if (u < p_dt) {
        claimed[j] = 1;
        ignitions.push_back({j, BurnPhase::Combustible, BurnPhase::EarlyBurning, i});
      }
    }
  }

  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    Cell& c = map.cells[i];
    double dwell;
    BurnPhase next;
    switch (c.phase) {
      case BurnPhase::EarlyBurning:
        dwell = params.early_dwell;
        next = BurnPhase::FullBurning;
        break;
      case BurnPhase::FullBurning:
        dwell = params.full_dwell;
        next = BurnPhase::Extinguishing;
        break;
      case BurnPhase::Extinguishing:
        dwell = params.extinguish_dwell;
        next = BurnPhase::Burnt;
        break;
      default:
        continue;
    }
    c.phase_minutes += dt;
    if (c.phase_minutes >= dwell) {
      out.push_back({i, c.phase, next, std::nullopt});
      c.phase = next;
      c.phase_minutes -= dwell;
    }
  }

  for (const Transition& t : ignitions) {
    Cell& c = map.cells[t.cell];
    c.phase = BurnPhase::EarlyBurning;
    c.phase_minutes = 0.0;
    out.push_back(t);
  }
  return out;
}

std::vector<std::size_t> footprint_cells(const GridMap& map, const Footprint& fp) {
  std::vector<std::size_t> out;
  const double len = fp.length();
  if (!(len > 0.0) || !(fp.width > 0.0)) return out;

  const Vec2 c{(fp.start.x + fp.end.x) / 2.0, (fp.start.y + fp.end.y) / 2.0};
  const Vec2 u{(fp.end.x - fp.start.x) / len, (fp.end.y - fp.start.y) / len};
  const Vec2 v{-u.y, u.x};
  const double hl = len / 2.0;
  const double hw = fp.width / 2.0;
  const double hs = map.cell_size / 2.0;

  // Bounding box of the rectangle.
  const double ex = std::abs(u.x) * hl + std::abs(v.x) * hw;
  const double ey = std::abs(u.y) * hl + std::abs(v.y) * hw;
  const int x0 = std::max(0, static_cast<int>(std::floor((c.x - ex) / map.cell_size)));
  const int x1 = std::min(map.width - 1, static_cast<int>(std::floor((c.x + ex) / map.cell_size)));
  const int y0 = std::max(0, static_cast<int>(std::floor((c.y - ey) / map.cell_size)));
  const int y1 = std::min(map.height - 1, static_cast<int>(std::floor((c.y + ey) / map.cell_size)));

  constexpr double kEps = 1e-9;
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      const Vec2 q = map.center(GridCoord{x, y});
      const double dx = q.x - c.x;
      const double dy = q.y - c.y;
      // Separating axes: the square's x / y axes and the rectangle's u / v.
      if (std::abs(dx) >= hs + ex - kEps) continue;
      if (std::abs(dy) >= hs + ey - kEps) continue;
      const double square_on_u = hs * (std::abs(u.x) + std::abs(u.y));
      const double square_on_v = hs * (std::abs(v.x) + std::abs(v.y));
      if (std::abs(dx * u.x + dy * u.y) >= hl + square_on_u - kEps) continue;
      if (std::abs(dx * v.x + dy * v.y) >= hw + square_on_v - kEps) continue;
      out.push_back(map.index(x, y));
    }
  }
  return out;
}

SuppressionResult apply_suppressant(GridMap& map, const Footprint& fp, double amount_l,
                                    const SpreadParams& params) {
  if (!(fp.length() > 0.0)) throw DegenerateFootprint("apply_suppressant: zero-length footprint");
  if (!(fp.width > 0.0)) throw DegenerateFootprint("apply_suppressant: footprint width must be positive");
  if (!(amount_l > 0.0)) throw DegenerateFootprint("apply_suppressant: amount must be positive");

  SuppressionResult r;
  r.covered = footprint_cells(map, fp);
  const double wetting = amount_l / (fp.area() * params.saturation);
  for (std::size_t i : r.covered) {
    Cell& c = map.cells[i];
    if (is_burning(c.phase)) {
      r.transitions.push_back({i, c.phase, BurnPhase::Extinguishing, std::nullopt});
      c.phase = BurnPhase::Extinguishing;
      c.phase_minutes = 0.0;
      ++r.suppressed_count;
    } else if (c.phase == BurnPhase::Combustible) {
      c.moisture = std::min(1.0, c.moisture + wetting);
    }
  }
  return r;
}

namespace {

DamageLedger cell_damage(const Cell& c, double area, const DamageCoeffs& k) {
  DamageLedger d;
  if (c.terrain == TerrainClass::Forest) {
    d.burnt_area = area;
    d.cost = k.cost_per_forest_cell;
    d.emissions = k.emissions_per_kg_fuel * c.fuel_load * area;
  } else if (c.terrain == TerrainClass::Urban) {
    d.burnt_area = area;
    d.cost = k.cost_per_urban_cell;
    d.casualties = k.lethality * c.population_density * area;
  }
  return d;
}

}  // namespace

DamageLedger total_damage(const GridMap& map, const DamageCoeffs& coeffs) {
  const double area = map.cell_size * map.cell_size;
  DamageLedger total;
  for (const Cell& c : map.cells) {
    const DamageLedger d = cell_damage(c, area, coeffs);
    total.burnt_area += d.burnt_area;
    total.cost += d.cost;
    total.emissions += d.emissions;
    total.casualties += d.casualties;
  }
  return total;
}

DamageLedger accrue_damage(const DamageLedger& ledger, const std::vector<Transition>& transitions,
                           const GridMap& map, const DamageCoeffs& coeffs) {
  const double area = map.cell_size * map.cell_size;
  DamageLedger out = ledger;
  for (const Transition& t : transitions) {
    if (t.to != BurnPhase::Burnt) continue;
    const DamageLedger d = cell_damage(map.cells[t.cell], area, coeffs);
    out.burnt_area += d.burnt_area;
    out.cost += d.cost;
    out.emissions += d.emissions;
    out.casualties += d.casualties;
  }
  return out;
}

void SpreadTracker::record(const std::vector<Transition>& transitions, double minute) {
  for (const Transition& t : transitions) {
    if (t.source && t.to == BurnPhase::EarlyBurning) events_.push_back({*t.source, minute});
  }
}

void SpreadTracker::prune(double now) {
  while (!events_.empty() && events_.front().minute <= now - window_) events_.pop_front();
}

int SpreadTracker::recent_ignitions(std::size_t cell) const {
  int n = 0;
  for (const Event& e : events_) n += e.source == cell;
  return n;
}

void FireLine::add(const std::vector<std::size_t>& covered) {
  cells.insert(cells.end(), covered.begin(), covered.end());
  std::sort(cells.begin(), cells.end());
  cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
}

std::vector<std::size_t> burning_cells(const GridMap& map) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    if (is_burning(map.cells[i].phase)) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> frontier_cells(const GridMap& map) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < map.cells.size(); ++i) {
    if (!is_burning(map.cells[i].phase)) continue;
    const GridCoord s = map.coord(i);
    for (auto [ox, oy] : kNeighbours) {
      const int nx = s.x + ox;
      const int ny = s.y + oy;
      if (map.in_bounds(nx, ny) && map.cells[map.index(nx, ny)].phase == BurnPhase::Combustible) {
        out.push_back(i);
        break;
      }
    }
  }
  return out;
}

FireStats fire_stats(const GridMap& map, const FireLine& fireline, const SpreadTracker& tracker,
                     const FireStats* previous) {
  FireStats s;
  if (previous) {
    s.fire_center = previous->fire_center;
    s.spread_angle = previous->spread_angle;
  }

  const std::vector<std::size_t> burning = burning_cells(map);
  s.active_front_count = static_cast<int>(burning.size());

  int burnt = 0;
  for (const Cell& c : map.cells) burnt += c.phase == BurnPhase::Burnt;
  s.burnt_fraction = map.flammable_count > 0 ? static_cast<double>(burnt) / map.flammable_count : 0.0;

  if (!burning.empty()) {
    double sx = 0.0, sy = 0.0;
    for (std::size_t i : burning) {
      const GridCoord c = map.coord(i);
      sx += c.x;
      sy += c.y;
    }
    s.fire_center = {sx / burning.size(), sy / burning.size()};

    int best_count = 0;
    std::optional<std::size_t> fastest;
    for (std::size_t i : frontier_cells(map)) {
      const int n = tracker.recent_ignitions(i);
      if (n > best_count) {
        best_count = n;
        fastest = i;
      }
    }
    if (fastest) {
      const GridCoord f = map.coord(*fastest);
      const double dx = f.x - s.fire_center.x;
      const double dy = f.y - s.fire_center.y;
      if (dx != 0.0 || dy != 0.0) s.spread_angle = bearing_deg(dx, dy);
    }
  }

  const double cs = map.cell_size;
  const double cx = (s.fire_center.x + 0.5) * cs;
  const double cy = (s.fire_center.y + 0.5) * cs;
  s.dist_to_boundaries = {std::max(0.0, map.height_m() - cy), std::max(0.0, map.width_m() - cx),
                          std::max(0.0, cy), std::max(0.0, cx)};

  const double diag = map.diagonal_m();
  std::vector<Vec2> probes;
  if (burning.empty()) {
    probes.push_back({cx, cy});
  } else {
    for (std::size_t i : burning) probes.push_back(map.center(i));
  }

  s.dist_to_water = diag;
  if (!map.water_sources.empty()) {
    if (burning.empty()) {
      for (GridCoord w : map.water_sources) s.dist_to_water = std::min(s.dist_to_water, distance(probes[0], map.center(w)));
    } else {
      for (std::size_t i : burning) s.dist_to_water = std::min(s.dist_to_water, map.water_distance[i]);
    }
  }

  s.dist_to_fireline = diag;
  for (std::size_t f : fireline.cells) {
    const Vec2 q = map.center(f);
    for (const Vec2& p : probes) s.dist_to_fireline = std::min(s.dist_to_fireline, distance(p, q));
  }
  return s;
}

void write_frame_pgm(const GridMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open frame file " + path.string());
  out << "P5\n" << map.width << ' ' << map.height << "\n5\n";
  for (int y = map.height - 1; y >= 0; --y) {
    for (int x = 0; x < map.width; ++x) {
      out.put(static_cast<char>(map.cells[map.index(x, y)].phase));
    }
  }
  if (!out) throw Error("failed writing frame file " + path.string());
}

}  // namespace emberops
