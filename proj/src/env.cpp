#include "emberops/env.hpp"

#include <algorithm>
#include <cmath>

#include "emberops/errors.hpp"

namespace emberops {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Running: return "running";
    case Termination::Contained: return "contained";
    case Termination::TimeLimit: return "time_limit";
    case Termination::OutOfBound: return "out_of_bound";
  }
  return "running";
}

Termination termination_from_string(const std::string& s) {
  if (s == "contained") return Termination::Contained;
  if (s == "time_limit") return Termination::TimeLimit;
  if (s == "out_of_bound") return Termination::OutOfBound;
  if (s == "running") return Termination::Running;
  throw ParseError("termination", "unknown termination '" + s + "'");
}

NormalizationConstants NormalizationConstants::for_scenario(const Scenario& s) {
  NormalizationConstants n;
  n.map_width_m = s.map.width_m();
  n.map_height_m = s.map.height_m();
  n.map_diagonal_m = s.map.diagonal_m();
  n.day_length_min = s.weather.day_length;
  n.flammable_cells = std::max(1, s.map.flammable_count);
  n.max_wind_speed = s.weather.wind_base + s.weather.wind_amp > 0.0 ? s.weather.wind_base + s.weather.wind_amp : 1.0;
  n.max_altitude_m = kMaxAltitude;
  return n;
}

std::vector<double> NormalizationConstants::as_vector() const {
  return {map_width_m, map_height_m, map_diagonal_m, day_length_min, flammable_cells, max_wind_speed, max_altitude_m};
}

NormalizationConstants NormalizationConstants::from_vector(const std::vector<double>& v) {
  if (v.size() != 7) throw CheckpointMismatch("normalization block must hold 7 constants");
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

double compute_moe(const DamageLedger& ledger, const RegionMaxima& maxima, bool out_of_bound) {
  auto ratio = [](double value, double max, const char* name) {
    if (!(max > 0.0)) throw MaximaViolation(std::string("maximum ") + name + " must be positive");
    const double r = value / max;
    if (!(r >= 0.0) || r > 1.0 + 1e-12)
      throw MaximaViolation(std::string(name) + " exceeds its regional maximum");
    return std::min(r, 1.0);
  };
  const double damage = ratio(ledger.burnt_area, maxima.burnt_area, "MBA") + ratio(ledger.cost, maxima.cost, "MCA") +
                        ratio(ledger.emissions, maxima.emissions, "ME") +
                        ratio(ledger.casualties, maxima.casualties, "MC");
  return 1.0 - 0.25 * damage - (out_of_bound ? 1.0 : 0.0);
}

WildfireEnv::WildfireEnv(Scenario scenario)
    : scenario_(std::move(scenario)), norm_(NormalizationConstants::for_scenario(scenario_)) {
  if (scenario_.map.water_distance.size() != scenario_.map.cells.size()) scenario_.map.finalize();
}

StateVector WildfireEnv::reset(std::uint64_t episode_seed) {
  seed_ = episode_seed;
  map_ = scenario_.map;
  aircraft_.clear();
  for (std::size_t i = 0; i < scenario_.fleet.size(); ++i)
    aircraft_.push_back(make_aircraft(static_cast<int>(i), scenario_.fleet[i], map_));
  ledger_ = {};
  tracker_.clear();
  fireline_ = {};
  stats_ = {};
  stats_.fire_center = {static_cast<double>(scenario_.ignition.x), static_cast<double>(scenario_.ignition.y)};
  fire_rng_.seed(hash64(episode_seed, salt::kFire));
  minute_ = 0.0;
  steps_ = 0;
  out_of_bound_ = false;
  termination_ = Termination::Running;

  ignite(map_, scenario_.ignition);
  out_of_bound_ = map_.on_edge(scenario_.ignition);
  refresh_stats();
  for (int m = 0; m < scenario_.episode.detection_delay_min; ++m) advance_minute(nullptr);
  refresh_stats();

  moe_ = compute_moe(ledger_, scenario_.maxima, out_of_bound_);
  moe0_ = moe_;
  if (out_of_bound_) {
    termination_ = Termination::OutOfBound;
  } else if (stats_.active_front_count == 0) {
    termination_ = Termination::Contained;
  }
  initialized_ = true;
  return observe();
}

void WildfireEnv::refresh_stats() { stats_ = fire_stats(map_, fireline_, tracker_, &stats_); }

void WildfireEnv::advance_minute(const std::vector<Tactic>* tactics) {
  const WeatherState weather = weather_at(scenario_.weather, minute_, seed_);

  if (tactics) {
    for (std::size_t i = 0; i < aircraft_.size(); ++i) {
      Aircraft& a = aircraft_[i];
      const Tactic& tactic = (*tactics)[i];
      const FireContext ctx{map_, stats_, weather, tracker_, scenario_.spread};
      if (a.current_poi) a.current_poi = track_poi(tactic, *a.current_poi, ctx);
      const AdvanceResult r = advance_aircraft(a, tactic, ctx, 1.0);
      for (const DropEvent& drop : r.drops) {
        const SuppressionResult s = apply_suppressant(map_, drop.footprint, drop.amount_l, scenario_.spread);
        if (drop.mode == SuppressMode::IndirectSuppress) fireline_.add(s.covered);
      }
    }
  }

  const std::vector<Transition> transitions = step_fire(map_, weather, scenario_.spread, 1.0, fire_rng_);
  tracker_.record(transitions, minute_);
  minute_ += 1.0;
  tracker_.prune(minute_);
  ledger_ = accrue_damage(ledger_, transitions, map_, scenario_.damage);
  for (const Transition& t : transitions) {
    if (t.to == BurnPhase::EarlyBurning && map_.on_edge(map_.coord(t.cell))) out_of_bound_ = true;
  }
}

StepResult WildfireEnv::step(std::span<const int> actions) {
  if (!initialized_) throw NotInitialized("step called before reset");
  if (done()) throw EpisodeFinished("step called after the episode finished");
  if (actions.size() != aircraft_.size()) throw InvalidAction("one tactic index per aircraft is required");
  std::vector<Tactic> tactics;
  for (int a : actions) {
    if (a < 0 || a >= kTacticCount) throw InvalidAction("tactic index outside 0..23");
    tactics.push_back(decode_tactic(a));
  }

  {
    const WeatherState weather = weather_at(scenario_.weather, minute_, seed_);
    const FireContext ctx{map_, stats_, weather, tracker_, scenario_.spread};
    for (std::size_t i = 0; i < aircraft_.size(); ++i) {
      try {
        aircraft_[i].current_poi = select_poi(tactics[i], ctx);
      } catch (const NoFire&) {
      }
    }
  }

  for (int m = 0; m < scenario_.episode.step_minutes; ++m) advance_minute(&tactics);
  ++steps_;
  refresh_stats();

  const double previous = moe_;
  moe_ = compute_moe(ledger_, scenario_.maxima, out_of_bound_);

  if (out_of_bound_) {
    termination_ = Termination::OutOfBound;
  } else if (stats_.active_front_count == 0) {
    termination_ = Termination::Contained;
  } else if (steps_ >= scenario_.episode.max_steps) {
    termination_ = Termination::TimeLimit;
  }

  StepResult r;
  r.next_state = observe();
  r.reward = moe_ - previous;
  r.termination = termination_;
  r.done = done();
  r.moe = moe_;
  return r;
}

StateVector WildfireEnv::observe() const {
  if (!initialized_) throw NotInitialized("observe called before reset");
  const WeatherConfig& wc = scenario_.weather;
  const WeatherState w = weather_at(wc, std::min(minute_, wc.day_length), seed_);
  auto unit = [](double v) { return std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0; };
  auto span01 = [&](double v, double lo, double hi) { return hi > lo ? unit((v - lo) / (hi - lo)) : 0.0; };

  const double cs = map_.cell_size;
  const double diag = norm_.map_diagonal_m;
  StateVector s;
  s.reserve(static_cast<std::size_t>(observation_size()));
  s.push_back(span01(w.temperature, wc.temp_min, wc.temp_max));
  s.push_back(span01(w.humidity, wc.hum_min, wc.hum_max));
  s.push_back(unit(w.wind_speed / norm_.max_wind_speed));
  s.push_back(unit(w.wind_direction / 360.0));
  s.push_back(unit(stats_.dist_to_fireline / diag));
  s.push_back(unit(stats_.dist_to_water / diag));
  s.push_back(unit(stats_.active_front_count / norm_.flammable_cells));
  s.push_back(unit(stats_.burnt_fraction));
  s.push_back(unit((wc.day_length - minute_) / norm_.day_length_min));
  s.push_back(unit((stats_.fire_center.x + 0.5) * cs / norm_.map_width_m));
  s.push_back(unit((stats_.fire_center.y + 0.5) * cs / norm_.map_height_m));
  s.push_back(unit(stats_.spread_angle / 360.0));
  for (double d : stats_.dist_to_boundaries) s.push_back(unit(d / diag));

  for (const Aircraft& a : aircraft_) {
    s.push_back(unit(a.position.x / norm_.map_width_m));
    s.push_back(unit(a.position.y / norm_.map_height_m));
    s.push_back(unit(a.position.z / norm_.max_altitude_m));
    s.push_back(a.payload > 0.0 ? 1.0 : 0.0);
    s.push_back(unit(a.propellant));
    s.push_back(unit(return_margin(a, map_)));
  }
  return s;
}

}  // namespace emberops
