#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "emberops/fire.hpp"
#include "emberops/fleet.hpp"
#include "emberops/rng.hpp"
#include "emberops/scenario.hpp"

namespace emberops {

// 16 environment entries followed by 6 per aircraft, all normalised to [0, 1]:
//   temperature, humidity, wind_speed, wind_direction, dist_to_fireline,
//   dist_to_water, active_front_count, burnt_fraction, time_to_sunset,
//   fire_center_x, fire_center_y, spread_angle, dist_boundary_{N,E,S,W},
//   then per aircraft x, y, z, payload_flag, propellant, return_margin.
using StateVector = std::vector<double>;
using JointAction = std::vector<int>;

inline constexpr int kEnvironmentFeatures = 16;
inline constexpr int kAircraftFeatures = 6;

constexpr int observation_size(int fleet_size) { return kEnvironmentFeatures + kAircraftFeatures * fleet_size; }

enum class Termination : std::uint8_t { Running, Contained, TimeLimit, OutOfBound };

std::string to_string(Termination t);
Termination termination_from_string(const std::string& s);

struct StepResult {
  StateVector next_state;
  double reward = 0.0;
  bool done = false;
  Termination termination = Termination::Running;
  double moe = 0.0;
};

// Fixed per scenario; stored with checkpoints so observations can be rebuilt.
struct NormalizationConstants {
  double map_width_m = 1.0;
  double map_height_m = 1.0;
  double map_diagonal_m = 1.0;
  double day_length_min = 1.0;
  double flammable_cells = 1.0;
  double max_wind_speed = 1.0;
  double max_altitude_m = kMaxAltitude;

  static NormalizationConstants for_scenario(const Scenario& s);
  std::vector<double> as_vector() const;
  static NormalizationConstants from_vector(const std::vector<double>& v);
  friend bool operator==(const NormalizationConstants&, const NormalizationConstants&) = default;
};

// MoE = 1 - (BA/MBA + CA/MCA + E/ME + C/MC) / 4 - out_of_bound.
// Throws MaximaViolation when a ratio exceeds 1.
double compute_moe(const DamageLedger& ledger, const RegionMaxima& maxima, bool out_of_bound);

// Single-threaded MDP over one scenario. Instances are independent; run one
// per worker for parallel rollouts.
class WildfireEnv {
 public:
  explicit WildfireEnv(Scenario scenario);

  StateVector reset(std::uint64_t episode_seed);
  StepResult step(std::span<const int> actions);
  StateVector observe() const;

  int fleet_size() const { return static_cast<int>(scenario_.fleet.size()); }
  int observation_size() const { return emberops::observation_size(fleet_size()); }
  const Scenario& scenario() const { return scenario_; }
  const NormalizationConstants& normalization() const { return norm_; }

  bool initialized() const { return initialized_; }
  bool done() const { return termination_ != Termination::Running; }
  Termination termination() const { return termination_; }
  int steps_taken() const { return steps_; }
  double minute() const { return minute_; }
  double moe() const { return moe_; }
  double initial_moe() const { return moe0_; }
  bool out_of_bound() const { return out_of_bound_; }
  std::uint64_t episode_seed() const { return seed_; }
  const GridMap& map() const { return map_; }
  const DamageLedger& ledger() const { return ledger_; }
  const std::vector<Aircraft>& aircraft() const { return aircraft_; }
  const FireStats& stats() const { return stats_; }
  const FireLine& fireline() const { return fireline_; }

 private:
  void advance_minute(const std::vector<Tactic>* tactics);
  void refresh_stats();
  void check_edges();

  Scenario scenario_;
  NormalizationConstants norm_;

  GridMap map_;
  std::vector<Aircraft> aircraft_;
  DamageLedger ledger_;
  SpreadTracker tracker_;
  FireLine fireline_;
  FireStats stats_;
  RngStream fire_rng_;
  std::uint64_t seed_ = 0;
  double minute_ = 0.0;
  int steps_ = 0;
  double moe_ = 1.0;
  double moe0_ = 1.0;
  bool out_of_bound_ = false;
  bool initialized_ = false;
  Termination termination_ = Termination::Running;
};

}  // namespace emberops
