#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "emberops/errors.hpp"
#include "emberops/fire.hpp"
#include "test_support.hpp"

using namespace emberops;
using namespace emberops::testing;

namespace {

int rank(BurnPhase p) {
  switch (p) {
    case BurnPhase::NonFlammable: return -1;
    case BurnPhase::Combustible: return 0;
    case BurnPhase::EarlyBurning: return 1;
    case BurnPhase::FullBurning: return 2;
    case BurnPhase::Extinguishing: return 3;
    case BurnPhase::Burnt: return 4;
  }
  return -2;
}

bool allowed_edge(BurnPhase from, BurnPhase to) {
  using P = BurnPhase;
  return (from == P::Combustible && to == P::EarlyBurning) || (from == P::EarlyBurning && to == P::FullBurning) ||
         (from == P::FullBurning && to == P::Extinguishing) || (from == P::EarlyBurning && to == P::Extinguishing) ||
         (from == P::Extinguishing && to == P::Burnt);
}

}  // namespace

TEST(Ignite, CombustibleCellStartsEarlyBurning) {
  GridMap m = forest_map(5, 5);
  const GridMap before = m;
  ignite(m, {2, 3});
  EXPECT_EQ(m.at({2, 3}).phase, BurnPhase::EarlyBurning);
  for (std::size_t i = 0; i < m.cells.size(); ++i)
    if (i != m.index(2, 3)) {
      EXPECT_EQ(m.cells[i], before.cells[i]);
    }
}

TEST(Ignite, RejectsInertBurningAndOutOfBoundsCells) {
  GridMap m = forest_map(5, 5);
  make_water(m, {0, 0});
  EXPECT_THROW(ignite(m, {0, 0}), NotFlammable);
  ignite(m, {1, 1});
  EXPECT_THROW(ignite(m, {1, 1}), NotFlammable);
  set_phase(m, {2, 2}, BurnPhase::Burnt);
  EXPECT_THROW(ignite(m, {2, 2}), NotFlammable);
  EXPECT_THROW(ignite(m, {-1, 0}), OutOfBounds);
  EXPECT_THROW(ignite(m, {5, 0}), OutOfBounds);
}

TEST(StepFire, NoBurningCellsIsAFixedPoint) {
  GridMap m = forest_map(8, 8);
  const GridMap before = m;
  RngStream rng(1);
  EXPECT_TRUE(step_fire(m, calm_weather(), plain_params(), 1.0, rng).empty());
  EXPECT_TRUE(m == before);
}

TEST(StepFire, SaturatedNeighboursNeverIgnite) {
  GridMap m = forest_map(7, 7, FuelType::LeafLitter, 1.0);
  set_phase(m, {3, 3}, BurnPhase::FullBurning);
  RngStream rng(2);
  WeatherState w{30.0, 10.0, 12.0, 45.0};
  for (int t = 0; t < 29; ++t) {
    for (const Transition& tr : step_fire(m, w, plain_params(), 1.0, rng))
      ASSERT_NE(tr.to, BurnPhase::EarlyBurning);
  }
}

TEST(StepFire, DwellTimesDriveThePhaseChain) {
  GridMap m = forest_map(3, 3);
  for (int y = 0; y < 3; ++y)
    for (int x = 0; x < 3; ++x)
      if (x != 1 || y != 1) make_water(m, {x, y});
  m.finalize();
  ignite(m, {1, 1});
  const SpreadParams p = plain_params();
  RngStream rng(3);
  std::map<BurnPhase, int> reached;
  for (int minute = 1; minute <= 70; ++minute)
    for (const Transition& t : step_fire(m, calm_weather(), p, 1.0, rng)) reached[t.to] = minute;
  EXPECT_EQ(reached[BurnPhase::FullBurning], 10);
  EXPECT_EQ(reached[BurnPhase::Extinguishing], 40);
  EXPECT_EQ(reached[BurnPhase::Burnt], 60);
  EXPECT_EQ(m.at({1, 1}).phase, BurnPhase::Burnt);
}

TEST(StepFire, ReplayIsBitIdentical) {
  const Scenario& s = bundled_scenario();
  auto run = [&](std::uint64_t seed) {
    GridMap m = s.map;
    ignite(m, s.ignition);
    RngStream rng(seed);
    std::vector<Transition> all;
    for (int t = 0; t < 120; ++t) {
      const auto tr = step_fire(m, weather_at(s.weather, t, seed), s.spread, 1.0, rng);
      all.insert(all.end(), tr.begin(), tr.end());
    }
    return std::make_pair(m, all);
  };
  const auto a = run(11), b = run(11);
  EXPECT_TRUE(a.first == b.first);
  EXPECT_TRUE(a.second == b.second);
}

// Zero wind, flat uniform fuel: the ignition pattern around a lone source is
// invariant under quarter turns. Each cell's empirical ignition frequency is
// compared with that of its rotated partner.
TEST(StepFire, CalmSpreadIsSymmetricUnderQuarterTurns) {
  constexpr int kSize = 15;
  constexpr int kTrials = 1000;
  constexpr int kMinutes = 45;
  const int c = kSize / 2;
  std::vector<int> hits(kSize * kSize, 0);
  const SpreadParams p = plain_params();
  for (int trial = 0; trial < kTrials; ++trial) {
    GridMap m = forest_map(kSize, kSize, FuelType::Needles, 0.1);
    set_phase(m, {c, c}, BurnPhase::FullBurning);
    RngStream rng(hash64(2024, static_cast<std::uint64_t>(trial)));
    for (int t = 0; t < kMinutes; ++t) step_fire(m, calm_weather(), p, 1.0, rng);
    for (std::size_t i = 0; i < m.cells.size(); ++i) hits[i] += m.cells[i].phase != BurnPhase::Combustible;
  }
  int compared = 0;
  for (int y = 0; y < kSize; ++y) {
    for (int x = 0; x < kSize; ++x) {
      // (x, y) rotated by 90 degrees about the centre.
      const int rx = c - (y - c);
      const int ry = c + (x - c);
      const double f1 = static_cast<double>(hits[y * kSize + x]) / kTrials;
      const double f2 = static_cast<double>(hits[ry * kSize + rx]) / kTrials;
      const double sigma = std::sqrt((f1 * (1 - f1) + f2 * (1 - f2)) / kTrials);
      if (sigma == 0.0) {
        EXPECT_EQ(f1, f2);
        continue;
      }
      EXPECT_LT(std::abs(f1 - f2), 3.0 * sigma) << "cell (" << x << "," << y << ")";
      ++compared;
    }
  }
  EXPECT_GT(compared, 50);
}

TEST(IgnitionProbability, ClampedToUnitInterval) {
  GridMap m = forest_map(3, 3, FuelType::LeafLitter, 0.0);
  SpreadParams p = plain_params();
  p.base_ignition_prob = 50.0;
  p.wind_coupling = 2.0;
  const WeatherState w{30.0, 10.0, 20.0, 0.0};
  for (std::size_t j = 0; j < m.cells.size(); ++j) {
    if (j == m.index(1, 1)) continue;
    const double prob = ignition_probability(m, m.index(1, 1), j, w, p);
    EXPECT_GE(prob, 0.0);
    EXPECT_LE(prob, 1.0);
  }
}

TEST(IgnitionProbabilityProperty, MonotoneInWindTemperatureHumidityMoisture) {
  GridMap m = forest_map(3, 3, FuelType::Pine, 0.2);
  const SpreadParams p = plain_params();
  const std::size_t src = m.index(1, 1), east = m.index(2, 1);
  // Wind alignment: heading sweeps from opposed (180) to aligned (0).
  double prev = -1.0;
  for (double heading = 180.0; heading >= 0.0; heading -= 5.0) {
    const double prob = ignition_probability(m, src, east, {20.0, 30.0, 8.0, heading}, p);
    EXPECT_GE(prob, prev);
    prev = prob;
  }
  prev = -1.0;
  for (double t = 10.0; t <= 30.0; t += 1.0) {
    const double prob = ignition_probability(m, src, east, {t, 30.0, 5.0, 0.0}, p);
    EXPECT_GE(prob, prev);
    prev = prob;
  }
  prev = 2.0;
  for (double h = 10.0; h <= 50.0; h += 2.0) {
    const double prob = ignition_probability(m, src, east, {20.0, h, 5.0, 0.0}, p);
    EXPECT_LE(prob, prev);
    prev = prob;
  }
  prev = 2.0;
  for (int k = 0; k <= 20; ++k) {
    m.cells[east].moisture = k / 20.0;
    const double prob = ignition_probability(m, src, east, {20.0, 30.0, 5.0, 0.0}, p);
    EXPECT_LE(prob, prev);
    prev = prob;
  }
  EXPECT_EQ(prev, 0.0);
}

TEST(IgnitionProbability, UpslopeSpreadsFaster) {
  GridMap m = forest_map(3, 3);
  m.at({2, 1}).elevation = 50.0;
  m.at({0, 1}).elevation = -50.0;
  const SpreadParams p = plain_params();
  const WeatherState w = calm_weather();
  EXPECT_GT(ignition_probability(m, m.index(1, 1), m.index(2, 1), w, p),
            ignition_probability(m, m.index(1, 1), m.index(1, 2), w, p));
  EXPECT_EQ(ignition_probability(m, m.index(1, 1), m.index(0, 1), w, p),
            ignition_probability(m, m.index(1, 1), m.index(1, 2), w, p));
}

TEST(Suppression, FullBurningCellUnderFootprintIsExtinguished) {
  GridMap m = forest_map(10, 10);
  set_phase(m, {5, 5}, BurnPhase::FullBurning);
  const Footprint fp{{520.0, 550.0}, {580.0, 550.0}, 20.0};
  const SuppressionResult r = apply_suppressant(m, fp, 1000.0, plain_params());
  EXPECT_EQ(m.at({5, 5}).phase, BurnPhase::Extinguishing);
  EXPECT_EQ(r.suppressed_count, 1);
}

TEST(Suppression, WaterIsImmune) {
  GridMap m = forest_map(10, 10);
  for (int x = 0; x < 10; ++x) make_water(m, {x, 2});
  const GridMap before = m;
  const Footprint fp{{100.0, 250.0}, {500.0, 250.0}, 60.0};
  const SuppressionResult r = apply_suppressant(m, fp, 7000.0, plain_params());
  EXPECT_EQ(r.suppressed_count, 0);
  EXPECT_TRUE(m == before);
}

TEST(Suppression, WettingLowersIgnitionProbability) {
  GridMap m = forest_map(10, 10, FuelType::Pine, 0.1);
  const std::size_t src = m.index(4, 5), tgt = m.index(5, 5);
  const WeatherState w{25.0, 20.0, 6.0, 0.0};
  const double before = ignition_probability(m, src, tgt, w, plain_params());
  const Footprint fp{{550.0, 350.0}, {550.0, 750.0}, 60.0};
  apply_suppressant(m, fp, 7000.0, plain_params());
  EXPECT_NEAR(m.cells[tgt].moisture, 0.1 + 7000.0 / (400.0 * 60.0 * 0.5), 1e-12);
  EXPECT_LT(ignition_probability(m, src, tgt, w, plain_params()), before);
}

TEST(Suppression, MoistureClampsAtOne) {
  GridMap m = forest_map(4, 4, FuelType::Pine, 0.9);
  apply_suppressant(m, {{50.0, 50.0}, {350.0, 50.0}, 60.0}, 1e6, plain_params());
  for (int x = 0; x < 4; ++x) EXPECT_EQ(m.at({x, 0}).moisture, 1.0);
}

TEST(Suppression, BurntCellsUnchanged) {
  GridMap m = forest_map(4, 4);
  set_phase(m, {1, 1}, BurnPhase::Burnt);
  const SuppressionResult r = apply_suppressant(m, {{50.0, 150.0}, {350.0, 150.0}, 60.0}, 500.0, plain_params());
  EXPECT_EQ(m.at({1, 1}).phase, BurnPhase::Burnt);
  EXPECT_EQ(r.suppressed_count, 0);
}

TEST(Suppression, DegenerateFootprintsRejected) {
  GridMap m = forest_map(4, 4);
  EXPECT_THROW(apply_suppressant(m, {{100.0, 100.0}, {100.0, 100.0}, 60.0}, 500.0, plain_params()),
               DegenerateFootprint);
  EXPECT_THROW(apply_suppressant(m, {{100.0, 100.0}, {200.0, 100.0}, 0.0}, 500.0, plain_params()),
               DegenerateFootprint);
  EXPECT_THROW(apply_suppressant(m, {{100.0, 100.0}, {200.0, 100.0}, 60.0}, 0.0, plain_params()),
               DegenerateFootprint);
}

// Oracle: dense point sampling of the footprint rectangle.
TEST(FootprintCells, AgreesWithPointSampling) {
  const GridMap m = forest_map(20, 20);
  RngStream rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec2 a{600.0 + uniform01(rng) * 800.0, 600.0 + uniform01(rng) * 800.0};
    const double ang = uniform01(rng) * 2.0 * M_PI;
    const double len = 50.0 + uniform01(rng) * 450.0;
    const Footprint fp{a, {a.x + len * std::cos(ang), a.y + len * std::sin(ang)}, 20.0 + uniform01(rng) * 80.0};
    const std::vector<std::size_t> cells = footprint_cells(m, fp);

    const Vec2 u{std::cos(ang), std::sin(ang)}, v{-u.y, u.x};
    auto inside = [&](double px, double py, double slack) {
      const double dx = px - (fp.start.x + fp.end.x) / 2, dy = py - (fp.start.y + fp.end.y) / 2;
      return std::abs(dx * u.x + dy * u.y) <= len / 2 + slack && std::abs(dx * v.x + dy * v.y) <= fp.width / 2 + slack;
    };
    // Every sampled interior point lies in a reported cell.
    for (double s = -0.49; s <= 0.49; s += 0.02) {
      for (double t = -0.49; t <= 0.49; t += 0.07) {
        const double px = (fp.start.x + fp.end.x) / 2 + s * len * u.x + t * fp.width * v.x;
        const double py = (fp.start.y + fp.end.y) / 2 + s * len * u.y + t * fp.width * v.y;
        const std::size_t idx = m.index(static_cast<int>(px / 100.0), static_cast<int>(py / 100.0));
        ASSERT_TRUE(std::binary_search(cells.begin(), cells.end(), idx));
      }
    }
    // Every reported cell touches the (slightly inflated) rectangle.
    for (std::size_t idx : cells) {
      const GridCoord g = m.coord(idx);
      bool touches = false;
      for (int i = 0; i <= 40 && !touches; ++i)
        for (int j = 0; j <= 40 && !touches; ++j)
          touches = inside(g.x * 100.0 + i * 2.5, g.y * 100.0 + j * 2.5, 2.0);
      ASSERT_TRUE(touches);
    }
  }
}

TEST(AccrueDamage, ForestBurnAddsEmissionsNotCasualties) {
  GridMap m = forest_map(3, 3, FuelType::Pine, 0.0, 2.0);
  const DamageCoeffs k;
  const DamageLedger d = accrue_damage({}, {{m.index(1, 1), BurnPhase::Extinguishing, BurnPhase::Burnt, {}}}, m, k);
  EXPECT_EQ(d.casualties, 0.0);
  EXPECT_GT(d.emissions, 0.0);
  EXPECT_DOUBLE_EQ(d.emissions, k.emissions_per_kg_fuel * 2.0 * 100.0 * 100.0);
  EXPECT_DOUBLE_EQ(d.burnt_area, 100.0 * 100.0);
  EXPECT_DOUBLE_EQ(d.cost, k.cost_per_forest_cell);
}

TEST(AccrueDamage, UrbanBurnAddsCasualtiesAndCostNotEmissions) {
  GridMap m = forest_map(3, 3);
  m.at({1, 1}).terrain = TerrainClass::Urban;
  m.at({1, 1}).population_density = 0.004;
  const DamageCoeffs k;
  const DamageLedger d = accrue_damage({}, {{m.index(1, 1), BurnPhase::Extinguishing, BurnPhase::Burnt, {}}}, m, k);
  EXPECT_GT(d.casualties, 0.0);
  EXPECT_DOUBLE_EQ(d.casualties, k.lethality * 0.004 * 100.0 * 100.0);
  EXPECT_DOUBLE_EQ(d.cost, k.cost_per_urban_cell);
  EXPECT_EQ(d.emissions, 0.0);
}

TEST(AccrueDamage, OnlyTransitionsIntoBurntCount) {
  GridMap m = forest_map(3, 3);
  const DamageLedger start{1.0, 2.0, 3.0, 4.0};
  EXPECT_EQ(accrue_damage(start, {}, m, {}), start);
  EXPECT_EQ(accrue_damage(start, {{0, BurnPhase::Combustible, BurnPhase::EarlyBurning, 1}}, m, {}), start);
}

// Random fire with random drops on the bundled map: phase chain and ledger
// monotonicity.
TEST(FireProperty, PhaseChainIsADagAndLedgerIsMonotone) {
  const Scenario& s = bundled_scenario();
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    GridMap m = s.map;
    ignite(m, s.ignition);
    RngStream rng(seed), drops(seed + 100);
    DamageLedger ledger;
    std::vector<int> ranks(m.cells.size());
    for (std::size_t i = 0; i < m.cells.size(); ++i) ranks[i] = rank(m.cells[i].phase);
    for (int t = 0; t < 400; ++t) {
      std::vector<Transition> tr = step_fire(m, weather_at(s.weather, t, seed), s.spread, 1.0, rng);
      if (t % 7 == 0) {
        const Vec2 a{uniform01(drops) * m.width_m(), uniform01(drops) * m.height_m()};
        const SuppressionResult r = apply_suppressant(m, {a, {a.x + 300.0, a.y + 100.0}, 60.0}, 7000.0, s.spread);
        tr.insert(tr.end(), r.transitions.begin(), r.transitions.end());
      }
      for (const Transition& x : tr) ASSERT_TRUE(allowed_edge(x.from, x.to));
      for (std::size_t i = 0; i < m.cells.size(); ++i) {
        const int r = rank(m.cells[i].phase);
        ASSERT_GE(r, ranks[i]);
        ranks[i] = r;
      }
      const DamageLedger next = accrue_damage(ledger, tr, m, s.damage);
      ASSERT_GE(next.burnt_area, ledger.burnt_area);
      ASSERT_GE(next.cost, ledger.cost);
      ASSERT_GE(next.emissions, ledger.emissions);
      ASSERT_GE(next.casualties, ledger.casualties);
      ledger = next;

      const FireStats st = fire_stats(m, {}, SpreadTracker());
      ASSERT_GE(st.burnt_fraction, 0.0);
      ASSERT_LE(st.burnt_fraction, 1.0);
      ASSERT_LT(st.burnt_fraction, 1.0);  // cells remain unburnt in this run
      ASSERT_GE(st.dist_to_water, 0.0);
      ASSERT_GE(st.dist_to_fireline, 0.0);
      for (double d : st.dist_to_boundaries) ASSERT_GE(d, 0.0);
    }
  }
}

TEST(FireStatsTest, SingletonCentre) {
  GridMap m = forest_map(20, 20);
  set_phase(m, {10, 10}, BurnPhase::FullBurning);
  const FireStats s = fire_stats(m, {}, SpreadTracker());
  EXPECT_EQ(s.fire_center.x, 10.0);
  EXPECT_EQ(s.fire_center.y, 10.0);
  EXPECT_EQ(s.active_front_count, 1);
}

TEST(FireStatsTest, MidpointCentre) {
  GridMap m = forest_map(5, 5);
  set_phase(m, {0, 0}, BurnPhase::EarlyBurning);
  set_phase(m, {2, 0}, BurnPhase::FullBurning);
  const FireStats s = fire_stats(m, {}, SpreadTracker());
  EXPECT_EQ(s.fire_center.x, 1.0);
  EXPECT_EQ(s.fire_center.y, 0.0);
}

TEST(FireStatsTest, NoFireKeepsPreviousCentre) {
  GridMap m = forest_map(5, 5);
  FireStats prev;
  prev.fire_center = {3.0, 2.0};
  prev.spread_angle = 135.0;
  const FireStats s = fire_stats(m, {}, SpreadTracker(), &prev);
  EXPECT_EQ(s.active_front_count, 0);
  EXPECT_EQ(s.fire_center, prev.fire_center);
  EXPECT_EQ(s.spread_angle, 135.0);
}

TEST(FireStatsTest, SpreadAngleFollowsFastestFrontierCell) {
  GridMap m = forest_map(11, 11);
  for (int x = 4; x <= 6; ++x) set_phase(m, {x, 5}, BurnPhase::FullBurning);
  SpreadTracker tracker;
  const std::size_t east = m.index(6, 5), west = m.index(4, 5);
  tracker.record({{m.index(7, 5), BurnPhase::Combustible, BurnPhase::EarlyBurning, east},
                  {m.index(7, 6), BurnPhase::Combustible, BurnPhase::EarlyBurning, east},
                  {m.index(3, 5), BurnPhase::Combustible, BurnPhase::EarlyBurning, west}},
                 0.0);
  EXPECT_NEAR(fire_stats(m, {}, tracker).spread_angle, 0.0, 1e-12);
}

TEST(FireStatsTest, DistancesToBoundariesWaterAndFireline) {
  GridMap m = forest_map(10, 10);
  make_water(m, {9, 9});
  m.water_sources = {{9, 9}};
  m.finalize();
  set_phase(m, {2, 3}, BurnPhase::FullBurning);
  FireStats s = fire_stats(m, {}, SpreadTracker());
  // N, E, S, W from the burning cell centre.
  EXPECT_DOUBLE_EQ(s.dist_to_boundaries[0], 1000.0 - 350.0);
  EXPECT_DOUBLE_EQ(s.dist_to_boundaries[1], 1000.0 - 250.0);
  EXPECT_DOUBLE_EQ(s.dist_to_boundaries[2], 350.0);
  EXPECT_DOUBLE_EQ(s.dist_to_boundaries[3], 250.0);
  EXPECT_DOUBLE_EQ(s.dist_to_water, std::hypot(700.0, 600.0));
  EXPECT_DOUBLE_EQ(s.dist_to_fireline, m.diagonal_m());
  FireLine line;
  line.add({m.index(2, 7)});
  s = fire_stats(m, line, SpreadTracker());
  EXPECT_DOUBLE_EQ(s.dist_to_fireline, 400.0);
}

TEST(SpreadTrackerTest, TrailingWindow) {
  SpreadTracker t(10.0);
  t.record({{1, BurnPhase::Combustible, BurnPhase::EarlyBurning, 5}}, 0.0);
  t.record({{2, BurnPhase::Combustible, BurnPhase::EarlyBurning, 5}}, 4.0);
  t.prune(9.0);
  EXPECT_EQ(t.recent_ignitions(5), 2);
  t.prune(10.0);
  EXPECT_EQ(t.recent_ignitions(5), 1);
  t.prune(14.0);
  EXPECT_EQ(t.recent_ignitions(5), 0);
}

TEST(ReplayFrame, PgmEncodesPhasesNorthRowFirst) {
  GridMap m = forest_map(4, 3);
  make_water(m, {0, 0});
  set_phase(m, {3, 2}, BurnPhase::Burnt);
  const std::string path = ::testing::TempDir() + "frame_test.pgm";
  write_frame_pgm(m, path);
  std::ifstream in(path, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string header = "P5\n4 3\n5\n";
  ASSERT_EQ(bytes.substr(0, header.size()), header);
  const std::string px = bytes.substr(header.size());
  ASSERT_EQ(px.size(), 12u);
  EXPECT_EQ(px[3], 5);  // north row, east end
  EXPECT_EQ(px[8], 0);  // south row, west end
  EXPECT_EQ(px[5], 1);
}
