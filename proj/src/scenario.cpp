#include "emberops/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "emberops/errors.hpp"

namespace emberops {

namespace {

using nlohmann::json;

const json* find_path(const json& root, const std::string& dotted) {
  const json* node = &root;
  std::size_t start = 0;
  while (start <= dotted.size()) {
    const std::size_t dot = dotted.find('.', start);
    const std::string part = dotted.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!node->is_object()) return nullptr;
    auto it = node->find(part);
    if (it == node->end()) return nullptr;
    node = &*it;
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node;
}

const json& require(const json& root, const std::string& key) {
  const json* n = find_path(root, key);
  if (!n) throw ParseError(key, "missing required key");
  return *n;
}

double number(const json& n, const std::string& key) {
  if (!n.is_number()) throw ParseError(key, "expected a number");
  return n.get<double>();
}

int integer(const json& n, const std::string& key) {
  if (!n.is_number_integer()) throw ParseError(key, "expected an integer");
  return n.get<int>();
}

double req_number(const json& root, const std::string& key) { return number(require(root, key), key); }
int req_int(const json& root, const std::string& key) { return integer(require(root, key), key); }

double opt_number(const json& root, const std::string& key, double fallback) {
  const json* n = find_path(root, key);
  return n ? number(*n, key) : fallback;
}

GridCoord coord(const json& n, const std::string& key) {
  if (!n.is_array() || n.size() != 2) throw ParseError(key, "expected an [x, y] pair");
  return {integer(n[0], key), integer(n[1], key)};
}

std::vector<GridCoord> coord_list(const json& root, const std::string& key) {
  const json& n = require(root, key);
  if (!n.is_array()) throw ParseError(key, "expected a list of [x, y] pairs");
  std::vector<GridCoord> out;
  for (std::size_t i = 0; i < n.size(); ++i) out.push_back(coord(n[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

constexpr std::array<const char*, kFuelTypeCount> kFuelNames{"pine", "leaf_litter", "needles", "fallen_leaves"};

FuelType fuel_from_code(char c) {
  switch (c) {
    case 'P': return FuelType::Pine;
    case 'L': return FuelType::LeafLitter;
    case 'N': return FuelType::Needles;
    case 'F': return FuelType::FallenLeaves;
    default: return FuelType::None;
  }
}

char fuel_code(FuelType f) {
  switch (f) {
    case FuelType::Pine: return 'P';
    case FuelType::LeafLitter: return 'L';
    case FuelType::Needles: return 'N';
    case FuelType::FallenLeaves: return 'F';
    case FuelType::None: break;
  }
  return '?';
}

std::string terrain_string(const json& n) {
  std::string raw;
  if (n.is_string()) {
    raw = n.get<std::string>();
  } else if (n.is_array()) {
    for (const json& row : n) {
      if (!row.is_string()) throw ParseError("grid.terrain", "expected a string or a list of row strings");
      raw += row.get<std::string>();
    }
  } else {
    throw ParseError("grid.terrain", "expected a string or a list of row strings");
  }
  std::string codes;
  for (char c : raw) {
    if (!std::isspace(static_cast<unsigned char>(c))) codes.push_back(c);
  }
  return codes;
}

std::vector<double> number_list(const json& n, const std::string& key) {
  if (!n.is_array()) throw ParseError(key, "expected a list of numbers");
  std::vector<double> out;
  for (const json& row : n) {
    if (row.is_array()) {
      for (const json& v : row) out.push_back(number(v, key));
    } else {
      out.push_back(number(row, key));
    }
  }
  return out;
}

void build_cells(Scenario& s, const std::string& codes, const std::vector<double>& elevation) {
  GridMap& m = s.map;
  m.cells.assign(static_cast<std::size_t>(m.width) * m.height, Cell{});
  for (std::size_t i = 0; i < m.cells.size(); ++i) {
    Cell& c = m.cells[i];
    c.elevation = elevation[i];
    switch (codes[i]) {
      case 'R':
      case 'W':
        c.terrain = codes[i] == 'R' ? TerrainClass::Road : TerrainClass::Water;
        c.fuel = FuelType::None;
        c.phase = BurnPhase::NonFlammable;
        c.moisture = codes[i] == 'W' ? 1.0 : 0.0;
        break;
      case 'U':
        c.terrain = TerrainClass::Urban;
        c.fuel = s.urban_fuel;
        c.phase = BurnPhase::Combustible;
        c.moisture = s.base_moisture;
        c.fuel_load = s.fuel.load_kg_m2[static_cast<std::size_t>(s.urban_fuel)];
        c.population_density = s.urban_population_density;
        break;
      default:
        c.terrain = TerrainClass::Forest;
        c.fuel = fuel_from_code(codes[i]);
        c.phase = BurnPhase::Combustible;
        c.moisture = s.base_moisture;
        c.fuel_load = s.fuel.load_kg_m2[static_cast<std::size_t>(c.fuel)];
        break;
    }
  }
}

// Arrays of scalars stay on one line so terrain and elevation remain readable.
void pretty(const json& j, std::ostringstream& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  if (j.is_object()) {
    out << "{\n";
    std::size_t k = 0;
    for (auto it = j.begin(); it != j.end(); ++it, ++k) {
      out << inner << json(it.key()).dump() << ": ";
      pretty(it.value(), out, indent + 1);
      out << (k + 1 < j.size() ? ",\n" : "\n");
    }
    out << pad << "}";
  } else if (j.is_array() && std::any_of(j.begin(), j.end(), [](const json& e) { return e.is_structured(); })) {
    out << "[\n";
    for (std::size_t k = 0; k < j.size(); ++k) {
      out << inner;
      pretty(j[k], out, indent + 1);
      out << (k + 1 < j.size() ? ",\n" : "\n");
    }
    out << pad << "]";
  } else {
    out << j.dump();
  }
}

}  // namespace

char terrain_code(const Cell& c) {
  switch (c.terrain) {
    case TerrainClass::Road: return 'R';
    case TerrainClass::Water: return 'W';
    case TerrainClass::Urban: return 'U';
    case TerrainClass::Forest: return fuel_code(c.fuel);
  }
  return '?';
}

Scenario parse_scenario(const std::string& text) {
  if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); }))
    throw ParseError("", "empty scenario file");

  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", std::string("malformed scenario: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("", "scenario must be a key-value object");

  Scenario s;
  if (const json* n = find_path(root, "name"); n && n->is_string()) s.name = n->get<std::string>();

  GridMap& m = s.map;
  m.width = req_int(root, "grid.width");
  m.height = req_int(root, "grid.height");
  m.cell_size = req_number(root, "grid.cell_size_m");
  if (m.width <= 0) throw ValidationError("grid.width", "must be positive");
  if (m.height <= 0) throw ValidationError("grid.height", "must be positive");
  if (!(m.cell_size > 0.0)) throw ValidationError("grid.cell_size_m", "must be positive");
  const std::size_t n_cells = static_cast<std::size_t>(m.width) * m.height;

  const std::string codes = terrain_string(require(root, "grid.terrain"));
  if (codes.size() != n_cells) throw ValidationError("grid.terrain", "length must equal width * height");
  for (char c : codes) {
    if (std::string("RWUPLNF").find(c) == std::string::npos)
      throw ParseError("grid.terrain", std::string("unknown terrain code '") + c + "'");
  }
  const std::vector<double> elevation = number_list(require(root, "grid.elevation"), "grid.elevation");
  if (elevation.size() != n_cells) throw ValidationError("grid.elevation", "length must equal width * height");

  s.base_moisture = opt_number(root, "grid.moisture", s.base_moisture);
  s.urban_population_density = opt_number(root, "grid.population_density", s.urban_population_density);
  if (const json* n = find_path(root, "grid.urban_fuel")) {
    if (!n->is_string() || n->get<std::string>().size() != 1 ||
        fuel_from_code(n->get<std::string>()[0]) == FuelType::None)
      throw ParseError("grid.urban_fuel", "expected one of P, L, N, F");
    s.urban_fuel = fuel_from_code(n->get<std::string>()[0]);
  }
  for (std::size_t f = 0; f < kFuelNames.size(); ++f) {
    s.fuel.load_kg_m2[f] = opt_number(root, std::string("fuel.load_kg_m2.") + kFuelNames[f], s.fuel.load_kg_m2[f]);
    s.spread.fuel_flammability[f] =
        opt_number(root, std::string("fuel.flammability.") + kFuelNames[f], s.spread.fuel_flammability[f]);
  }

  m.airports = coord_list(root, "airports");
  m.water_sources = coord_list(root, "water_sources");
  s.ignition = coord(require(root, "ignition"), "ignition");

  WeatherConfig& w = s.weather;
  w.temp_min = req_number(root, "weather.temp_min");
  w.temp_max = req_number(root, "weather.temp_max");
  w.hum_min = req_number(root, "weather.hum_min");
  w.hum_max = req_number(root, "weather.hum_max");
  w.wind_base = req_number(root, "weather.wind_base");
  w.wind_amp = req_number(root, "weather.wind_amp");
  w.wind_period = req_number(root, "weather.wind_period");
  w.day_length = req_number(root, "weather.day_length");
  w.wind_jitter = req_number(root, "weather.wind_jitter");

  const json& fleet = require(root, "fleet");
  if (!fleet.is_array()) throw ParseError("fleet", "expected a list of aircraft");
  for (std::size_t i = 0; i < fleet.size(); ++i) {
    const std::string k = "fleet[" + std::to_string(i) + "]";
    const json& a = fleet[i];
    if (!a.is_object()) throw ParseError(k, "expected an aircraft object");
    AircraftSpec spec;
    const json* type = find_path(a, "type");
    if (!type || !type->is_string()) throw ParseError(k + ".type", "missing required string");
    spec.type = type->get<std::string>();
    auto field = [&](const char* name) {
      const std::string key = k + "." + name;
      const json* n = find_path(a, name);
      if (!n) throw ParseError(key, "missing required key");
      return n;
    };
    spec.cruise_speed_mps = number(*field("cruise_speed_mps"), k + ".cruise_speed_mps");
    spec.capacity_l = number(*field("capacity_l"), k + ".capacity_l");
    spec.burn_rate_per_min = number(*field("burn_rate_per_min"), k + ".burn_rate_per_min");
    spec.start_airport = integer(*field("start_airport"), k + ".start_airport");
    spec.scoop_time_min = opt_number(a, "scoop_time_min", spec.scoop_time_min);
    spec.refuel_time_min = opt_number(a, "refuel_time_min", spec.refuel_time_min);
    spec.drop_length_m = opt_number(a, "drop_length_m", spec.drop_length_m);
    spec.drop_width_m = opt_number(a, "drop_width_m", spec.drop_width_m);
    s.fleet.push_back(spec);
  }

  s.episode.step_minutes = req_int(root, "episode.step_minutes");
  s.episode.max_steps = req_int(root, "episode.max_steps");
  s.episode.detection_delay_min = req_int(root, "episode.detection_delay_min");
  s.episode.discount = opt_number(root, "episode.discount", s.episode.discount);

  s.maxima.burnt_area = req_number(root, "maxima.MBA");
  s.maxima.cost = req_number(root, "maxima.MCA");
  s.maxima.emissions = req_number(root, "maxima.ME");
  s.maxima.casualties = req_number(root, "maxima.MC");

  s.damage.cost_per_urban_cell = req_number(root, "damage.cost_per_urban_cell");
  s.damage.cost_per_forest_cell = req_number(root, "damage.cost_per_forest_cell");
  s.damage.emissions_per_kg_fuel = req_number(root, "damage.emissions_per_kg_fuel");
  s.damage.lethality = req_number(root, "damage.lethality");

  SpreadParams& p = s.spread;
  p.base_ignition_prob = opt_number(root, "spread.base_ignition_prob", p.base_ignition_prob);
  p.wind_coupling = opt_number(root, "spread.wind_coupling", p.wind_coupling);
  p.slope_coupling = opt_number(root, "spread.slope_coupling", p.slope_coupling);
  p.temp_coupling = opt_number(root, "spread.temp_coupling", p.temp_coupling);
  p.humidity_coupling = opt_number(root, "spread.humidity_coupling", p.humidity_coupling);
  p.early_dwell = opt_number(root, "spread.early_dwell_min", p.early_dwell);
  p.full_dwell = opt_number(root, "spread.full_dwell_min", p.full_dwell);
  p.extinguish_dwell = opt_number(root, "spread.extinguish_dwell_min", p.extinguish_dwell);
  p.saturation = opt_number(root, "spread.saturation_l_per_m2", p.saturation);
  p.temp_min = w.temp_min;
  p.temp_max = w.temp_max;
  p.hum_min = w.hum_min;
  p.hum_max = w.hum_max;

  if (!(s.base_moisture >= 0.0 && s.base_moisture <= 1.0))
    throw ValidationError("grid.moisture", "must lie in [0, 1]");
  if (!(s.urban_population_density >= 0.0))
    throw ValidationError("grid.population_density", "must be non-negative");
  for (std::size_t f = 0; f < kFuelNames.size(); ++f) {
    if (!(s.fuel.load_kg_m2[f] >= 0.0))
      throw ValidationError(std::string("fuel.load_kg_m2.") + kFuelNames[f], "must be non-negative");
  }

  build_cells(s, codes, elevation);
  validate(s);
  m.finalize();
  return s;
}

void validate(const Scenario& s) {
  const GridMap& m = s.map;
  if (m.cells.size() != static_cast<std::size_t>(m.width) * m.height)
    throw ValidationError("grid.terrain", "cell count must equal width * height");
  for (const Cell& c : m.cells) {
    const bool inert = c.terrain == TerrainClass::Road || c.terrain == TerrainClass::Water;
    if (inert != (c.fuel == FuelType::None) || inert != (c.phase == BurnPhase::NonFlammable))
      throw ValidationError("grid.terrain", "fuel and phase disagree with terrain class");
    if (!(c.moisture >= 0.0 && c.moisture <= 1.0)) throw ValidationError("grid.moisture", "must lie in [0, 1]");
    if (!(c.fuel_load >= 0.0)) throw ValidationError("fuel.load_kg_m2", "must be non-negative");
  }

  if (m.airports.empty()) throw ValidationError("airports", "at least one airport is required");
  for (std::size_t i = 0; i < m.airports.size(); ++i) {
    const std::string k = "airports[" + std::to_string(i) + "]";
    if (!m.in_bounds(m.airports[i])) throw ValidationError(k, "outside the grid");
    if (m.at(m.airports[i]).terrain == TerrainClass::Water) throw ValidationError(k, "airport on a water cell");
  }
  for (std::size_t i = 0; i < m.water_sources.size(); ++i) {
    const std::string k = "water_sources[" + std::to_string(i) + "]";
    if (!m.in_bounds(m.water_sources[i])) throw ValidationError(k, "outside the grid");
    if (m.at(m.water_sources[i]).terrain != TerrainClass::Water) throw ValidationError(k, "not a water cell");
  }
  if (!m.in_bounds(s.ignition)) throw ValidationError("ignition", "outside the grid");
  {
    const TerrainClass t = m.at(s.ignition).terrain;
    if (t != TerrainClass::Forest && t != TerrainClass::Urban)
      throw ValidationError("ignition", "must be a forest or urban cell");
  }

  validate(s.weather);
  validate(s.spread);

  if (s.fleet.empty()) throw ValidationError("fleet", "at least one aircraft is required");
  for (std::size_t i = 0; i < s.fleet.size(); ++i) {
    const std::string k = "fleet[" + std::to_string(i) + "]";
    const AircraftSpec& a = s.fleet[i];
    if (!(a.cruise_speed_mps > 0.0)) throw ValidationError(k + ".cruise_speed_mps", "must be positive");
    if (!(a.capacity_l > 0.0)) throw ValidationError(k + ".capacity_l", "must be positive");
    if (!(a.burn_rate_per_min > 0.0 && a.burn_rate_per_min < 1.0))
      throw ValidationError(k + ".burn_rate_per_min", "must lie in (0, 1)");
    if (a.start_airport < 0 || static_cast<std::size_t>(a.start_airport) >= m.airports.size())
      throw ValidationError(k + ".start_airport", "no such airport");
    if (!(a.scoop_time_min > 0.0)) throw ValidationError(k + ".scoop_time_min", "must be positive");
    if (!(a.refuel_time_min > 0.0)) throw ValidationError(k + ".refuel_time_min", "must be positive");
    if (!(a.drop_length_m > 0.0)) throw ValidationError(k + ".drop_length_m", "must be positive");
    if (!(a.drop_width_m > 0.0)) throw ValidationError(k + ".drop_width_m", "must be positive");
  }

  const EpisodeConfig& e = s.episode;
  if (e.step_minutes <= 0) throw ValidationError("episode.step_minutes", "must be positive");
  if (e.max_steps <= 0) throw ValidationError("episode.max_steps", "must be positive");
  if (e.step_minutes * e.max_steps != 960)
    throw ValidationError("episode.max_steps", "step_minutes * max_steps must equal 960");
  if (e.detection_delay_min < 0) throw ValidationError("episode.detection_delay_min", "must be non-negative");
  if (e.detection_delay_min + e.step_minutes * e.max_steps > s.weather.day_length)
    throw ValidationError("weather.day_length", "must cover the detection delay plus the episode");
  if (!(e.discount > 0.0 && e.discount <= 1.0)) throw ValidationError("episode.discount", "must lie in (0, 1]");

  const DamageCoeffs& d = s.damage;
  if (!(d.cost_per_urban_cell >= 0.0)) throw ValidationError("damage.cost_per_urban_cell", "must be non-negative");
  if (!(d.cost_per_forest_cell >= 0.0)) throw ValidationError("damage.cost_per_forest_cell", "must be non-negative");
  if (!(d.emissions_per_kg_fuel >= 0.0)) throw ValidationError("damage.emissions_per_kg_fuel", "must be non-negative");
  if (!(d.lethality >= 0.0)) throw ValidationError("damage.lethality", "must be non-negative");

  const DamageLedger total = total_damage(m, d);
  auto check_max = [](double max, double total, const char* key) {
    if (!(max > 0.0)) throw ValidationError(key, "must be strictly positive");
    if (total > max) throw ValidationError(key, "below the damage of burning every flammable cell");
  };
  check_max(s.maxima.burnt_area, total.burnt_area, "maxima.MBA");
  check_max(s.maxima.cost, total.cost, "maxima.MCA");
  check_max(s.maxima.emissions, total.emissions, "maxima.ME");
  check_max(s.maxima.casualties, total.casualties, "maxima.MC");
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("", "cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  const GridMap& m = s.map;
  json root = json::object();
  root["name"] = s.name;

  json grid = json::object();
  grid["width"] = m.width;
  grid["height"] = m.height;
  grid["cell_size_m"] = m.cell_size;
  json rows = json::array();
  json elevation = json::array();
  for (int y = 0; y < m.height; ++y) {
    std::string row;
    json erow = json::array();
    for (int x = 0; x < m.width; ++x) {
      const Cell& c = m.cells[m.index(x, y)];
      row.push_back(terrain_code(c));
      erow.push_back(c.elevation);
    }
    rows.push_back(row);
    elevation.push_back(erow);
  }
  grid["terrain"] = rows;
  grid["elevation"] = elevation;
  grid["moisture"] = s.base_moisture;
  grid["population_density"] = s.urban_population_density;
  grid["urban_fuel"] = std::string(1, fuel_code(s.urban_fuel));
  root["grid"] = grid;

  json fuel = json::object();
  for (std::size_t f = 0; f < kFuelNames.size(); ++f) {
    fuel["load_kg_m2"][kFuelNames[f]] = s.fuel.load_kg_m2[f];
    fuel["flammability"][kFuelNames[f]] = s.spread.fuel_flammability[f];
  }
  root["fuel"] = fuel;

  auto pairs = [](const std::vector<GridCoord>& v) {
    json a = json::array();
    for (GridCoord c : v) a.push_back({c.x, c.y});
    return a;
  };
  root["airports"] = pairs(m.airports);
  root["water_sources"] = pairs(m.water_sources);
  root["ignition"] = {s.ignition.x, s.ignition.y};

  const WeatherConfig& w = s.weather;
  root["weather"] = {{"temp_min", w.temp_min},       {"temp_max", w.temp_max},   {"hum_min", w.hum_min},
                     {"hum_max", w.hum_max},         {"wind_base", w.wind_base}, {"wind_amp", w.wind_amp},
                     {"wind_period", w.wind_period}, {"day_length", w.day_length}, {"wind_jitter", w.wind_jitter}};

  json fleet = json::array();
  for (const AircraftSpec& a : s.fleet) {
    fleet.push_back({{"type", a.type},
                     {"cruise_speed_mps", a.cruise_speed_mps},
                     {"capacity_l", a.capacity_l},
                     {"burn_rate_per_min", a.burn_rate_per_min},
                     {"start_airport", a.start_airport},
                     {"scoop_time_min", a.scoop_time_min},
                     {"refuel_time_min", a.refuel_time_min},
                     {"drop_length_m", a.drop_length_m},
                     {"drop_width_m", a.drop_width_m}});
  }
  root["fleet"] = fleet;

  const EpisodeConfig& e = s.episode;
  root["episode"] = {{"step_minutes", e.step_minutes},
                     {"max_steps", e.max_steps},
                     {"detection_delay_min", e.detection_delay_min},
                     {"discount", e.discount}};
  root["maxima"] = {{"MBA", s.maxima.burnt_area},
                    {"MCA", s.maxima.cost},
                    {"ME", s.maxima.emissions},
                    {"MC", s.maxima.casualties}};
  root["damage"] = {{"cost_per_urban_cell", s.damage.cost_per_urban_cell},
                    {"cost_per_forest_cell", s.damage.cost_per_forest_cell},
                    {"emissions_per_kg_fuel", s.damage.emissions_per_kg_fuel},
                    {"lethality", s.damage.lethality}};
  const SpreadParams& p = s.spread;
  root["spread"] = {{"base_ignition_prob", p.base_ignition_prob},
                    {"wind_coupling", p.wind_coupling},
                    {"slope_coupling", p.slope_coupling},
                    {"temp_coupling", p.temp_coupling},
                    {"humidity_coupling", p.humidity_coupling},
                    {"early_dwell_min", p.early_dwell},
                    {"full_dwell_min", p.full_dwell},
                    {"extinguish_dwell_min", p.extinguish_dwell},
                    {"saturation_l_per_m2", p.saturation}};

  std::ostringstream out;
  pretty(root, out, 0);
  out << '\n';
  return out.str();
}

}  // namespace emberops
