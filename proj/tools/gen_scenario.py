#!/usr/bin/env python3
"""Generates the bundled desk-scale coastal-town scenario.

64 x 64 cells at 100 m. Ocean along the southern edge, a town behind the
coast road, forest rising to the north with two scoopable lakes, and two
airstrips outside the town. Row 0 of the terrain block is the southern edge.

    python3 tools/gen_scenario.py > scenarios/palisades_small.json
"""

import json
import math
import sys

W, H, CELL = 64, 64, 100.0

FUEL_LOAD = {"P": 2.0, "L": 0.8, "N": 1.2, "F": 1.0}
URBAN_FUEL = "L"
POP_DENSITY = 0.004
DAMAGE = {
    "cost_per_urban_cell": 2.0e6,
    "cost_per_forest_cell": 5.0e4,
    "emissions_per_kg_fuel": 1.6e-3,
    "lethality": 0.01,
}
AIRPORTS = [(3, 12), (60, 12)]
IGNITION = (31, 29)


def in_disc(x, y, cx, cy, r):
    return (x - cx) ** 2 + (y - cy) ** 2 <= r * r


def terrain_at(x, y):
    coast = 4 + int(round(1.5 * math.sin(x / 6.0)))
    if y <= coast:
        return "W"
    if in_disc(x, y, 50, 46, 3.2) or in_disc(x, y, 12, 42, 2.3):
        return "W"
    if (x, y) in AIRPORTS:
        return "R"
    if y == 7:
        return "R"
    if x == 32 and 7 <= y <= 26:
        return "R"
    if 18 <= x <= 46 and 8 <= y <= 22:
        if (x - 18) % 7 == 0 or (y - 8) % 6 == 0:
            return "R"
        return "U"
    # forest fuel bands: pine on the high ground, needles mid-slope,
    # leaf litter and fallen leaves in the lower canyons
    band = y + 4.0 * math.sin(x / 5.0) + 3.0 * math.cos(y / 4.0)
    if band > 46:
        return "P"
    if band > 32:
        return "N" if (x // 5 + y // 7) % 3 else "P"
    return "L" if (x // 4 + y // 5) % 2 else "F"


def elevation_at(x, y, code):
    if code == "W" and y <= 8:
        return 0.0
    ramp = 6.0 * y
    hills = 25.0 * math.sin(x / 7.0) * math.cos(y / 9.0)
    return round(max(0.0, ramp + hills), 1)


def main():
    terrain = [[terrain_at(x, y) for x in range(W)] for y in range(H)]
    elevation = [[elevation_at(x, y, terrain[y][x]) for x in range(W)] for y in range(H)]

    water_sources = []
    for y in range(H):
        for x in range(W):
            if terrain[y][x] != "W":
                continue
            inland = y > 8
            shoreline = y + 1 < H and terrain[y + 1][x] != "W"
            if inland or (shoreline and x % 3 == 0):
                water_sources.append([x, y])

    area = CELL * CELL
    mba = mca = me = mc = 0.0
    for y in range(H):
        for x in range(W):
            c = terrain[y][x]
            if c in "RW":
                continue
            mba += area
            if c == "U":
                mca += DAMAGE["cost_per_urban_cell"]
                mc += DAMAGE["lethality"] * POP_DENSITY * area
            else:
                mca += DAMAGE["cost_per_forest_cell"]
                me += DAMAGE["emissions_per_kg_fuel"] * FUEL_LOAD[c] * area

    # Headroom above the all-burnt totals absorbs summation-order rounding.
    def ceil_sig(v):
        return float(f"{v * 1.001:.6g}") if v > 0 else 1.0

    doc = {
        "name": "palisades-small",
        "grid": {
            "width": W,
            "height": H,
            "cell_size_m": CELL,
            "terrain": ["".join(row) for row in terrain],
            "elevation": elevation,
            "moisture": 0.08,
            "population_density": POP_DENSITY,
            "urban_fuel": URBAN_FUEL,
        },
        "fuel": {
            "load_kg_m2": {"pine": 2.0, "leaf_litter": 0.8, "needles": 1.2, "fallen_leaves": 1.0},
            "flammability": {"pine": 1.0, "leaf_litter": 1.3, "needles": 1.15, "fallen_leaves": 1.2},
        },
        "airports": [list(a) for a in AIRPORTS],
        "water_sources": water_sources,
        "ignition": list(IGNITION),
        "weather": {
            "temp_min": 12.0,
            "temp_max": 27.0,
            "hum_min": 9.0,
            "hum_max": 45.0,
            "wind_base": 7.0,
            "wind_amp": 3.0,
            "wind_period": 180.0,
            "day_length": 1440.0,
            "wind_jitter": 10.0,
        },
        "fleet": [
            {"type": "DHC-515", "cruise_speed_mps": 92.5, "capacity_l": 7000.0,
             "burn_rate_per_min": 1.0 / 240.0, "start_airport": 0},
            {"type": "DHC-515", "cruise_speed_mps": 92.5, "capacity_l": 7000.0,
             "burn_rate_per_min": 1.0 / 240.0, "start_airport": 1},
        ],
        "episode": {"step_minutes": 10, "max_steps": 96, "detection_delay_min": 60, "discount": 0.99},
        "maxima": {"MBA": ceil_sig(mba), "MCA": ceil_sig(mca), "ME": ceil_sig(me), "MC": ceil_sig(mc)},
        "damage": DAMAGE,
        "spread": {
            "base_ignition_prob": 0.15,
            "wind_coupling": 0.12,
            "slope_coupling": 1.0,
            "temp_coupling": 0.3,
            "humidity_coupling": 0.5,
            "early_dwell_min": 10.0,
            "full_dwell_min": 30.0,
            "extinguish_dwell_min": 20.0,
            "saturation_l_per_m2": 0.5,
        },
    }
    json.dump(doc, sys.stdout, indent=1)
    sys.stdout.write("\n")


if __name__ == "__main__":
    main()
