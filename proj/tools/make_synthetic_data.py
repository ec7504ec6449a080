#!/usr/bin/env python3
"""Writes the bundled synthetic dataset (data/synthetic).

Node positions approximate the historical towns of the region; conflict
records, dates and intensities are invented. Port totals are produced
afterwards by the synth_port_totals tool so that they are consistent with
the model itself.
"""

import argparse
import json
import math
import random
from pathlib import Path

# id, name, lon, lat
TOWNS = [
    (1, "Oyo-Ile", 4.20, 8.95),
    (2, "Ilorin", 4.55, 8.50),
    (3, "Ogbomosho", 4.25, 8.13),
    (4, "Iseyin", 3.60, 7.97),
    (5, "Saki", 3.38, 8.67),
    (6, "Kishi", 3.85, 9.08),
    (7, "Igboho", 3.75, 8.83),
    (8, "Ikoyi", 4.05, 8.45),
    (9, "Oshogbo", 4.56, 7.77),
    (10, "Ede", 4.43, 7.73),
    (11, "Ife", 4.56, 7.48),
    (12, "Ilesa", 4.73, 7.63),
    (13, "Ibadan", 3.90, 7.38),
    (14, "Ijaye", 3.80, 7.60),
    (15, "Abeokuta", 3.35, 7.15),
    (16, "Owu", 4.10, 7.20),
    (17, "Ijebu Ode", 3.92, 6.82),
    (18, "Ketu", 2.60, 7.36),
    (19, "Abomey", 1.99, 7.18),
    (20, "Idanyin", 2.95, 7.55),
    (21, "Ijemo", 3.20, 7.30),
    (22, "Allada", 2.15, 6.67),
    (23, "Sabe", 2.47, 8.03),
    (24, "Tchaourou", 2.60, 8.88),
    (25, "Nikki", 3.20, 9.93),
    (26, "Bussa", 4.50, 9.85),
    (27, "Jebba", 4.83, 9.13),
    (28, "Offa", 4.72, 8.15),
    (29, "Ondo", 4.84, 7.09),
    (30, "Ikorodu", 3.50, 6.62),
    (31, "Ota", 3.23, 6.68),
    (32, "Ilaro", 3.01, 6.89),
    (33, "Pobe", 2.67, 6.98),
    (34, "Sakete", 2.66, 6.74),
    (35, "Savalou", 1.98, 7.93),
    (36, "Dassa", 2.18, 7.75),
]

# id, name, lon, lat, kind
PORTS = [
    (101, "Lagos", 3.39, 6.45, "coastal"),
    (102, "Ouidah", 2.09, 6.36, "coastal"),
    (103, "Little Popo", 1.60, 6.23, "coastal"),
    (104, "Jakin", 2.33, 6.40, "coastal"),
    (105, "Badagry", 2.88, 6.42, "coastal"),
    (106, "Porto Novo", 2.63, 6.50, "coastal"),
    (107, "Off Map NE", 5.60, 10.40, "offmap"),
    (108, "Off Map SE", 5.60, 7.00, "offmap"),
    (109, "Off Map NW", 1.50, 10.30, "offmap"),
]

# Town ids adjacent to each port.
PORT_LINKS = {
    101: [30, 17, 31],
    102: [22],
    103: [22, 19],
    104: [22, 34],
    105: [32, 34, 31],
    106: [34, 33],
    107: [26, 27],
    108: [29, 12],
    109: [25, 35],
}

EXTRA_TOWN_EDGES = [(25, 26), (24, 25), (5, 25), (26, 27), (29, 16), (29, 12)]


def town_edges(k):
    edges = set()
    for i, (a, _, ax, ay) in enumerate(TOWNS):
        dists = sorted(
            (math.hypot(ax - bx, ay - by), b) for (b, _, bx, by) in TOWNS if b != a)
        for _, b in dists[:k]:
            edges.add((min(a, b), max(a, b)))
    for a, b in EXTRA_TOWN_EDGES:
        edges.add((min(a, b), max(a, b)))
    return sorted(edges)


def conflicts(rng):
    """Records per year; 1832 is the densest year with 45 active records."""
    rows = []
    sides = ["Oyo", "Ilorin", "Dahomey", "Egba", "Ijebu", "Ife", "Owu"]
    towns = {t[0]: t for t in TOWNS}
    # Northern wars dominate early years, southern wars later.
    north = [1, 2, 3, 5, 6, 7, 8, 27, 28, 24, 23]
    south = [13, 14, 15, 16, 17, 20, 21, 32, 33, 18, 11, 12, 9, 10, 29]
    used = set()

    def site(tid):
        _, name, x, y = towns[tid]
        while True:
            p = (round(x + rng.uniform(-0.12, 0.12), 4), round(y + rng.uniform(-0.12, 0.12), 4))
            if p not in used:
                used.add(p)
                return name, p

    def add(tid, start, end, code):
        name, (x, y) = site(tid)
        rows.append({
            "name": name, "lon": x, "lat": y, "start_year": start, "end_year": end,
            "intensity": code, "affiliation": rng.choice(sides),
            "source": "synthetic",
        })

    for year in range(1817, 1837):
        pool = north if year < 1827 else south
        other = south if year < 1827 else north
        for _ in range(rng.randint(2, 4)):
            add(rng.choice(pool), year, min(1836, year + rng.choice([0, 0, 1, 2])),
                rng.choice([2, 2, 3]))
        if rng.random() < 0.5:
            add(rng.choice(other), year, year, 2)
    # Founding records (excluded from the surface by default).
    add(13, 1829, 1836, 9)
    add(15, 1830, 1836, 9)
    add(14, 1826, 1836, 9)
    # Top 1832 up to exactly 45 active conflict records.
    active = sum(1 for r in rows
                 if r["start_year"] <= 1832 <= r["end_year"] and r["intensity"] != 9)
    while active < 45:
        add(rng.choice(south + north), 1832, 1832, rng.choice([2, 3]))
        active += 1
    return rows


def water_polygon():
    """Ocean south of an approximate coastline, padded west, east and south."""
    coast = [(-1.0, 6.05), (1.20, 6.10), (1.60, 6.16), (2.09, 6.30), (2.33, 6.33),
             (2.63, 6.36), (2.88, 6.37), (3.39, 6.40), (3.90, 6.40), (4.50, 6.30),
             (5.20, 6.05), (6.00, 5.70), (9.0, 5.0)]
    ring = [(-1.0, 3.0), (9.0, 3.0)] + list(reversed(coast)) + [(-1.0, 3.0)]
    return {
        "type": "FeatureCollection",
        "features": [{
            "type": "Feature",
            "properties": {"name": "Bight of Benin"},
            "geometry": {"type": "Polygon", "coordinates": [[list(p) for p in ring]]},
        }],
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/synthetic")
    ap.add_argument("--seed", type=int, default=1817)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(args.seed)

    with open(out / "nodes.csv", "w") as f:
        f.write("id,name,lon,lat,absorbing,kind\n")
        for tid, name, x, y in TOWNS:
            f.write(f"{tid},{name},{x},{y},0,\n")
        for pid, name, x, y, kind in PORTS:
            f.write(f"{pid},{name},{x},{y},1,{kind}\n")

    with open(out / "edges.csv", "w") as f:
        f.write("from_id,to_id\n")
        for a, b in town_edges(3):
            f.write(f"{a},{b}\n")
        for pid, towns in PORT_LINKS.items():
            for t in towns:
                f.write(f"{t},{pid}\n")

    with open(out / "conflicts.csv", "w") as f:
        f.write("name,lon,lat,start_year,end_year,intensity,affiliation,source\n")
        for r in conflicts(rng):
            f.write(f"{r['name']},{r['lon']},{r['lat']},{r['start_year']},{r['end_year']},"
                    f"{r['intensity']},{r['affiliation']},{r['source']}\n")

    with open(out / "water.geojson", "w") as f:
        json.dump(water_polygon(), f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
