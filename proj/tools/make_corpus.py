#!/usr/bin/env python3
"""Writes the parser corpus world, lexicon and gold corpus.

Gold positions are computed here, independently of the C++ grammar:
place centres, region centres on the 3x3 split and a brute-force densest-bin
hotspot scan. Every gold point is checked to lie in free space so no snapping
is involved.
"""
import json
import math
import random
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
W = H = 1000
BIN = 25.0

BUILDINGS = [
    # x, y, w, h
    (40, 40, 80, 60), (230, 60, 70, 50), (400, 30, 90, 60), (700, 40, 80, 70), (860, 60, 100, 50),
    (60, 240, 60, 80), (240, 250, 60, 60), (580, 260, 80, 50), (760, 230, 60, 90), (900, 300, 60, 60),
    (30, 600, 90, 60), (260, 620, 60, 80), (600, 600, 70, 60), (880, 620, 70, 80),
    (60, 860, 80, 80), (380, 880, 90, 60), (620, 850, 60, 80), (820, 880, 100, 60),
]

PLACES = {
    "market square": [600, 160, 640, 200],
    "market": [300, 400, 340, 440],
    "central station": [460, 460, 540, 540],
    "city hall": [140, 420, 200, 470],
    "harbor": [860, 460, 960, 540],
    "north gate": [480, 0, 520, 20],
    "stadium": [700, 700, 800, 800],
    "old town": [120, 720, 220, 800],
    "river bridge": [440, 760, 480, 790],
    "park": [300, 160, 380, 220],
}

REGIONS = {
    "north": (1, 0), "south": (1, 2), "east": (2, 1), "west": (0, 1), "northeast": (2, 0),
    "northwest": (0, 0), "southeast": (2, 2), "southwest": (0, 2), "center": (1, 1),
}


def blocked(x, y):
    if x < 0 or y < 0 or x >= W or y >= H:
        return True
    i, j = math.floor(x), math.floor(y)
    return any(bx <= i < bx + bw and by <= j < by + bh for bx, by, bw, bh in BUILDINGS)


def free_point(rng, cx, cy, spread):
    while True:
        x = min(max(rng.gauss(cx, spread), 0.5), W - 0.5)
        y = min(max(rng.gauss(cy, spread), 0.5), H - 0.5)
        if not blocked(x, y):
            return round(x, 3), round(y, 3)


def make_entities(rng):
    ents = []
    clusters = {
        # a dominant crowd near the centre-west, a secondary one east
        "pedestrian": [(330, 520, 18, 90), (780, 420, 30, 60), (500, 900, 40, 30)],
        "vehicle": [(680, 520, 15, 50), (200, 140, 25, 35)],
    }
    for kind, specs in clusters.items():
        for cx, cy, spread, n in specs:
            for _ in range(n):
                x, y = free_point(rng, cx, cy, spread)
                speed = 0.4 if kind == "pedestrian" else 1.6
                a = rng.uniform(0, 2 * math.pi)
                ents.append({"id": len(ents) + 1, "kind": kind, "x": x, "y": y,
                             "vx": round(speed * math.cos(a), 3), "vy": round(speed * math.sin(a), 3)})
    return ents


def hotspot(ents, kind):
    """Exhaustive bin scan; ties go to the lower (by, bx)."""
    bins = {}
    for e in ents:
        if e["kind"] == kind:
            key = (math.floor(e["y"] / BIN), math.floor(e["x"] / BIN))
            bins[key] = bins.get(key, 0) + 1
    best = None
    for by in range(0, math.ceil(H / BIN)):
        for bx in range(0, math.ceil(W / BIN)):
            c = bins.get((by, bx), 0)
            if c > 0 and (best is None or c > best[0]):
                best = (c, by, bx)
    _, my, mx = best
    xs, ys = [], []
    for e in ents:
        if e["kind"] != kind:
            continue
        by, bx = math.floor(e["y"] / BIN), math.floor(e["x"] / BIN)
        if abs(by - my) <= 1 and abs(bx - mx) <= 1:
            xs.append(e["x"])
            ys.append(e["y"])
    return sum(xs) / len(xs), sum(ys) / len(ys)


def place_centre(name):
    x0, y0, x1, y1 = PLACES[name]
    return (x0 + x1) / 2, (y0 + y1) / 2


def region_centre(name):
    c, r = REGIONS[name]
    return (c + 0.5) * W / 3, (r + 0.5) * H / 3


def main():
    rng = random.Random(20240601)
    ents = make_entities(rng)
    uavs = []
    for k in range(20):
        x, y = free_point(rng, 500, 500, 250)
        uavs.append({"id": k + 1, "type": "patrol" if k < 10 else "tracking", "x": x, "y": y,
                     "base_capability": 1.0})
    world = {
        "width": W, "height": H, "cell_size": 1.0,
        "obstacles": [{"x": x, "y": y, "w": w, "h": h} for x, y, w, h in BUILDINGS],
        "uavs": uavs, "tasks": [], "entities": ents, "seed": 7,
    }

    crowd = hotspot(ents, "pedestrian")
    cars = hotspot(ents, "vehicle")
    P, T = "patrol", "tracking"

    def g(pt, w, t):
        return {"x": pt[0], "y": pt[1], "w": w, "type": t}

    pc, rc = place_centre, region_centre
    corpus = [
        ("patrol at (300, 400) high priority", [g((300, 400), 5.0, P)]),
        ("track vehicles near market square", [g(pc("market square"), 3.0, T)]),
        ("Please inspect the crowd and vehicles", [g(crowd, 3.0, P), g(cars, 3.0, T)]),
        ("patrol the north area", [g(rc("north"), 3.0, P)]),
        ("track at (812.5, 377.25) low priority", [g((812.5, 377.25), 1.0, T)]),
        ("scan near the central station with high priority", [g(pc("central station"), 5.0, P)]),
        ("follow the traffic", [g(cars, 3.0, T)]),
        ("monitor the crowd urgent", [g(crowd, 5.0, T)]),
        ("patrol at (10, 990) and track at (990, 10)", [g((10, 990), 3.0, P), g((990, 10), 3.0, T)]),
        ("Patrol the southeast region of the city.", [g(rc("southeast"), 3.0, P)]),
        ("patrol north east", [g(rc("northeast"), 3.0, P)]),
        ("track cars around the harbor priority low", [g(pc("harbor"), 1.0, T)]),
        ("inspect vehicles", [g(cars, 3.0, T)]),
        ("inspect the crowd", [g(crowd, 3.0, P)]),
        ("patrol near market", [g(pc("market"), 3.0, P)]),
        ("patrol at (450.5, 300) weight 4.5", [g((450.5, 300), 4.5, P)]),
        ("scan the west side", [g(rc("west"), 3.0, P)]),
        ("patrol city hall normal priority", [g(pc("city hall"), 3.0, P)]),
        ("track at (555, 444) urgent", [g((555, 444), 5.0, T)]),
        ("please monitor the stadium", [g(pc("stadium"), 3.0, T)]),
        ("patrol the old town and scan the park", [g(pc("old town"), 3.0, P), g(pc("park"), 3.0, P)]),
        ("follow people near the river bridge", [g(pc("river bridge"), 3.0, T)]),
        ("patrol at (200, 200) radius 40", [g((200, 200), 3.0, P)]),
        ("track at (700, 150) high priority sigma 10", [g((700, 150), 5.0, T)]),
        ("patrol the center", [g(rc("center"), 3.0, P)]),
        ("scan the south of the map", [g(rc("south"), 3.0, P)]),
        ("track pedestrians in the northwest district", [g(rc("northwest"), 3.0, T)]),
        ("patrol the north gate low priority", [g(pc("north gate"), 1.0, P)]),
        ("monitor traffic at the market square with urgent priority", [g(pc("market square"), 5.0, T)]),
        ("patrol at (333, 777) and at (777, 333)", [g((333, 777), 3.0, P), g((777, 333), 3.0, P)]),
        ("track the crowd and the vehicles", [g(crowd, 3.0, T), g(cars, 3.0, T)]),
        ("scan the east sector high", [g(rc("east"), 5.0, P)]),
        ("patrol at (160.25, 880.75) weight 1", [g((160.25, 880.75), 1.0, P)]),
        ("Track Vehicles Near Central Station", [g(pc("central station"), 3.0, T)]),
        ("patrol south west", [g(rc("southwest"), 3.0, P)]),
        ("follow cars by the harbor and patrol the stadium", [g(pc("harbor"), 3.0, T), g(pc("stadium"), 3.0, P)]),
        ("patrol at (640, 520) default priority", [g((640, 520), 3.0, P)]),
        ("inspect vehicles near the park", [g(pc("park"), 3.0, T)]),
        ("inspect the crowd at the market square", [g(pc("market square"), 3.0, P)]),
        ("please patrol at (250, 500) urgent and track at (750, 500) low",
         [g((250, 500), 5.0, P), g((750, 500), 1.0, T)]),
        ("monitor the crowds", [g(crowd, 3.0, T)]),
        ("patrol the northeast part", [g(rc("northeast"), 3.0, P)]),
        ("scan over the city hall", [g(pc("city hall"), 3.0, P)]),
        ("track at (905.5, 700) priority high", [g((905.5, 700), 5.0, T)]),
        ("patrol the central area", [g(rc("center"), 3.0, P)]),
        ("follow the car", [g(cars, 3.0, T)]),
        ("patrol at (480, 20) and scan the river bridge and track traffic",
         [g((480, 20), 3.0, P), g(pc("river bridge"), 3.0, P), g(cars, 3.0, T)]),
        ("track people", [g(crowd, 3.0, T)]),
        ("patrol old town weight 2", [g(pc("old town"), 2.0, P)]),
        ("Scan the south east area of the city!", [g(rc("southeast"), 3.0, P)]),
    ]
    assert len(corpus) == 50, len(corpus)
    for text, tasks in corpus:
        for t in tasks:
            assert not blocked(t["x"], t["y"]), (text, t)

    (ROOT / "data" / "corpus").mkdir(parents=True, exist_ok=True)
    with open(ROOT / "data" / "corpus" / "world.json", "w") as f:
        json.dump(world, f, indent=1)
        f.write("\n")
    with open(ROOT / "data" / "lexicon.json", "w") as f:
        json.dump({"places": PLACES}, f, indent=2)
        f.write("\n")
    with open(ROOT / "data" / "corpus" / "gold_corpus.jsonl", "w") as f:
        for text, tasks in corpus:
            f.write(json.dumps({"text": text, "tasks": tasks}) + "\n")
    print("crowd hotspot", crowd, "vehicle hotspot", cars)


if __name__ == "__main__":
    main()
