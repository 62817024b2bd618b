#!/usr/bin/env python3
"""Regenerates the bundled scenario JSON files under scenarios/."""
import json
import math
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "scenarios")

THETA = [1.301, 0.256, 0.096]

Q0 = [[-8, 8], [6.4, 12], [-8, -8], [6, -8], [-8.8, -4], [4.8, -12], [-4, -8], [3.2, -12]]
QDOT0 = [[-0.4, 0.4], [0.8, -0.8], [2.8, -2.8], [1.6, -1.6],
         [-1.2, 0.8], [1.6, -0.4], [1.6, -2], [0.8, -0.8]]

BALL_CENTERS = [[1.5, 1.5], [-1.5, -1.5], [1.5, 1.5], [0.0, -1.5],
                [0.0, -1.5], [-1.5, -1.5], [1.0, 1.0], [-1.5, -1.5]]

# Eight axis-aligned boxes with intersection [-0.5, 0.5]^2.
BOXES = [
    ([-0.5, -2.0], [2.0, 0.5]),
    ([-2.0, -0.5], [0.5, 2.0]),
    ([-0.5, -0.5], [1.5, 1.5]),
    ([-1.5, -1.5], [0.5, 0.5]),
    ([-0.75, -2.0], [1.0, 2.0]),
    ([-2.0, -0.75], [2.0, 1.0]),
    ([-1.0, -1.0], [0.75, 2.0]),
    ([-2.0, -0.6], [1.0, 0.9]),
]

FIG2_EDGES = [[1, 2, 1], [2, 3, 1], [3, 4, 1], [1, 8, 1], [2, 7, 1],
              [3, 6, 1], [4, 5, 1], [8, 7, 1], [7, 6, 1], [6, 5, 1]]
FIG6_EDGES = [[1, 2, 1], [2, 3, 1], [4, 3, 1], [8, 7, 1], [7, 6, 1], [6, 5, 1]]
FIG7_EDGES = [[1, 8, 1], [2, 7, 1], [3, 6, 1], [4, 5, 1]]


def ball(center, radius):
    return {"type": "ball", "center": center, "radius": radius}


def box(lo, hi):
    return {"type": "box", "lo": lo, "hi": hi}


def write(name, doc):
    path = os.path.join(OUT, name + ".json")
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")
    print("wrote", path)


def scenario_4c1():
    return {
        "name": "paper_4c1_circles",
        "n": 8, "m": 2,
        "dynamics": {"theta": THETA},
        "regions": [ball(c, 3.0) for c in BALL_CENTERS],
        "graph": {"nodes": 8, "edges": FIG2_EDGES},
        "controller": {"law": "fixed", "k": 1.0},
        "initial": {"q": Q0, "qdot": QDOT0},
        "dt": 0.001, "t_end": 100.0, "record_every": 100,
        "seed": 1,
    }


def scenario_4c2():
    return {
        "name": "paper_4c2_switching",
        "n": 8, "m": 2,
        "dynamics": {"theta": THETA},
        "regions": [box(lo, hi) for lo, hi in BOXES],
        "schedule": {
            "graphs": [
                {"nodes": 8, "edges": FIG6_EDGES},
                {"nodes": 8, "edges": FIG7_EDGES},
            ],
            "period": [5.0, 5.0],
            "indices": [0, 1],
            "dwell": 5.0,
        },
        "controller": {"law": "switching", "k": 5.0},
        "initial": {"q": Q0, "qdot": QDOT0},
        "dt": 0.001, "t_end": 200.0, "record_every": 100,
        "seed": 1,
    }


def scenario_4c3():
    regions = []
    for i in range(8):
        angle = i * math.pi / 8.0
        cx = round(6.0 * math.cos(angle), 4)
        cy = round(6.0 * math.sin(angle), 4)
        if i % 2 == 0:
            members = [ball([cx, cy], 1.0), ball([-cx, -cy], 1.0)]
        else:
            h = 0.8
            members = [
                box([round(cx - h, 4), round(cy - h, 4)], [round(cx + h, 4), round(cy + h, 4)]),
                box([round(-cx - h, 4), round(-cy - h, 4)], [round(-cx + h, 4), round(-cy + h, 4)]),
            ]
        regions.append({"type": "union", "members": members})
    return {
        "name": "paper_4c3_nonconvex",
        "n": 8, "m": 2,
        "dynamics": {"theta": THETA},
        "regions": regions,
        "graph": {"nodes": 8, "edges": FIG2_EDGES},
        "controller": {"law": "fixed", "k": 1.0},
        "initial": {"q": Q0, "qdot": QDOT0},
        "dt": 0.001, "t_end": 100.0, "record_every": 100,
        "seed": 1,
        "nonconvex_demo": True,
    }


def star_edges(n):
    return [[1, j, 1] for j in range(2, n + 1)]


def complete_edges(n):
    return [[i, j, 1] for i in range(1, n + 1) for j in range(i + 1, n + 1)]


def scenario_5b(graph_kind):
    edges = star_edges(16) if graph_kind == "star" else complete_edges(16)
    return {
        "name": f"paper_5b_{graph_kind}",
        "n": 16, "m": 2,
        "dynamics": {"theta": THETA},
        "regions": [box(*BOXES[i % 8]) for i in range(16)],
        "graph": {"nodes": 16, "edges": edges},
        "controller": {"law": "collision", "k": 1.0, "R": 2.0, "r": 0.2},
        "initial": {"placement": {"type": "grid", "rows": 4, "cols": 4, "spacing": 5.0,
                                  "center": [0.0, 0.0], "jitter": 1.0, "vel_range": 1.5}},
        "dt": 0.001, "t_end": 150.0, "record_every": 100,
        "seed": 20,
    }


def scenario_5c():
    return {
        "name": "paper_5c_switching_collision",
        "n": 16, "m": 2,
        "dynamics": {"theta": THETA},
        "regions": [box(*BOXES[i % 8]) for i in range(16)],
        "schedule": {
            "graphs": [
                {"nodes": 16, "edges": star_edges(16)},
                {"nodes": 16, "edges": complete_edges(16)},
            ],
            "period": [5.0, 5.0],
            "indices": [0, 1],
            "dwell": 5.0,
        },
        "controller": {"law": "collision", "k": 1.0, "R": 2.0, "r": 0.2},
        "initial": {"placement": {"type": "grid", "rows": 4, "cols": 4, "spacing": 5.0,
                                  "center": [0.0, 0.0], "jitter": 1.0, "vel_range": 1.5}},
        "dt": 0.001, "t_end": 100.0, "record_every": 100,
        "seed": 20,
    }


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    write("paper_4c1_circles", scenario_4c1())
    write("paper_4c2_switching", scenario_4c2())
    write("paper_4c3_nonconvex", scenario_4c3())
    write("paper_5b_star", scenario_5b("star"))
    write("paper_5b_complete", scenario_5b("complete"))
    write("paper_5c_switching_collision", scenario_5c())
