#!/usr/bin/env python3
"""Regenerates the bundled New England 39-bus assets under data/.

Line reactances and generator inertias follow the standard public 39-bus
parameter set. Susceptances are b = SCALE/x with SCALE chosen so the
explicit-Euler prediction model at T = 0.02 stays inside its stability
region (checked against the eigenvalues of the full linearized dynamics).
Non-generator buses get M = 0.1; generator damping is tied to inertia so
the slowest electromechanical mode decays well before the run ends.
Bus-31 generation is adjusted so injections balance exactly in doubles.
"""
import json
import pathlib

BRANCHES = [
    (1, 2, 0.0411), (1, 39, 0.0250), (2, 3, 0.0151), (2, 25, 0.0086),
    (2, 30, 0.0181), (3, 4, 0.0213), (3, 18, 0.0133), (4, 5, 0.0128),
    (4, 14, 0.0129), (5, 6, 0.0026), (5, 8, 0.0112), (6, 7, 0.0092),
    (6, 11, 0.0082), (6, 31, 0.0250), (7, 8, 0.0046), (8, 9, 0.0363),
    (9, 39, 0.0250), (10, 11, 0.0043), (10, 13, 0.0043), (10, 32, 0.0200),
    (12, 11, 0.0435), (12, 13, 0.0435), (13, 14, 0.0101), (14, 15, 0.0217),
    (15, 16, 0.0094), (16, 17, 0.0089), (16, 19, 0.0195), (16, 21, 0.0135),
    (16, 24, 0.0059), (17, 18, 0.0082), (17, 27, 0.0173), (19, 20, 0.0138),
    (19, 33, 0.0142), (20, 34, 0.0180), (21, 22, 0.0140), (22, 23, 0.0096),
    (22, 35, 0.0143), (23, 24, 0.0350), (23, 36, 0.0272), (25, 26, 0.0323),
    (25, 37, 0.0232), (26, 27, 0.0147), (26, 28, 0.0474), (26, 29, 0.0625),
    (28, 29, 0.0151), (29, 38, 0.0156),
]

INERTIA_H = {30: 42.0, 31: 30.3, 32: 35.8, 33: 28.6, 34: 26.0,
             35: 34.8, 36: 26.4, 37: 24.3, 38: 34.5, 39: 500.0}

LOAD_MW = {1: 97.6, 3: 322.0, 4: 500.0, 7: 233.8, 8: 522.0, 9: 6.5,
           12: 8.53, 15: 320.0, 16: 329.0, 18: 158.0, 20: 680.0, 21: 274.0,
           23: 247.5, 24: 308.6, 25: 224.0, 26: 139.0, 27: 281.0, 28: 206.0,
           29: 283.5, 31: 9.2, 39: 1104.0}

GEN_MW = {30: 250.0, 32: 650.0, 33: 632.0, 34: 508.0, 35: 650.0,
          36: 560.0, 37: 540.0, 38: 830.0, 39: 1000.0}  # 31 balances

SCALE = 0.04

CONTROLLED = [3, 7, 25, 30, 31, 32, 37]
MONITORED = [30, 31, 32, 37]
REGIONS = [[1, 2, 3, 25, 26, 30, 37], [5, 6, 7, 11, 31], [10, 11, 13, 32]]


def main() -> None:
    data = pathlib.Path(__file__).resolve().parent.parent / "data"
    data.mkdir(exist_ok=True)

    inj = {}
    for i in range(1, 40):
        inj[i] = (GEN_MW.get(i, 0.0) - LOAD_MW.get(i, 0.0)) / 100.0
    inj[31] = -sum(v for k, v in inj.items() if k != 31)

    def inertia(i: int) -> float:
        return 2.0 * INERTIA_H[i] / 60.0 if i in INERTIA_H else 0.1

    def damping(i: int) -> float:
        return 0.5 * inertia(i) if i in INERTIA_H else 1.0

    net = {
        "nodes": [
            {"id": i, "M": inertia(i), "E": damping(i)}
            for i in range(1, 40)
        ],
        "edges": [{"from": a, "to": b, "b": SCALE / x} for a, b, x in BRANCHES],
        "controlled": CONTROLLED,
        "monitored": MONITORED,
        "injections": {str(i): inj[i] for i in range(1, 40) if inj[i] != 0.0},
    }
    (data / "ieee39.json").write_text(json.dumps(net, indent=1) + "\n")

    (data / "ieee39_partition.json").write_text(
        json.dumps({"regions": REGIONS}, indent=1) + "\n")

    scenario = {
        "network": "ieee39.json",
        "horizon": 200.0,
        "step": 0.001,
        "record_stride": 100,
        "partition": {"regions": REGIONS},
        "schedules": {"period": 1.0, "offset": 0.0},
        "mpc": {
            "horizon": 2.0,
            "step": 0.02,
            "epsilon": 1.9,
            "filter_time": 0.5,
            "penalty_d": 100.0,
            "weight_monitored": 4.0,
            "weight_other": 1.0,
        },
        "safety": {"bound": 0.2, "threshold": 0.1, "gamma": 1.0},
        "disturbance": {
            "kind": "ramp-hold",
            "amplitude": 0.2,
            "ramp": 25.0,
            "hold_until": 125.0,
            "end": 150.0,
            "nodes": list(range(1, 30)),
        },
    }
    (data / "ieee39_scenario.json").write_text(json.dumps(scenario, indent=1) + "\n")
    print("wrote", data)


if __name__ == "__main__":
    main()
