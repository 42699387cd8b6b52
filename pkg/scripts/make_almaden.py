"""Regenerate the bundled 20-qubit almaden-like calibration fixture.

Topology is the ibmq_almaden coupling graph; calibration values are
synthetic, drawn with a fixed seed so that the best/worst CNOT error ratio and
the slowest/fastest CNOT time ratio are close to those of the real device.
"""

import json
import random
from pathlib import Path

EDGES = [
    (0, 1), (1, 2), (2, 3), (3, 4), (1, 6), (3, 8), (5, 6), (6, 7), (7, 8), (8, 9),
    (5, 10), (7, 12), (9, 14), (10, 11), (11, 12), (12, 13), (13, 14), (11, 16),
    (13, 18), (15, 16), (16, 17), (17, 18), (18, 19),
]


def main() -> None:
    rng = random.Random(2020)
    edges = []
    for a, b in EDGES:
        err = rng.uniform(0.008, 0.0335)
        t = rng.uniform(256.0, 885.0)
        edges.append({
            "q0": a,
            "q1": b,
            "cx_error_01": round(err, 5),
            "cx_error_10": round(err * rng.uniform(0.97, 1.03), 5),
            "cx_time_01_ns": round(t, 1),
            "cx_time_10_ns": round(t + rng.uniform(20.0, 60.0), 1),
        })
    doc = {
        "name": "almaden",
        "num_qubits": 20,
        "edges": edges,
        "readout_error": [round(rng.uniform(0.015, 0.08), 4) for _ in range(20)],
    }
    out = Path(__file__).resolve().parents[1] / "src" / "hamap" / "data" / "almaden.json"
    out.write_text(json.dumps(doc, indent=2) + "\n")


if __name__ == "__main__":
    main()
