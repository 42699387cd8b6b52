"""Device topology, calibration data and the routing distance matrices."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Mapping

import jsonschema
import numpy as np


class CalibrationError(ValueError):
    pass


def _schema() -> dict[str, Any]:
    return json.loads(resources.files("hamap.data").joinpath("calibration.schema.json").read_text())


@dataclass
class HardwareModel:
    """Coupling graph plus per-edge CNOT calibration.

    ``cnot_error`` and ``cnot_time`` are keyed by directed pairs
    ``(control, target)``; both directions of every edge are present.
    """

    num_qubits: int
    edges: frozenset[tuple[int, int]]
    cnot_error: dict[tuple[int, int], float]
    cnot_time: dict[tuple[int, int], float]
    readout_error: list[float] = field(default_factory=list)
    name: str = ""

    def __post_init__(self) -> None:
        n = self.num_qubits
        if n < 1:
            raise CalibrationError("device needs at least one qubit")
        self.edges = frozenset((min(a, b), max(a, b)) for a, b in self.edges)
        for a, b in self.edges:
            if a == b or not (0 <= a < n and 0 <= b < n):
                raise CalibrationError(f"invalid edge ({a},{b}) for {n} qubits")
            for table, what in ((self.cnot_error, "error"), (self.cnot_time, "time")):
                fwd, bwd = table.get((a, b)), table.get((b, a))
                if fwd is None and bwd is None:
                    raise CalibrationError(f"missing calibration: no cx {what} for edge ({a},{b})")
                table.setdefault((a, b), bwd)
                table.setdefault((b, a), fwd)
        for (a, b), p in self.cnot_error.items():
            if not 0.0 <= p < 1.0:
                raise CalibrationError(f"cx error {p} on ({a},{b}) outside [0, 1)")
        for (a, b), t in self.cnot_time.items():
            if not t > 0:
                raise CalibrationError(f"cx time {t} on ({a},{b}) must be positive")
        if not self.readout_error:
            self.readout_error = [0.0] * n
        if len(self.readout_error) != n:
            raise CalibrationError(f"readout_error has {len(self.readout_error)} entries, expected {n}")
        for q, r in enumerate(self.readout_error):
            if not 0.0 <= r <= 1.0:
                raise CalibrationError(f"readout error {r} on qubit {q} outside [0, 1]")
        if not self.is_connected():
            raise CalibrationError("coupling graph is disconnected")

    @cached_property
    def neighbours(self) -> list[list[int]]:
        adj: list[list[int]] = [[] for _ in range(self.num_qubits)]
        for a, b in sorted(self.edges):
            adj[a].append(b)
            adj[b].append(a)
        return [sorted(x) for x in adj]

    def is_adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def is_connected(self, nodes: set[int] | None = None) -> bool:
        """Connectivity of the whole graph, or of the subgraph induced by ``nodes``."""
        if nodes is None:
            nodes = set(range(self.num_qubits))
        if not nodes:
            return True
        start = next(iter(nodes))
        seen = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in self.neighbours[u]:
                if v in nodes and v not in seen:
                    seen.add(v)
                    queue.append(v)
        return seen == nodes

    def cx_success(self, a: int, b: int) -> float:
        return 1.0 - self.cnot_error[(a, b)]

    @classmethod
    def uniform(cls, num_qubits: int, edges, error: float = 0.01, time_ns: float = 300.0, **kw) -> HardwareModel:
        """Model with identical calibration on every edge."""
        err = {}
        tim = {}
        for a, b in edges:
            err[(a, b)] = err[(b, a)] = error
            tim[(a, b)] = tim[(b, a)] = time_ns
        return cls(num_qubits, frozenset(edges), err, tim, **kw)

    def to_document(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "num_qubits": self.num_qubits,
            "edges": [
                {
                    "q0": a,
                    "q1": b,
                    "cx_error_01": self.cnot_error[(a, b)],
                    "cx_error_10": self.cnot_error[(b, a)],
                    "cx_time_01_ns": self.cnot_time[(a, b)],
                    "cx_time_10_ns": self.cnot_time[(b, a)],
                }
                for a, b in sorted(self.edges)
            ],
            "readout_error": list(self.readout_error),
        }


def load_calibration(source: str | Path | Mapping[str, Any]) -> HardwareModel:
    """Build a validated :class:`HardwareModel` from a calibration document.

    ``source`` is a path to a JSON file, the name of a bundled device
    (``"valencia"``, ``"almaden"``) or an already-decoded document.
    """
    if isinstance(source, Mapping):
        doc = dict(source)
    else:
        path = Path(source)
        if not path.exists() and str(source) in bundled_devices():
            text = resources.files("hamap.data").joinpath(f"{source}.json").read_text()
        else:
            try:
                text = path.read_text(encoding="utf-8")
            except OSError as exc:
                raise CalibrationError(f"cannot read calibration file {path}: {exc}") from exc
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CalibrationError(f"calibration file is not valid JSON: {exc}") from exc
    try:
        jsonschema.validate(doc, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path)
        raise CalibrationError(f"calibration document invalid at '{where}': {exc.message}") from None

    n = doc["num_qubits"]
    edges = set()
    err: dict[tuple[int, int], float] = {}
    tim: dict[tuple[int, int], float] = {}
    for e in doc["edges"]:
        a, b = e["q0"], e["q1"]
        if (min(a, b), max(a, b)) in edges:
            raise CalibrationError(f"edge ({a},{b}) listed twice")
        edges.add((min(a, b), max(a, b)))
        for key, table, pair in (
            ("cx_error_01", err, (a, b)), ("cx_error_10", err, (b, a)),
            ("cx_time_01_ns", tim, (a, b)), ("cx_time_10_ns", tim, (b, a)),
        ):
            if key in e:
                table[pair] = float(e[key])
    readout = [float(r) for r in doc.get("readout_error", [])]
    return HardwareModel(n, frozenset(edges), err, tim, readout, doc.get("name", ""))


def bundled_devices() -> list[str]:
    return ["almaden", "valencia"]


def _check_edge(model: HardwareModel, a: int, b: int) -> None:
    if not model.is_adjacent(a, b):
        raise ValueError(f"({a},{b}) is not a coupling edge")


def swap_error_edge(model: HardwareModel, a: int, b: int) -> float:
    """Error weight of a SWAP on edge (a, b).

    With s_ab the CNOT success rate in each direction, the three-CNOT SWAP
    succeeds with probability s_ab * s_ba * max(s_ab, s_ba); the cheaper
    direction is used twice.
    """
    _check_edge(model, a, b)
    s_ab = model.cx_success(a, b)
    s_ba = model.cx_success(b, a)
    return 1.0 - s_ab * s_ba * max(s_ab, s_ba)


def swap_time_edge(model: HardwareModel, a: int, b: int) -> float:
    """Duration (ns) of a SWAP on edge (a, b): both directions plus the faster one again."""
    _check_edge(model, a, b)
    t_ab = model.cnot_time[(a, b)]
    t_ba = model.cnot_time[(b, a)]
    return t_ab + t_ba + min(t_ab, t_ba)


def floyd_warshall(weights: np.ndarray) -> np.ndarray:
    """All-pairs shortest paths; ``inf`` marks a missing edge."""
    dist = np.array(weights, dtype=float, copy=True)
    n = dist.shape[0]
    np.fill_diagonal(dist, 0.0)
    for k in range(n):
        np.minimum(dist, dist[:, k, None] + dist[None, k, :], out=dist)
    return dist


def _normalized(m: np.ndarray) -> np.ndarray:
    top = m.max() if m.size else 0.0
    return m / top if top > 0 else m.copy()


@dataclass(frozen=True, eq=False)
class DistanceBundle:
    """Normalized hop, swap-error and swap-time matrices and their weighted sum.

    ``S_raw`` keeps the integer hop counts (used by the Bridge test);
    ``E_raw``/``T_raw`` are the unnormalized path sums.
    """

    S: np.ndarray
    E_err: np.ndarray
    T_time: np.ndarray
    D: np.ndarray
    alphas: tuple[float, float, float]
    S_raw: np.ndarray
    E_raw: np.ndarray
    T_raw: np.ndarray

    @cached_property
    def D_rows(self) -> list[list[float]]:
        # plain lists index faster than numpy scalars in the routing loop
        return self.D.tolist()

    @cached_property
    def hops(self) -> list[list[int]]:
        return self.S_raw.astype(int).tolist()


def edge_weight_matrix(model: HardwareModel, weight) -> np.ndarray:
    n = model.num_qubits
    w = np.full((n, n), np.inf)
    for a, b in model.edges:
        w[a, b] = w[b, a] = weight(model, a, b)
    return w


def build_distance_bundle(model: HardwareModel, alphas=(1.0, 0.0, 0.0)) -> DistanceBundle:
    alphas = tuple(float(a) for a in alphas)
    if len(alphas) != 3 or any(a < 0 for a in alphas):
        raise ValueError(f"alphas must be three nonnegative weights, got {alphas}")
    s_raw = floyd_warshall(edge_weight_matrix(model, lambda m, a, b: 1.0))
    e_raw = floyd_warshall(edge_weight_matrix(model, swap_error_edge))
    t_raw = floyd_warshall(edge_weight_matrix(model, swap_time_edge))
    s, e, t = _normalized(s_raw), _normalized(e_raw), _normalized(t_raw)
    d = alphas[0] * s + alphas[1] * e + alphas[2] * t
    for m in (s_raw, e_raw, t_raw, s, e, t, d):
        m.setflags(write=False)
    return DistanceBundle(s, e, t, d, alphas, s_raw, e_raw, t_raw)
