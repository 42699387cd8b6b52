"""Device-free evaluation metrics and a statevector equivalence oracle.

The success rate measured on hardware is replaced by an analytic fidelity
proxy: the product of the success probabilities of every emitted CNOT and
every measurement.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .hardware import HardwareModel
from .qasm import Circuit, bridge_cx, swap_cx
from .router import RoutedCircuit

MAX_SIM_QUBITS = 12


def count_added_gates(routed: RoutedCircuit) -> int:
    """CNOTs emitted beyond those of the input circuit."""
    return len(routed.cx_pairs()) - routed.original_cx


def _physical_events(routed: RoutedCircuit, model: HardwareModel):
    """Yield (qubits, duration, kind) for every elementary physical operation."""
    for op in routed.ops:
        if op.kind == "swap":
            for pair in swap_cx(*op.qubits):
                yield pair, model.cnot_time[pair], "cx"
        elif op.kind == "bridge":
            for pair in bridge_cx(*op.qubits):
                yield pair, model.cnot_time[pair], "cx"
        elif op.name == "cx":
            yield op.qubits, model.cnot_time[op.qubits], "cx"
        elif op.name == "measure":
            yield op.qubits, None, "measure"
        else:
            yield op.qubits, None, "1q"


def estimate_execution_time(
    routed: RoutedCircuit,
    model: HardwareModel,
    one_qubit_time_ns: float = 0.0,
    measure_time_ns: float = 0.0,
) -> float:
    """ASAP schedule length in ns: the busiest qubit's finishing time."""
    ready = [0.0] * routed.num_physical_qubits
    for qubits, dur, kind in _physical_events(routed, model):
        if dur is None:
            dur = measure_time_ns if kind == "measure" else one_qubit_time_ns
        start = max(ready[q] for q in qubits)
        for q in qubits:
            ready[q] = start + dur
    return max(ready, default=0.0)


def fidelity_proxy(routed: RoutedCircuit, model: HardwareModel) -> float:
    p = 1.0
    for qubits, _, kind in _physical_events(routed, model):
        if kind == "cx":
            p *= 1.0 - model.cnot_error[qubits]
        elif kind == "measure":
            p *= 1.0 - model.readout_error[qubits[0]]
    return p


# ---------------------------------------------------------------------------
# statevector simulation

_S2 = 1 / math.sqrt(2)


def _u3(theta: float, phi: float, lam: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -np.exp(1j * lam) * s], [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c]],
        dtype=complex,
    )


_FIXED = {
    "id": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.diag([1, -1]).astype(complex),
    "h": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "t": np.diag([1, np.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
}


def gate_matrix(name: str, params: Sequence[float] = ()) -> np.ndarray:
    if name in _FIXED:
        return _FIXED[name]
    if name == "rx":
        (t,) = params
        return np.array([[math.cos(t / 2), -1j * math.sin(t / 2)], [-1j * math.sin(t / 2), math.cos(t / 2)]])
    if name == "ry":
        (t,) = params
        return np.array([[math.cos(t / 2), -math.sin(t / 2)], [math.sin(t / 2), math.cos(t / 2)]], dtype=complex)
    if name == "rz":
        (t,) = params
        return np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)])
    if name == "u1":
        (lam,) = params
        return np.diag([1, np.exp(1j * lam)])
    if name == "u2":
        phi, lam = params
        return _u3(math.pi / 2, phi, lam)
    if name == "u3":
        return _u3(*params)
    raise ValueError(f"no matrix for gate {name!r}")


class StateVector:
    """Pure state of ``k`` qubits; axis ``i`` of the tensor is qubit ``i``.

    Basis labels read qubit 0 first, so ``|10>`` has qubit 0 set.
    """

    def __init__(self, num_qubits: int, amplitudes: np.ndarray | None = None, max_qubits: int = MAX_SIM_QUBITS):
        if num_qubits > max_qubits:
            raise ValueError(f"{num_qubits} qubits exceeds the simulator limit of {max_qubits}")
        self.num_qubits = num_qubits
        if amplitudes is None:
            amplitudes = np.zeros(2**num_qubits, dtype=complex)
            amplitudes[0] = 1.0
        self.tensor = np.asarray(amplitudes, dtype=complex).reshape((2,) * num_qubits)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def apply_1q(self, matrix: np.ndarray, q: int) -> None:
        t = np.tensordot(matrix, self.tensor, axes=([1], [q]))
        self.tensor = np.moveaxis(t, 0, q)

    def apply_cx(self, c: int, t: int) -> None:
        idx = [slice(None)] * self.num_qubits
        idx[c] = 1
        sub = self.tensor[tuple(idx)]
        # target axis index shifts down by one once the control axis is fixed
        axis = t - 1 if t > c else t
        self.tensor[tuple(idx)] = np.flip(sub, axis=axis).copy()

    def inner(self, other: StateVector) -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _apply(state: StateVector, name: str, qubits: Sequence[int], params: Sequence[float]) -> None:
    if name == "cx":
        state.apply_cx(*qubits)
    elif name in ("measure", "barrier"):
        pass
    else:
        state.apply_1q(gate_matrix(name, params), qubits[0])


def simulate(
    target: Circuit | RoutedCircuit,
    initial: StateVector | None = None,
    wires: Sequence[int] | None = None,
    max_qubits: int = MAX_SIM_QUBITS,
) -> StateVector:
    """Pre-measurement state produced by a circuit or routed circuit.

    A :class:`RoutedCircuit` is simulated on physical qubits; ``wires`` lists
    which physical qubits get a simulator axis (default: all of them), in
    axis order. Measurements are skipped.
    """
    if isinstance(target, Circuit):
        k = target.num_logical_qubits
        state = initial if initial is not None else StateVector(k, max_qubits=max_qubits)
        for g in target.gates:
            _apply(state, g.name, g.qubits, g.params)
        return state

    wires = list(range(target.num_physical_qubits)) if wires is None else list(wires)
    axis = {p: i for i, p in enumerate(wires)}
    state = initial if initial is not None else StateVector(len(wires), max_qubits=max_qubits)
    for op in target.ops:
        if op.kind == "swap":
            for c, t in swap_cx(*op.qubits):
                state.apply_cx(axis[c], axis[t])
        elif op.kind == "bridge":
            for c, t in bridge_cx(*op.qubits):
                state.apply_cx(axis[c], axis[t])
        else:
            _apply(state, op.name, [axis[q] for q in op.qubits], op.params)
    return state


def touched_qubits(routed: RoutedCircuit) -> list[int]:
    """Physical qubits that hold a logical qubit initially or are acted on."""
    seen = set(routed.initial_mapping)
    for op in routed.ops:
        seen.update(op.qubits)
    return sorted(seen)


def _embed(logical: StateVector, mapping: Sequence[int], wires: Sequence[int], max_qubits: int) -> StateVector:
    """Place a logical state onto ``wires`` per ``mapping``; unoccupied wires are |0>."""
    k = logical.num_qubits
    extra = len(wires) - k
    t = logical.tensor
    zero = np.zeros((2,) * extra, dtype=complex)
    zero[(0,) * extra] = 1.0
    full = np.multiply.outer(t, zero) if extra else t
    axis_of = {p: i for i, p in enumerate(wires)}
    dest = [axis_of[mapping[i]] for i in range(k)]
    free = [i for i in range(len(wires)) if i not in set(dest)]
    # source axes: logical 0..k-1 then the extra |0> axes
    full = np.moveaxis(full, list(range(len(wires))), dest + free)
    return StateVector(len(wires), full.reshape(-1), max_qubits=max_qubits)


def random_state(num_qubits: int, seed: int = 0) -> StateVector:
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=2**num_qubits) + 1j * rng.normal(size=2**num_qubits)
    return StateVector(num_qubits, amps / np.linalg.norm(amps))


def verify_equivalence(
    original: Circuit,
    routed: RoutedCircuit,
    tol: float = 1e-9,
    seed: int | None = 0,
    max_physical_qubits: int = 20,
) -> bool:
    """Check that ``routed`` implements ``original`` up to the final relabelling.

    Both circuits act on the same random input state (or ``|0...0>`` when
    ``seed`` is None); the routed side runs on the physical qubits it touches,
    with free ones starting in ``|0>``. Returns True iff the overlap of the
    relabelled outputs has modulus 1 within ``tol``.
    """
    k = original.num_logical_qubits
    if k > MAX_SIM_QUBITS:
        raise ValueError(f"{k} logical qubits exceeds the simulator limit of {MAX_SIM_QUBITS}")
    wires = touched_qubits(routed)
    if len(wires) > max_physical_qubits:
        raise ValueError(f"routed circuit touches {len(wires)} physical qubits (limit {max_physical_qubits})")
    start = random_state(k, seed) if seed is not None else StateVector(k)
    logical_in = StateVector(k, start.amplitudes.copy())
    expected = simulate(original, logical_in)
    physical_in = _embed(start, routed.initial_mapping, wires, max_physical_qubits)
    got = simulate(routed, physical_in, wires, max_qubits=max_physical_qubits)
    want = _embed(expected, routed.final_mapping, wires, max_physical_qubits)
    return abs(abs(want.inner(got)) - 1.0) <= tol


def topology_compliant(routed: RoutedCircuit, model: HardwareModel) -> bool:
    return all(model.is_adjacent(c, t) for c, t in routed.cx_pairs())


# ---------------------------------------------------------------------------
# reports


@dataclass
class TrialMetrics:
    trial: int
    initial_mapping: list[int]
    added_cnots: int
    swaps: int
    bridges: int
    exec_time_ns: float
    fidelity_proxy: float
    verified: bool | None = None


@dataclass
class MetricsReport:
    """Aggregate over trials for one benchmark circuit.

    ``added_cnots`` is the mean over trials and ``added_cnots_min`` the best;
    time and fidelity are those of the best trial.
    """

    benchmark: str
    n: int
    g_all: int
    added_cnots: float
    added_cnots_min: int
    exec_time_ns: float
    fidelity_proxy: float
    runtime_s: float | None = None
    trials: list[TrialMetrics] = field(default_factory=list)
    status: str = "ok"
    message: str = ""

    def row(self) -> dict:
        return {
            "benchmark": self.benchmark,
            "n": self.n,
            "g_all": self.g_all,
            "g": self.added_cnots,
            "g_min": self.added_cnots_min,
            "time_ns": self.exec_time_ns,
            "fidelity_proxy": self.fidelity_proxy,
            "runtime_s": self.runtime_s,
        }

    def to_dict(self) -> dict:
        return asdict(self)


CSV_COLUMNS = ["benchmark", "n", "g_all", "g", "g_min", "time_ns", "fidelity_proxy", "runtime_s"]


def summarize(
    benchmark: str,
    circuit: Circuit,
    routed_trials: Iterable[RoutedCircuit],
    model: HardwareModel,
    verified: Iterable[bool | None] | None = None,
) -> tuple[MetricsReport, int]:
    """Build a report; also return the index of the best trial.

    Best = fewest added CNOTs, then highest fidelity proxy, then lowest index.
    """
    routed_trials = list(routed_trials)
    verified = list(verified) if verified is not None else [None] * len(routed_trials)
    trials = [
        TrialMetrics(
            trial=i,
            initial_mapping=list(r.initial_mapping),
            added_cnots=count_added_gates(r),
            swaps=r.num_swaps,
            bridges=r.num_bridges,
            exec_time_ns=estimate_execution_time(r, model),
            fidelity_proxy=fidelity_proxy(r, model),
            verified=v,
        )
        for i, (r, v) in enumerate(zip(routed_trials, verified))
    ]
    best = min(range(len(trials)), key=lambda i: (trials[i].added_cnots, -trials[i].fidelity_proxy, i))
    report = MetricsReport(
        benchmark=benchmark,
        n=circuit.num_logical_qubits,
        g_all=sum(1 for g in circuit.gates if g.name != "barrier"),
        added_cnots=sum(t.added_cnots for t in trials) / len(trials),
        added_cnots_min=trials[best].added_cnots,
        exec_time_ns=trials[best].exec_time_ns,
        fidelity_proxy=trials[best].fidelity_proxy,
        trials=trials,
    )
    return report, best
