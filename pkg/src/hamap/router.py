"""Hardware-aware SWAP/Bridge routing.

The router walks the dependency DAG keeping a front layer F (gates whose
predecessors have all executed) and a bounded look-ahead window E of upcoming
CNOTs. Whenever no gate of F fits the coupling graph it scores every SWAP on an
edge touching F with the calibration-weighted distance matrix and either
applies the best one or, when that SWAP would hurt the look-ahead window and
the blocked CNOT spans exactly two links, executes the CNOT as a Bridge
without moving any qubit.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .hardware import DistanceBundle, HardwareModel
from .qasm import Circuit, DependencyDag, GateNode

logger = logging.getLogger(__name__)

# float noise floor for score ties and the sign of the look-ahead effect
_EPS = 1e-12


class RoutingError(RuntimeError):
    pass


class Mapping:
    """Injective logical -> physical assignment with its inverse."""

    __slots__ = ("l2p", "p2l")

    def __init__(self, l2p: Sequence[int], num_physical: int):
        self.l2p = list(l2p)
        self.p2l: list[int | None] = [None] * num_physical
        for lq, pq in enumerate(self.l2p):
            if not 0 <= pq < num_physical:
                raise ValueError(f"logical qubit {lq} mapped to {pq}, outside 0..{num_physical - 1}")
            if self.p2l[pq] is not None:
                raise ValueError(f"physical qubit {pq} assigned twice")
            self.p2l[pq] = lq

    @classmethod
    def linear(cls, num_logical: int, num_physical: int) -> Mapping:
        return cls(range(num_logical), num_physical)

    def __getitem__(self, logical: int) -> int:
        return self.l2p[logical]

    def __len__(self) -> int:
        return len(self.l2p)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Mapping) and self.l2p == other.l2p and len(self.p2l) == len(other.p2l)

    def __repr__(self) -> str:
        return f"Mapping({self.l2p}, {len(self.p2l)})"

    @property
    def num_physical(self) -> int:
        return len(self.p2l)

    def occupied(self) -> set[int]:
        return set(self.l2p)

    def copy(self) -> Mapping:
        new = Mapping.__new__(Mapping)
        new.l2p = list(self.l2p)
        new.p2l = list(self.p2l)
        return new

    def swap_physical(self, a: int, b: int) -> None:
        """Exchange the occupants of physical qubits a and b (either may be empty)."""
        la, lb = self.p2l[a], self.p2l[b]
        self.p2l[a], self.p2l[b] = lb, la
        if la is not None:
            self.l2p[la] = b
        if lb is not None:
            self.l2p[lb] = a

    def swapped(self, a: int, b: int) -> Mapping:
        new = self.copy()
        new.swap_physical(a, b)
        return new


@dataclass
class RouterConfig:
    alphas: tuple[float, float, float] = (0.5, 0.5, 0.0)
    W: float = 0.5
    extended_size: int = 20
    bridge_enabled: bool = True
    seed: int = 0
    # add the candidate SWAP's own distance-matrix weight to its score; with
    # False the score is the bare front/look-ahead average
    swap_cost: bool = True

    def __post_init__(self) -> None:
        self.alphas = tuple(float(a) for a in self.alphas)
        if len(self.alphas) != 3 or any(a < 0 for a in self.alphas):
            raise ValueError(f"alphas must be three nonnegative weights, got {self.alphas}")
        if self.W < 0:
            raise ValueError("W must be nonnegative")
        if self.extended_size < 0:
            raise ValueError("extended_size must be nonnegative")


@dataclass(frozen=True)
class RoutedOp:
    """One operation of a routed circuit, on physical qubits.

    ``kind`` is ``"gate"`` (original cx / one-qubit gate / measure, named by
    ``name``), ``"swap"`` (qubits ``(a, b)``) or ``"bridge"`` (qubits
    ``(control, middle, target)``). ``gate_id`` names the original gate a
    ``gate`` or ``bridge`` op realizes.
    """

    kind: str
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    clbit: int | None = None
    gate_id: int | None = None


@dataclass
class RoutedCircuit:
    ops: list[RoutedOp]
    initial_mapping: list[int]
    final_mapping: list[int]
    num_physical_qubits: int
    num_classical_bits: int = 0
    original_cx: int = 0
    stats: dict[str, int] = field(default_factory=dict)

    @property
    def num_swaps(self) -> int:
        return sum(1 for op in self.ops if op.kind == "swap")

    @property
    def num_bridges(self) -> int:
        return sum(1 for op in self.ops if op.kind == "bridge")

    @property
    def added_cnot_count(self) -> int:
        return 3 * (self.num_swaps + self.num_bridges)

    def cx_pairs(self) -> list[tuple[int, int]]:
        """Every emitted CNOT as (control, target), SWAPs and Bridges expanded."""
        from .qasm import bridge_cx, swap_cx

        pairs: list[tuple[int, int]] = []
        for op in self.ops:
            if op.kind == "swap":
                pairs.extend(swap_cx(*op.qubits))
            elif op.kind == "bridge":
                pairs.extend(bridge_cx(*op.qubits))
            elif op.name == "cx":
                pairs.append(op.qubits)
        return pairs


@dataclass(frozen=True)
class Swap:
    edge: tuple[int, int]


@dataclass(frozen=True)
class Bridge:
    control: int
    middle: int
    target: int
    gate_id: int


# ---------------------------------------------------------------------------
# heuristic pieces


def find_swap_candidates(front: Iterable[GateNode], mapping: Mapping, model: HardwareModel) -> list[tuple[int, int]]:
    """Coupling edges touching the physical image of any qubit used in ``front``."""
    cands = set()
    for g in front:
        for q in g.qubits:
            p = mapping[q]
            for nb in model.neighbours[p]:
                cands.add((min(p, nb), max(p, nb)))
    return sorted(cands)


def _dist(D: list[list[float]], mapping_l2p: Sequence[int], g: GateNode) -> float:
    return D[mapping_l2p[g.qubits[0]]][mapping_l2p[g.qubits[1]]]


def score_swap(
    swap: tuple[int, int],
    front: Sequence[GateNode],
    extended: Sequence[GateNode],
    mapping: Mapping,
    D,
    W: float,
) -> tuple[float, float]:
    """Return ``(H, effect)`` of applying ``swap`` to ``mapping``.

    ``H`` is the mean distance of the front-layer CNOTs after the swap plus
    ``W`` times the mean distance of the look-ahead CNOTs (that term is
    dropped when ``extended`` is empty). ``effect`` is the total distance
    reduction the swap brings to the look-ahead CNOTs; negative means it makes
    them worse.
    """
    D = D.tolist() if hasattr(D, "tolist") else D
    temp = mapping.swapped(*swap).l2p
    cur = mapping.l2p
    h = sum(_dist(D, temp, g) for g in front) / len(front)
    effect = 0.0
    if extended:
        h += W * sum(_dist(D, temp, g) for g in extended) / len(extended)
        effect = sum(_dist(D, cur, g) - _dist(D, temp, g) for g in extended)
    return h, effect


def bridge_middle(model: HardwareModel, c: int, t: int) -> int:
    """Common neighbour of ``c`` and ``t`` with the lowest summed CNOT error."""
    common = set(model.neighbours[c]) & set(model.neighbours[t])
    if not common:
        raise ValueError(f"physical qubits {c} and {t} share no neighbour")
    return min(common, key=lambda m: (model.cnot_error[(c, m)] + model.cnot_error[(m, t)], m))


def _scores(front, extended, mapping, D, W, candidates):
    """Score every candidate, recomputing only the gates the swap touches."""
    l2p = mapping.l2p
    p2l = mapping.p2l
    f_cur = [_dist(D, l2p, g) for g in front]
    e_cur = [_dist(D, l2p, g) for g in extended]
    f_sum, e_sum = sum(f_cur), sum(e_cur)
    touching: dict[int, list[tuple[int, int]]] = {}
    for layer, gates in ((0, front), (1, extended)):
        for i, g in enumerate(gates):
            for q in g.qubits:
                touching.setdefault(q, []).append((layer, i))
    nf, ne = len(front), len(extended)
    out = []
    for a, b in candidates:
        la, lb = p2l[a], p2l[b]
        seen = set()
        df = de = 0.0
        for lq in (la, lb):
            if lq is None:
                continue
            for key in touching.get(lq, ()):
                if key in seen:
                    continue
                seen.add(key)
                layer, i = key
                g = (front if layer == 0 else extended)[i]
                q1, q2 = g.qubits
                p1 = b if q1 == la else a if q1 == lb else l2p[q1]
                p2 = b if q2 == la else a if q2 == lb else l2p[q2]
                if layer == 0:
                    df += D[p1][p2] - f_cur[i]
                else:
                    de += D[p1][p2] - e_cur[i]
        h = (f_sum + df) / nf
        if ne:
            h += W * (e_sum + de) / ne
        out.append((h, -de))
    return out


def select_action(
    front: Sequence[GateNode],
    extended: Sequence[GateNode],
    mapping: Mapping,
    bundle: DistanceBundle,
    model: HardwareModel,
    config: RouterConfig,
) -> Swap | Bridge:
    """Pick the SWAP or Bridge to insert when no front-layer gate is executable.

    ``front`` must be ordered by topological position; it decides which gate
    a Bridge serves when the best SWAP would unblock several.
    """
    D = bundle.D_rows
    candidates = find_swap_candidates(front, mapping, model)
    if not candidates:
        raise RoutingError("no swap candidates; the front layer touches an isolated qubit")
    scored = _scores(front, extended, mapping, D, config.W, candidates)

    def primary(i: int) -> float:
        a, b = candidates[i]
        return scored[i][0] + (D[a][b] if config.swap_cost else 0.0)

    keys = [primary(i) for i in range(len(candidates))]
    best = min(keys)
    tied = [i for i, k in enumerate(keys) if k <= best + _EPS * max(1.0, abs(best))]
    if config.swap_cost:
        pick = min(tied, key=lambda i: (D[candidates[i][0]][candidates[i][1]], candidates[i]))
    else:
        pick = tied[0]
    swap_min = candidates[pick]
    effect = scored[pick][1]

    if config.bridge_enabled and effect < -_EPS:
        temp = mapping.swapped(*swap_min)
        for g in front:
            if model.is_adjacent(temp[g.q1], temp[g.q2]):
                c, t = mapping[g.q1], mapping[g.q2]
                if bundle.hops[c][t] == 2:
                    return Bridge(c, bridge_middle(model, c, t), t, g.id)
                break
    return Swap(swap_min)


# ---------------------------------------------------------------------------
# main loop


class _State:
    def __init__(self, circuit: Circuit, dag: DependencyDag, mapping: Mapping, extended_size: int):
        self.gates = {g.id: g for g in circuit.gates}
        self.dag = dag
        self.position = {gid: i for i, gid in enumerate(dag.topo_order)}
        self.remaining = {gid: len(dag.preds[gid]) for gid in dag.nodes}
        self.front: list[int] = sorted((gid for gid, k in self.remaining.items() if k == 0), key=self.position.get)
        self.executed: set[int] = set()
        self.mapping = mapping
        self.extended_size = extended_size
        self._scan = 0

    def retire(self, gid: int) -> None:
        self.executed.add(gid)
        for s in self.dag.succs[gid]:
            self.remaining[s] -= 1
            if self.remaining[s] == 0:
                self.front.append(s)

    def extended(self) -> list[GateNode]:
        order = self.dag.topo_order
        while self._scan < len(order) and order[self._scan] in self.executed:
            self._scan += 1
        if self.extended_size == 0:
            return []
        in_front = set(self.front)
        out: list[GateNode] = []
        for gid in order[self._scan:]:
            if gid in self.executed or gid in in_front:
                continue
            g = self.gates[gid]
            if g.is_two_qubit:
                out.append(g)
                if len(out) >= self.extended_size:
                    break
        return out


def _shortest_path(model: HardwareModel, src: int, dst: int) -> list[int]:
    parent = {src: src}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for v in model.neighbours[u]:
            if v not in parent:
                parent[v] = u
                queue.append(v)
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    return path[::-1]


def route(
    circuit: Circuit,
    dag: DependencyDag,
    model: HardwareModel,
    bundle: DistanceBundle,
    initial_mapping: Mapping | Sequence[int],
    config: RouterConfig | None = None,
) -> RoutedCircuit:
    """Make ``circuit`` executable on ``model`` starting from ``initial_mapping``.

    Raises :class:`RoutingError` if the iteration cap is hit, which would mean
    the heuristic is cycling.
    """
    config = config or RouterConfig()
    n = model.num_qubits
    if circuit.num_logical_qubits > n:
        raise ValueError(f"circuit needs {circuit.num_logical_qubits} qubits, device has {n}")
    if not isinstance(initial_mapping, Mapping):
        initial_mapping = Mapping(initial_mapping, n)
    if initial_mapping.num_physical != n:
        raise ValueError("initial mapping built for a different device size")
    if len(initial_mapping) < circuit.num_logical_qubits:
        raise ValueError("initial mapping does not cover every logical qubit")

    mapping = initial_mapping.copy()
    state = _State(circuit, dag, mapping, config.extended_size)
    ops: list[RoutedOp] = []
    cap = 10 * max(1, len(dag.nodes)) * n + 100
    stall_limit = 10 * n
    stall = 0
    stats = {"swaps": 0, "bridges": 0, "forced_swaps": 0}

    def emit_gate(g: GateNode) -> None:
        ops.append(RoutedOp("gate", g.name, tuple(mapping[q] for q in g.qubits), g.params, g.clbit, g.id))

    def drain() -> bool:
        progressed = False
        while True:
            state.front.sort(key=state.position.get)
            ready = [
                gid for gid in state.front
                if not state.gates[gid].is_two_qubit
                or model.is_adjacent(mapping[state.gates[gid].q1], mapping[state.gates[gid].q2])
            ]
            if not ready:
                return progressed
            progressed = True
            ready_set = set(ready)
            state.front = [gid for gid in state.front if gid not in ready_set]
            for gid in ready:
                emit_gate(state.gates[gid])
                state.retire(gid)

    def apply_swap(a: int, b: int) -> None:
        ops.append(RoutedOp("swap", "swap", (a, b)))
        mapping.swap_physical(a, b)
        stats["swaps"] += 1

    for _ in range(cap):
        if drain():
            stall = 0
        if not state.front:
            break
        front = [state.gates[gid] for gid in state.front]
        if stall >= stall_limit:
            # cycling guard: walk the oldest blocked CNOT together
            g = front[0]
            path = _shortest_path(model, mapping[g.q1], mapping[g.q2])
            logger.debug("no progress after %d swaps; forcing gate %d along %s", stall, g.id, path)
            for a, b in zip(path[:-2], path[1:-1]):
                apply_swap(a, b)
                stats["forced_swaps"] += 1
            stall = 0
            continue
        action = select_action(front, state.extended(), mapping, bundle, model, config)
        if isinstance(action, Bridge):
            g = state.gates[action.gate_id]
            ops.append(RoutedOp("bridge", "bridge", (action.control, action.middle, action.target), gate_id=g.id))
            state.front.remove(g.id)
            state.retire(g.id)
            stats["bridges"] += 1
            stall = 0
        else:
            apply_swap(*action.edge)
            stall += 1
    else:
        raise RoutingError(
            f"routing did not finish within {cap} iterations "
            f"({len(state.executed)}/{len(dag.nodes)} gates executed); heuristic livelock"
        )

    return RoutedCircuit(
        ops=ops,
        initial_mapping=list(initial_mapping.l2p),
        final_mapping=list(mapping.l2p),
        num_physical_qubits=n,
        num_classical_bits=circuit.num_classical_bits,
        original_cx=circuit.cx_count,
        stats=stats,
    )
