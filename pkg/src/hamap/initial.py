"""Initial placement of logical qubits.

Three engines: uniform random injection, forward-backward refinement (route
the circuit, then route its reverse starting from where the first pass
ended), and hardware-aware simulated annealing whose neighbour moves know the
coupling graph and the calibration.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Callable

from .hardware import DistanceBundle, HardwareModel
from .metrics import count_added_gates, estimate_execution_time, fidelity_proxy
from .qasm import Circuit, DependencyDag, build_dag
from .router import Mapping, RouterConfig, route

POLICY_PROBS = (0.9, 0.08, 0.02)


def random_mapping(num_logical: int, model: HardwareModel, seed: int | random.Random = 0) -> Mapping:
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    n = model.num_qubits
    if num_logical > n:
        raise ValueError(f"{num_logical} logical qubits do not fit on {n} physical qubits")
    return Mapping(rng.sample(range(n), num_logical), n)


# ---------------------------------------------------------------------------
# cost of a placement


class MappingCost:
    """Route with a given initial mapping and turn the result into a scalar.

    cost = a1 * added/original CNOTs + a2 * (1 - fidelity proxy)
           + a3 * execution time / (original CNOTs * slowest CNOT)

    ``calls`` counts routing invocations so search budgets can be audited.
    """

    def __init__(self, circuit: Circuit, model: HardwareModel, bundle: DistanceBundle,
                 config: RouterConfig, dag: DependencyDag | None = None):
        self.circuit = circuit
        self.dag = dag if dag is not None else build_dag(circuit)
        self.model = model
        self.bundle = bundle
        self.config = config
        self.calls = 0
        self._cx = max(1, circuit.cx_count)
        self._time_scale = self._cx * max(model.cnot_time.values(), default=1.0)

    def __call__(self, mapping: Mapping) -> float:
        self.calls += 1
        routed = route(self.circuit, self.dag, self.model, self.bundle, mapping, self.config)
        a1, a2, a3 = self.config.alphas
        cost = a1 * count_added_gates(routed) / self._cx
        if a2:
            cost += a2 * (1.0 - fidelity_proxy(routed, self.model))
        if a3:
            cost += a3 * estimate_execution_time(routed, self.model) / self._time_scale
        return cost


# ---------------------------------------------------------------------------
# forward-backward refinement


def sabre_initial(
    circuit: Circuit,
    dag: DependencyDag,
    model: HardwareModel,
    bundle: DistanceBundle,
    config: RouterConfig | None = None,
    seed: int | random.Random = 0,
    budget: int = 100,
    stats: dict | None = None,
) -> Mapping:
    """Best forward-backward refined mapping within ``budget`` routing calls.

    Each refinement costs two calls: route forward from a fresh random
    mapping, then route the reversed circuit from the resulting final
    mapping; the backward pass's final mapping is the refined placement.
    Reading the backward routing in reverse gives a valid forward routing from
    that placement, so its added-gate count scores the candidate without a
    third call.
    """
    config = config or RouterConfig()
    rng = seed if isinstance(seed, random.Random) else random.Random(seed)
    rev = circuit.reversed()
    rev_dag = build_dag(rev)
    refinements = max(1, budget // 2)
    best: tuple[float, Mapping] | None = None
    calls = 0
    for _ in range(refinements):
        start = random_mapping(circuit.num_logical_qubits, model, rng)
        fwd = route(circuit, dag, model, bundle, start, config)
        bwd = route(rev, rev_dag, model, bundle, fwd.final_mapping, config)
        calls += 2
        candidate = Mapping(bwd.final_mapping, model.num_qubits)
        cost = bwd.added_cnot_count
        if best is None or cost < best[0]:
            best = (cost, candidate)
    if stats is not None:
        stats["routing_calls"] = calls
        stats["refinements"] = refinements
        stats["best_cost"] = best[0]
    return best[1]


# ---------------------------------------------------------------------------
# hardware-aware annealing


@dataclass
class AnnealConfig:
    T_init: float = 1.0
    T_f: float = 0.01
    delta: float | None = None  # None: cool so that the schedule spans the budget
    policy_probs: tuple[float, float, float] = POLICY_PROBS
    mapping_call_budget: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.T_f < self.T_init:
            raise ValueError("T_f must be below T_init")
        if self.T_f <= 0:
            raise ValueError("T_f must be positive")
        if abs(sum(self.policy_probs) - 1.0) > 1e-9 or any(p < 0 for p in self.policy_probs):
            raise ValueError(f"policy probabilities must be nonnegative and sum to 1: {self.policy_probs}")
        if self.delta is None:
            self.delta = math.exp(math.log(self.T_f / self.T_init) / max(1, self.mapping_call_budget))
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")


@dataclass(frozen=True)
class QubitWeight:
    qubit: int
    score: float


def qubit_weights(model: HardwareModel) -> list[QubitWeight]:
    """Score = degree/max degree + link quality/max link quality - readout error.

    Link quality of a qubit is the summed CNOT success rate (mean of the two
    directions) over its couplings.
    """
    n = model.num_qubits
    deg = [len(model.neighbours[q]) for q in range(n)]
    link = [
        sum(1.0 - 0.5 * (model.cnot_error[(q, nb)] + model.cnot_error[(nb, q)]) for nb in model.neighbours[q])
        for q in range(n)
    ]
    max_deg = max(deg)
    max_link = max(link)
    return [
        QubitWeight(
            q,
            (deg[q] / max_deg if max_deg else 0.0)
            + (link[q] / max_link if max_link else 0.0)
            - model.readout_error[q],
        )
        for q in range(n)
    ]


def shuffle_move(mapping: Mapping, rng: random.Random) -> Mapping:
    """Same physical qubits, randomly reassigned."""
    phys = list(mapping.l2p)
    rng.shuffle(phys)
    return Mapping(phys, mapping.num_physical)


def _components(model: HardwareModel, nodes: set[int]) -> int:
    left = set(nodes)
    count = 0
    while left:
        count += 1
        stack = [left.pop()]
        while stack:
            u = stack.pop()
            for v in model.neighbours[u]:
                if v in left:
                    left.remove(v)
                    stack.append(v)
    return count


def expand_move(mapping: Mapping, model: HardwareModel, weights: list[QubitWeight]) -> Mapping | None:
    """Move the logical qubit sitting on the weakest occupied qubit to the
    strongest free qubit next to the occupied set.

    Moves that would split the occupied set into more connected groups than
    it already has are skipped. Returns None when no move is possible.
    """
    occupied = mapping.occupied()
    if len(occupied) == mapping.num_physical or not occupied:
        return None
    score = {w.qubit: w.score for w in weights}
    before = _components(model, occupied)
    for drop in sorted(occupied, key=lambda q: (score[q], q)):
        rest = occupied - {drop}
        frontier = {nb for q in rest for nb in model.neighbours[q] if nb not in occupied}
        if not rest:
            frontier = {q for q in range(mapping.num_physical) if q != drop}
        for add in sorted(frontier, key=lambda q: (-score[q], q)):
            if _components(model, rest | {add}) <= before:
                l2p = list(mapping.l2p)
                l2p[mapping.p2l[drop]] = add
                return Mapping(l2p, mapping.num_physical)
    return None


def grow_region(model: HardwareModel, size: int, start: int, weights: list[QubitWeight]) -> list[int]:
    """Greedy connected region: from ``start``, repeatedly add the best-scored neighbour."""
    score = {w.qubit: w.score for w in weights}
    region = [start]
    chosen = {start}
    while len(region) < size:
        frontier = {nb for q in region for nb in model.neighbours[q] if nb not in chosen}
        nxt = max(frontier, key=lambda q: (score[q], -q))
        region.append(nxt)
        chosen.add(nxt)
    return region


def reset_move(mapping: Mapping, model: HardwareModel, weights: list[QubitWeight], rng: random.Random,
               start: int | None = None) -> Mapping:
    """Fresh connected placement grown from a random (or given) seed qubit."""
    if start is None:
        start = rng.randrange(model.num_qubits)
    region = grow_region(model, len(mapping), start, weights)
    rng.shuffle(region)
    return Mapping(region, mapping.num_physical)


def get_neighbour(
    mapping: Mapping,
    model: HardwareModel,
    policy_probs=POLICY_PROBS,
    rng: random.Random | None = None,
    weights: list[QubitWeight] | None = None,
) -> tuple[Mapping, str]:
    """Draw a neighbouring mapping; also return the move that produced it."""
    rng = rng or random.Random()
    weights = weights if weights is not None else qubit_weights(model)
    p_shuffle, p_expand, _ = policy_probs
    u = rng.random()
    if u < p_shuffle:
        return shuffle_move(mapping, rng), "shuffle"
    if u < p_shuffle + p_expand:
        moved = expand_move(mapping, model, weights)
        if moved is None:
            return shuffle_move(mapping, rng), "shuffle"
        return moved, "expand"
    return reset_move(mapping, model, weights, rng), "reset"


def acceptance_probability(cost: float, cost_neighbour: float, T: float) -> float:
    """Metropolis probability of moving to a neighbour that is not better."""
    if cost_neighbour < cost:
        return 1.0
    return math.exp((cost - cost_neighbour) / T)


def anneal(
    start: Mapping,
    cost_fn: Callable[[Mapping], float],
    neighbour_fn: Callable[[Mapping], Mapping],
    config: AnnealConfig,
    rng: random.Random,
    trace: list | None = None,
) -> tuple[Mapping, float]:
    """Simulated annealing over mappings; returns the best mapping seen and its cost.

    At most ``config.mapping_call_budget`` evaluations of ``cost_fn`` are made.
    """
    budget = config.mapping_call_budget
    current = best = start
    cost = cost_opt = cost_fn(start)
    calls = 1
    T = config.T_init
    while T >= config.T_f and calls < budget:
        cand = neighbour_fn(current)
        cand_cost = cost_fn(cand)
        calls += 1
        if cand_cost < cost_opt:
            cost_opt = cand_cost
            best = cand
        if cand_cost < cost:
            cost, current = cand_cost, cand
        elif rng.random() < acceptance_probability(cost, cand_cost, T):
            cost, current = cand_cost, cand
        if trace is not None:
            trace.append((T, cand_cost, cost, cost_opt))
        T *= config.delta
    return best, cost_opt


def anneal_initial(
    circuit: Circuit,
    dag: DependencyDag,
    model: HardwareModel,
    bundle: DistanceBundle,
    anneal_config: AnnealConfig | None = None,
    router_config: RouterConfig | None = None,
    start: Mapping | None = None,
    stats: dict | None = None,
) -> Mapping:
    """Hardware-aware annealing placement (shuffle / expand / reset moves)."""
    cfg = anneal_config or AnnealConfig()
    rng = random.Random(cfg.seed)
    weights = qubit_weights(model)
    cost_fn = MappingCost(circuit, model, bundle, router_config or RouterConfig(), dag)
    if start is None:
        start = random_mapping(circuit.num_logical_qubits, model, rng)
    moves: dict[str, int] = {}

    def neighbour(m: Mapping) -> Mapping:
        new, kind = get_neighbour(m, model, cfg.policy_probs, rng, weights)
        moves[kind] = moves.get(kind, 0) + 1
        return new

    best, best_cost = anneal(start, cost_fn, neighbour, cfg, rng)
    if stats is not None:
        stats.update(routing_calls=cost_fn.calls, best_cost=best_cost, moves=moves)
    return best
