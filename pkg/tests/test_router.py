from __future__ import annotations

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamap import (
    Circuit,
    GateNode,
    HardwareModel,
    Mapping,
    RouterConfig,
    RoutingError,
    build_dag,
    build_distance_bundle,
    route,
)
from hamap.metrics import simulate, topology_compliant, verify_equivalence
from hamap.router import Bridge, Swap, _scores, bridge_middle, find_swap_candidates, score_swap, select_action

from conftest import bundle_and_dag, random_circuit, random_connected_model

ALPHA_SETTINGS = [(1.0, 0.0, 0.0), (0.5, 0.5, 0.0), (0.5, 0.0, 0.5)]


def run(model, circuit, mapping=None, **cfg):
    alphas = cfg.get("alphas", RouterConfig().alphas)
    bundle, dag = bundle_and_dag(model, circuit, alphas)
    mapping = mapping if mapping is not None else Mapping.linear(circuit.num_logical_qubits, model.num_qubits)
    return route(circuit, dag, model, bundle, mapping, RouterConfig(**cfg))


def replay(routed, circuit):
    """Re-derive the logical gate sequence from physical ops and the running mapping."""
    p2l = {p: l for l, p in enumerate(routed.initial_mapping)}
    seen = []
    for op in routed.ops:
        if op.kind == "swap":
            a, b = op.qubits
            la, lb = p2l.get(a), p2l.get(b)
            p2l.pop(a, None), p2l.pop(b, None)
            if la is not None:
                p2l[b] = la
            if lb is not None:
                p2l[a] = lb
        elif op.kind == "bridge":
            c, _, t = op.qubits
            seen.append((op.gate_id, "cx", (p2l[c], p2l[t])))
        else:
            seen.append((op.gate_id, op.name, tuple(p2l[q] for q in op.qubits)))
    final = [None] * len(routed.initial_mapping)
    for p, l in p2l.items():
        final[l] = p
    return seen, final


class TestMotivatingExample:
    def test_candidates(self, valencia, motivating):
        front = [motivating.gates[3]]
        m = Mapping.linear(5, 5)
        assert find_swap_candidates(front, m, valencia) == [(1, 2), (1, 3), (3, 4)]

    def test_lower_error_swap_is_chosen(self, valencia, motivating):
        assert valencia.cnot_error[(1, 2)] < valencia.cnot_error[(1, 3)]
        bundle = build_distance_bundle(valencia, (0.5, 0.5, 0.0))
        action = select_action([motivating.gates[3]], [], Mapping.linear(5, 5), bundle, valencia, RouterConfig())
        assert action == Swap((1, 2))

    def test_routing_result(self, valencia, motivating):
        r = run(valencia, motivating, alphas=(0.5, 0.5, 0.0))
        assert r.num_swaps == 1 and r.num_bridges == 0
        assert r.final_mapping == [0, 2, 1, 3, 4]
        assert r.added_cnot_count == 3
        assert topology_compliant(r, valencia)
        assert verify_equivalence(motivating, r)

    def test_bare_score_without_swap_cost(self, valencia, motivating):
        # without the swap's own weight the two unblocking swaps tie on hops
        # and the lexicographic first wins under pure hop distance
        bundle = build_distance_bundle(valencia, (1.0, 0.0, 0.0))
        cfg = RouterConfig(alphas=(1, 0, 0), swap_cost=False)
        action = select_action([motivating.gates[3]], [], Mapping.linear(5, 5), bundle, valencia, cfg)
        assert action == Swap((1, 2))


class TestBridgeExample:
    @pytest.mark.parametrize("alphas", ALPHA_SETTINGS)
    def test_bridge_vs_swap_only(self, valencia, bridge_circuit, alphas):
        with_bridge = run(valencia, bridge_circuit, alphas=alphas)
        swap_only = run(valencia, bridge_circuit, alphas=alphas, bridge_enabled=False)
        assert with_bridge.added_cnot_count == 3
        assert swap_only.added_cnot_count == 6
        assert swap_only.num_swaps == 2

    def test_bridge_op_and_unchanged_mapping(self, valencia, bridge_circuit):
        r = run(valencia, bridge_circuit)
        op = r.ops[2]
        assert (op.kind, op.qubits, op.gate_id) == ("bridge", (0, 1, 3), 2)
        assert r.final_mapping == r.initial_mapping == [0, 1, 2, 3, 4]
        assert [o.kind for o in r.ops] == ["gate", "gate", "bridge", "gate", "gate"]
        assert verify_equivalence(bridge_circuit, r)

    def test_select_action_returns_bridge(self, valencia, bridge_circuit):
        bundle = build_distance_bundle(valencia, (0.5, 0.5, 0.0))
        g = bridge_circuit.gates
        action = select_action([g[2]], [g[3], g[4]], Mapping.linear(5, 5), bundle, valencia, RouterConfig())
        assert action == Bridge(0, 1, 3, 2)

    def test_nonnegative_effect_gives_swap(self, valencia, bridge_circuit):
        # with nothing to look ahead to, the effect is zero and a Bridge is never chosen
        bundle = build_distance_bundle(valencia, (0.5, 0.5, 0.0))
        action = select_action([bridge_circuit.gates[2]], [], Mapping.linear(5, 5), bundle, valencia, RouterConfig())
        assert isinstance(action, Swap)

    def test_three_hops_never_bridges(self, valencia):
        # CX(0,4) is three hops apart; the look-ahead gate CX(1,3) is hurt by any swap on Q1/Q3
        c = Circuit(5, [GateNode(0, "cx", (0, 4)), GateNode(1, "cx", (1, 3))])
        bundle = build_distance_bundle(valencia, (1.0, 0.0, 0.0))
        action = select_action([c.gates[0]], [c.gates[1]], Mapping.linear(5, 5), bundle, valencia, RouterConfig())
        assert isinstance(action, Swap)

    def test_bridge_middle_prefers_low_error(self):
        # square 0-1-3-2-0: qubits 0 and 3 share neighbours 1 and 2
        edges = [(0, 1), (1, 3), (0, 2), (2, 3)]
        m = HardwareModel.uniform(4, edges, error=0.01)
        err = dict(m.cnot_error)
        err[(0, 1)] = err[(1, 0)] = 0.05
        m = HardwareModel(4, frozenset(edges), err, dict(m.cnot_time))
        assert bridge_middle(m, 0, 3) == 2
        with pytest.raises(ValueError):
            bridge_middle(m, 0, 1)


class TestScore:
    def test_empty_extended(self, valencia, motivating):
        bundle = build_distance_bundle(valencia, (0.5, 0.5, 0.0))
        h, effect = score_swap((1, 2), [motivating.gates[3]], [], Mapping.linear(5, 5), bundle.D, 0.5)
        # after the swap q2 sits on Q1, adjacent to Q3
        assert h == pytest.approx(bundle.D[1, 3])
        assert effect == 0.0

    def test_disjoint_swap_is_neutral(self, valencia):
        bundle = build_distance_bundle(valencia, (0.5, 0.5, 0.0))
        front = [GateNode(0, "cx", (2, 4))]
        ext = [GateNode(1, "cx", (2, 4))]
        mapping = Mapping([0, 1, 4, 2, 3], 5)  # logical 2 and 4 sit on Q4 and Q3
        h, effect = score_swap((0, 1), front, ext, mapping, bundle.D, 0.5)
        assert h == pytest.approx(1.5 * bundle.D[4, 3])
        assert effect == 0.0

    @settings(max_examples=80, deadline=None)
    @given(st.integers(2, 9), st.integers(0, 10**6), st.floats(0, 2))
    def test_fast_scores_match_direct(self, n, seed, W):
        rng = random.Random(seed)
        model = random_connected_model(max(n, 3), rng)
        k = rng.randint(2, model.num_qubits)
        mapping = Mapping(rng.sample(range(model.num_qubits), k), model.num_qubits)
        front_qubits = rng.sample(range(k), 2 * (k // 2))
        front = [GateNode(i, "cx", (front_qubits[2 * i], front_qubits[2 * i + 1])) for i in range(len(front_qubits) // 2)]
        ext = [GateNode(100 + i, "cx", tuple(rng.sample(range(k), 2))) for i in range(rng.randint(0, 6))]
        bundle = build_distance_bundle(model, (rng.random(), rng.random(), rng.random()))
        cands = find_swap_candidates(front, mapping, model)
        fast = _scores(front, ext, mapping, bundle.D_rows, W, cands)
        for cand, (h, e) in zip(cands, fast):
            h2, e2 = score_swap(cand, front, ext, mapping, bundle.D, W)
            assert h == pytest.approx(h2, abs=1e-12)
            assert e == pytest.approx(e2, abs=1e-12)


class TestRouting:
    def test_compliant_circuit_is_untouched(self, valencia):
        c = Circuit(5, [GateNode(0, "cx", (0, 1)), GateNode(1, "h", (2,)), GateNode(2, "cx", (3, 4)),
                        GateNode(3, "cx", (1, 2))])
        r = run(valencia, c)
        assert r.added_cnot_count == 0
        pos = {op.gate_id: i for i, op in enumerate(r.ops)}
        for a, b in build_dag(c).edges:
            assert pos[a] < pos[b]

    def test_one_qubit_only(self, valencia):
        c = Circuit(3, [GateNode(i, "h", (i,)) for i in range(3)])
        assert run(valencia, c).ops[0].name == "h"

    def test_too_many_qubits(self, valencia):
        with pytest.raises(ValueError):
            run(valencia, Circuit(6, []))

    def test_single_edge_device_always_executable(self):
        m = HardwareModel.uniform(2, [(0, 1)])
        c = Circuit(2, [GateNode(0, "cx", (0, 1)), GateNode(1, "cx", (1, 0))])
        assert run(m, c).added_cnot_count == 0

    def test_routing_error_is_runtime_error(self):
        assert issubclass(RoutingError, RuntimeError)

    def test_measurements_follow_their_qubit(self, valencia, motivating):
        gates = list(motivating.gates) + [GateNode(4, "measure", (2,), clbit=0)]
        c = Circuit(5, gates, num_classical_bits=1)
        r = run(valencia, c)
        meas = r.ops[-1]
        assert meas.name == "measure" and meas.qubits == (r.final_mapping[2],)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(2, 5), st.integers(0, 40), st.integers(0, 10**6),
           st.sampled_from(ALPHA_SETTINGS), st.booleans())
    def test_properties_on_valencia(self, valencia, n, m, seed, alphas, bridges):
        rng = random.Random(seed)
        c = random_circuit(n, m, rng)
        start = Mapping(rng.sample(range(5), n), 5)
        r = run(valencia, c, start, alphas=alphas, bridge_enabled=bridges)
        assert topology_compliant(r, valencia)
        # every original gate appears once, in an order consistent with the DAG
        seen, final = replay(r, c)
        assert sorted(gid for gid, _, _ in seen) == [g.id for g in c.gates]
        by_id = {g.id: g for g in c.gates}
        for gid, name, qubits in seen:
            assert (name, qubits) == (by_id[gid].name, by_id[gid].qubits)
        pos = {gid: i for i, (gid, _, _) in enumerate(seen)}
        assert all(pos[a] < pos[b] for a, b in build_dag(c).edges)
        assert final == r.final_mapping
        assert len(r.cx_pairs()) == c.cx_count + r.added_cnot_count
        assert verify_equivalence(c, r)
        if not bridges:
            assert r.num_bridges == 0

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6))
    def test_deterministic(self, almaden, seed):
        rng = random.Random(seed)
        c = random_circuit(12, 80, rng)
        start = Mapping(rng.sample(range(20), 12), 20)
        assert run(almaden, c, start).ops == run(almaden, c, start).ops

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10**6), st.floats(0.1, 10))
    def test_alpha_scaling_invariance(self, almaden, seed, k):
        rng = random.Random(seed)
        c = random_circuit(8, 50, rng)
        start = Mapping(rng.sample(range(20), 8), 20)
        a = (0.3, 0.5, 0.2)
        r1 = run(almaden, c, start, alphas=a)
        r2 = run(almaden, c, start, alphas=tuple(k * x for x in a))
        assert r1.ops == r2.ops

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 10**6))
    def test_front_hops_never_increase(self, almaden, seed):
        # hop-only scoring without look-ahead: the chosen swap never makes the front layer worse
        rng = random.Random(seed)
        k = rng.randint(2, 20)
        qubits = rng.sample(range(k), 2 * (k // 2))
        front = [GateNode(i, "cx", (qubits[2 * i], qubits[2 * i + 1])) for i in range(len(qubits) // 2)]
        mapping = Mapping(rng.sample(range(20), k), 20)
        if all(almaden.is_adjacent(mapping[g.q1], mapping[g.q2]) for g in front):
            return
        bundle = build_distance_bundle(almaden, (1.0, 0.0, 0.0))
        action = select_action(front, [], mapping, bundle, almaden, RouterConfig(alphas=(1, 0, 0), W=0.0))
        assert isinstance(action, Swap)
        after = mapping.swapped(*action.edge)
        hops = bundle.S_raw
        before_sum = sum(hops[mapping[g.q1], mapping[g.q2]] for g in front)
        after_sum = sum(hops[after[g.q1], after[g.q2]] for g in front)
        assert after_sum <= before_sum

    def test_swap_semantics_via_simulation(self, valencia, motivating):
        r = run(valencia, motivating)
        state = simulate(r)
        # X on q1 then the CX chain flips q1, q2, q3; final mapping says where they ended up
        idx = ["0"] * 5
        for lq in (1, 2, 3):
            idx[r.final_mapping[lq]] = "1"
        prob = abs(state.tensor[tuple(int(b) for b in idx)]) ** 2
        assert prob == pytest.approx(1.0)
