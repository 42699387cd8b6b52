from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamap import Circuit, GateNode, HardwareModel, Mapping, RouterConfig, build_dag, build_distance_bundle, route
from hamap.initial import (
    AnnealConfig,
    MappingCost,
    acceptance_probability,
    anneal,
    anneal_initial,
    expand_move,
    get_neighbour,
    qubit_weights,
    random_mapping,
    reset_move,
    sabre_initial,
    shuffle_move,
)

from conftest import random_circuit


class TestRandomMapping:
    def test_permutation(self, valencia):
        m = random_mapping(5, valencia, 3)
        assert sorted(m.l2p) == [0, 1, 2, 3, 4]

    def test_injection(self, almaden):
        m = random_mapping(3, almaden, 1)
        assert len(set(m.l2p)) == 3
        assert sum(p is None for p in m.p2l) == 17

    def test_capacity(self, valencia):
        with pytest.raises(ValueError):
            random_mapping(6, valencia)


class TestSabre:
    def setup_circuit(self, model, n=5, gates=30, seed=0):
        c = random_circuit(n, gates, random.Random(seed))
        return c, build_dag(c), build_distance_bundle(model, (1, 0, 0))

    def test_budget_two_is_one_refinement(self, valencia):
        c, dag, b = self.setup_circuit(valencia)
        stats = {}
        sabre_initial(c, dag, valencia, b, seed=0, budget=2, stats=stats)
        assert stats["refinements"] == 1
        assert stats["routing_calls"] == 2

    def test_budget_hundred(self, valencia):
        c, dag, b = self.setup_circuit(valencia)
        stats = {}
        sabre_initial(c, dag, valencia, b, seed=0, budget=100, stats=stats)
        assert stats["refinements"] == 50
        assert stats["routing_calls"] == 100

    def test_compliant_start_is_kept_compliant(self):
        m = HardwareModel.uniform(2, [(0, 1)])
        c = Circuit(2, [GateNode(0, "cx", (0, 1)), GateNode(1, "cx", (1, 0))])
        dag = build_dag(c)
        b = build_distance_bundle(m)
        start = sabre_initial(c, dag, m, b, budget=4)
        assert route(c, dag, m, b, start).added_cnot_count == 0

    def test_best_cost_matches_a_backward_pass(self, almaden):
        c, dag, b = self.setup_circuit(almaden, n=8, gates=60, seed=4)
        cfg = RouterConfig(alphas=(1, 0, 0))
        stats = {}
        best = sabre_initial(c, dag, almaden, b, cfg, seed=1, budget=10, stats=stats)
        # recompute the five refinements independently and check the winner
        rng = random.Random(1)
        rev = c.reversed()
        rev_dag = build_dag(rev)
        found = []
        for _ in range(5):
            start = random_mapping(8, almaden, rng)
            fwd = route(c, dag, almaden, b, start, cfg)
            bwd = route(rev, rev_dag, almaden, b, fwd.final_mapping, cfg)
            found.append((bwd.added_cnot_count, bwd.final_mapping))
        cost, mapping = min(found, key=lambda x: x[0])
        assert stats["best_cost"] == cost
        assert best.l2p == mapping

    def test_deterministic(self, valencia):
        c, dag, b = self.setup_circuit(valencia)
        assert sabre_initial(c, dag, valencia, b, seed=7, budget=8) == sabre_initial(c, dag, valencia, b, seed=7, budget=8)


class TestNeighbourMoves:
    def test_shuffle_keeps_support(self, almaden):
        m = random_mapping(6, almaden, 0)
        s = shuffle_move(m, random.Random(1))
        assert s.occupied() == m.occupied()

    def test_expand_impossible_on_full_device(self, valencia):
        m = Mapping.linear(5, 5)
        assert expand_move(m, valencia, qubit_weights(valencia)) is None
        new, kind = get_neighbour(m, valencia, (0.0, 1.0, 0.0), random.Random(0))
        assert kind == "shuffle"
        assert new.occupied() == m.occupied()

    def test_expand_moves_one_qubit(self, almaden):
        w = qubit_weights(almaden)
        m = Mapping([0, 1, 2], 20)
        e = expand_move(m, almaden, w)
        assert len(e.occupied() - m.occupied()) == 1
        assert almaden.is_connected(e.occupied())

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 19), st.integers(0, 10**6))
    def test_expand_never_fragments(self, almaden, k, seed):
        rng = random.Random(seed)
        w = qubit_weights(almaden)
        m = reset_move(Mapping(rng.sample(range(20), k), 20), almaden, w, rng)
        e = expand_move(m, almaden, w)
        assert e is not None
        assert almaden.is_connected(e.occupied())

    def test_reset_from_q4(self, valencia):
        m = Mapping([0, 2, 3], 5)
        r = reset_move(m, valencia, qubit_weights(valencia), random.Random(0), start=4)
        assert 4 in r.occupied()
        assert valencia.is_connected(r.occupied())

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 20), st.integers(0, 10**6))
    def test_reset_is_connected(self, almaden, k, seed):
        rng = random.Random(seed)
        m = random_mapping(k, almaden, rng)
        r = reset_move(m, almaden, qubit_weights(almaden), rng)
        assert len(r) == k
        assert almaden.is_connected(r.occupied())

    def test_policy_frequencies(self, almaden):
        rng = random.Random(0)
        m = random_mapping(5, almaden, 0)
        w = qubit_weights(almaden)
        counts = {"shuffle": 0, "expand": 0, "reset": 0}
        for _ in range(5000):
            counts[get_neighbour(m, almaden, (0.9, 0.08, 0.02), rng, w)[1]] += 1
        assert counts["shuffle"] == pytest.approx(4500, abs=3 * math.sqrt(5000 * 0.9 * 0.1))
        assert counts["expand"] == pytest.approx(400, abs=3 * math.sqrt(5000 * 0.08 * 0.92))
        assert counts["reset"] == pytest.approx(100, abs=3 * math.sqrt(5000 * 0.02 * 0.98))


class TestQubitWeights:
    def test_valencia_top_two(self, valencia):
        w = sorted(qubit_weights(valencia), key=lambda x: -x.score)
        assert {w[0].qubit, w[1].qubit} == {1, 3}

    def test_uniform_ranks_by_degree(self):
        edges = [(0, 1), (1, 2), (1, 3), (3, 4)]
        m = HardwareModel.uniform(5, edges)
        scores = {x.qubit: x.score for x in qubit_weights(m)}
        deg = {0: 1, 1: 3, 2: 1, 3: 2, 4: 1}
        for a in range(5):
            for b in range(5):
                if deg[a] > deg[b]:
                    assert scores[a] > scores[b]

    def test_single_qubit_device(self):
        m = HardwareModel(1, frozenset(), {}, {}, [0.05])
        (w,) = qubit_weights(m)
        assert w.score == pytest.approx(-0.05)


class TestAnneal:
    def test_acceptance_probability(self):
        assert acceptance_probability(1.0, 0.5, 1.0) == 1.0
        assert acceptance_probability(1.0, 1.5, 1.0) == pytest.approx(math.exp(-0.5))
        assert acceptance_probability(0.0, 1.0, 1e-6) == pytest.approx(0.0)

    def test_improvement_updates_best(self):
        start = Mapping([0], 3)
        costs = {0: 3.0, 1: 2.0, 2: 1.0}
        best, c = anneal(
            start, lambda m: costs[m[0]], lambda m: Mapping([(m[0] + 1) % 3], 3),
            AnnealConfig(mapping_call_budget=3), random.Random(0),
        )
        assert best == Mapping([2], 3) and c == 1.0

    def test_constant_cost(self):
        start = Mapping([0, 1], 4)
        cfg = AnnealConfig(mapping_call_budget=20)
        best, c = anneal(start, lambda m: 5.0, lambda m: shuffle_move(m, random.Random(0)), cfg, random.Random(0))
        assert c == 5.0

    def test_cold_rejects_worse(self):
        calls = []

        def cost(m):
            calls.append(m)
            return float(m[0])

        start = Mapping([0], 50)
        cfg = AnnealConfig(T_init=1e-6, T_f=1e-9, mapping_call_budget=30)
        trace = []
        anneal(start, cost, lambda m: Mapping([m[0] + 1], 50), cfg, random.Random(0), trace)
        # every neighbour is worse than the start; at T ~ 1e-6 none are accepted
        assert all(cur == 0.0 for _, _, cur, _ in trace)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6), st.integers(1, 60))
    def test_budget_and_monotone_best(self, seed, budget):
        rng = random.Random(seed)
        table = {}

        def cost(m):
            cost.calls += 1
            return table.setdefault(tuple(m.l2p), rng.random())

        cost.calls = 0
        cfg = AnnealConfig(mapping_call_budget=budget)
        trace = []
        start = Mapping([0, 1, 2], 6)
        best, c = anneal(start, cost, lambda m: shuffle_move(Mapping(rng.sample(range(6), 3), 6), rng), cfg,
                         random.Random(seed), trace)
        assert cost.calls <= budget
        assert c <= table[(0, 1, 2)]
        assert c == table[tuple(best.l2p)]
        bests = [t[3] for t in trace]
        assert bests == sorted(bests, reverse=True)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AnnealConfig(T_init=0.01, T_f=1.0)
        with pytest.raises(ValueError):
            AnnealConfig(policy_probs=(0.5, 0.5, 0.5))
        cfg = AnnealConfig(mapping_call_budget=100)
        assert cfg.T_init * cfg.delta**100 == pytest.approx(cfg.T_f)

    def test_anneal_initial(self, almaden):
        c = random_circuit(8, 60, random.Random(3))
        dag = build_dag(c)
        b = build_distance_bundle(almaden, (0.5, 0.5, 0))
        stats = {}
        cfg = AnnealConfig(mapping_call_budget=15, seed=5)
        m = anneal_initial(c, dag, almaden, b, cfg, RouterConfig(), stats=stats)
        assert len(m) == 8
        assert stats["routing_calls"] <= 15
        again = anneal_initial(c, dag, almaden, b, AnnealConfig(mapping_call_budget=15, seed=5), RouterConfig())
        assert m == again
        cost = MappingCost(c, almaden, b, RouterConfig(), dag)
        assert cost(m) == pytest.approx(stats["best_cost"])
