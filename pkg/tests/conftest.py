from __future__ import annotations

import itertools
import random

import pytest

from hamap import Circuit, GateNode, HardwareModel, build_dag, build_distance_bundle, load_calibration, parse_qasm

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'

# X on q1 then a CX chain; on valencia the last CX is the one that needs routing
MOTIVATING_QASM = HEADER + """qreg q[5];
x q[1];
cx q[0],q[1];
cx q[1],q[2];
cx q[2],q[3];
"""

# Third gate is two hops apart under the identity mapping; SWAP(0,1) would
# break the last gate, a Bridge keeps it executable.
BRIDGE_QASM = HEADER + """qreg q[5];
cx q[0],q[1];
cx q[1],q[2];
cx q[0],q[3];
cx q[3],q[4];
cx q[1],q[3];
"""


@pytest.fixture(scope="session")
def valencia():
    return load_calibration("valencia")


@pytest.fixture(scope="session")
def almaden():
    return load_calibration("almaden")


@pytest.fixture
def motivating():
    return parse_qasm(MOTIVATING_QASM)


@pytest.fixture
def bridge_circuit():
    return parse_qasm(BRIDGE_QASM)


def random_circuit(num_qubits: int, num_gates: int, rng: random.Random, cx_fraction: float = 0.6) -> Circuit:
    """Random mix of CX and parametrized/fixed one-qubit gates."""
    gates = []
    for i in range(num_gates):
        if num_qubits > 1 and rng.random() < cx_fraction:
            a, b = rng.sample(range(num_qubits), 2)
            gates.append(GateNode(i, "cx", (a, b)))
        else:
            q = rng.randrange(num_qubits)
            kind = rng.choice(["h", "x", "t", "sdg", "rz", "u3"])
            if kind == "rz":
                gates.append(GateNode(i, kind, (q,), (rng.uniform(-3, 3),)))
            elif kind == "u3":
                gates.append(GateNode(i, kind, (q,), tuple(rng.uniform(-3, 3) for _ in range(3))))
            else:
                gates.append(GateNode(i, kind, (q,)))
    return Circuit(num_qubits, gates)


def bundle_and_dag(model, circuit, alphas=(0.5, 0.5, 0.0)):
    return build_distance_bundle(model, alphas), build_dag(circuit)


def random_connected_model(n: int, rng: random.Random, extra: float = 0.3) -> HardwareModel:
    """Random spanning tree plus extra edges, random directional calibration."""
    edges = set()
    order = list(range(n))
    rng.shuffle(order)
    for i in range(1, n):
        a, b = order[i], order[rng.randrange(i)]
        edges.add((min(a, b), max(a, b)))
    for a, b in itertools.combinations(range(n), 2):
        if rng.random() < extra:
            edges.add((a, b))
    err, tim = {}, {}
    for a, b in edges:
        for p in ((a, b), (b, a)):
            err[p] = rng.uniform(0.001, 0.08)
            tim[p] = rng.uniform(150, 600)
    return HardwareModel(n, frozenset(edges), err, tim)


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
