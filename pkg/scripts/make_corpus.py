"""Regenerate the benchmark corpus in benchmarks/.

Every multi-qubit gate is lowered to cx plus single-qubit gates so the files
parse with the restricted QASM front end.
"""

from __future__ import annotations

import argparse
import math
import random
from pathlib import Path

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'


class Builder:
    def __init__(self, n: int, measure: bool = False):
        self.n = n
        self.lines: list[str] = []
        self.measure = measure

    def g(self, text: str) -> None:
        self.lines.append(text + ";")

    def cx(self, a: int, b: int) -> None:
        self.g(f"cx q[{a}],q[{b}]")

    def cu1(self, theta: float, a: int, b: int) -> None:
        self.g(f"u1({theta / 2!r}) q[{a}]")
        self.cx(a, b)
        self.g(f"u1({-theta / 2!r}) q[{b}]")
        self.cx(a, b)
        self.g(f"u1({theta / 2!r}) q[{b}]")

    def ccx(self, a: int, b: int, c: int) -> None:
        self.g(f"h q[{c}]")
        self.cx(b, c)
        self.g(f"tdg q[{c}]")
        self.cx(a, c)
        self.g(f"t q[{c}]")
        self.cx(b, c)
        self.g(f"tdg q[{c}]")
        self.cx(a, c)
        self.g(f"t q[{b}]")
        self.g(f"t q[{c}]")
        self.g(f"h q[{c}]")
        self.cx(a, b)
        self.g(f"t q[{a}]")
        self.g(f"tdg q[{b}]")
        self.cx(a, b)

    def text(self) -> str:
        body = [HEADER, f"qreg q[{self.n}];\n"]
        if self.measure:
            body.append(f"creg c[{self.n}];\n")
        body.extend(line + "\n" for line in self.lines)
        if self.measure:
            body.extend(f"measure q[{i}] -> c[{i}];\n" for i in range(self.n))
        return "".join(body)


def qft(n: int) -> Builder:
    b = Builder(n, measure=True)
    for i in range(n):
        b.g(f"h q[{i}]")
        for j in range(i + 1, n):
            b.cu1(math.pi / 2 ** (j - i), j, i)
    return b


def ghz(n: int) -> Builder:
    b = Builder(n, measure=True)
    b.g("h q[0]")
    for i in range(n - 1):
        b.cx(i, i + 1)
    return b


def bernstein_vazirani(n: int, secret: int) -> Builder:
    # last qubit is the oracle ancilla
    b = Builder(n, measure=False)
    anc = n - 1
    b.g(f"x q[{anc}]")
    for i in range(n):
        b.g(f"h q[{i}]")
    for i in range(n - 1):
        if secret >> i & 1:
            b.cx(i, anc)
    for i in range(n - 1):
        b.g(f"h q[{i}]")
    return b


def cuccaro_adder(bits: int) -> Builder:
    # layout: c0, then a_i, b_i interleaved, then carry-out
    n = 2 * bits + 2
    b = Builder(n, measure=True)
    a = [1 + 2 * i for i in range(bits)]
    bb = [2 + 2 * i for i in range(bits)]
    z = n - 1

    def maj(x, y, w):
        b.cx(w, y)
        b.cx(w, x)
        b.ccx(x, y, w)

    def uma(x, y, w):
        b.ccx(x, y, w)
        b.cx(w, x)
        b.cx(x, y)

    for i in range(bits):
        b.g(f"x q[{a[i]}]")
    carry = [0] + a
    for i in range(bits):
        maj(carry[i], bb[i], a[i])
    b.cx(a[-1], z)
    for i in reversed(range(bits)):
        uma(carry[i], bb[i], a[i])
    return b


def toffoli_chain(n: int) -> Builder:
    b = Builder(n, measure=True)
    for i in range(n):
        b.g(f"h q[{i}]")
    for i in range(n - 2):
        b.ccx(i, i + 1, i + 2)
    return b


def random_cx(n: int, gates: int, seed: int) -> Builder:
    rng = random.Random(seed)
    b = Builder(n)
    for _ in range(gates):
        if rng.random() < 0.6:
            x, y = rng.sample(range(n), 2)
            b.cx(x, y)
        else:
            b.g(f"{rng.choice(['h', 't', 's', 'x'])} q[{rng.randrange(n)}]")
    return b


CORPUS = {
    "qft_4": lambda: qft(4),
    "qft_5": lambda: qft(5),
    "qft_10": lambda: qft(10),
    "ghz_5": lambda: ghz(5),
    "ghz_12": lambda: ghz(12),
    "bv_5": lambda: bernstein_vazirani(5, 0b1011),
    "bv_10": lambda: bernstein_vazirani(10, 0b101101011),
    "adder_1bit": lambda: cuccaro_adder(1),
    "adder_4bit": lambda: cuccaro_adder(4),
    "toffoli_chain_5": lambda: toffoli_chain(5),
    "toffoli_chain_8": lambda: toffoli_chain(8),
    "random_5q_40": lambda: random_cx(5, 40, 5),
    "random_8q_80": lambda: random_cx(8, 80, 8),
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parent.parent / "benchmarks"))
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, make in CORPUS.items():
        (out / f"{name}.qasm").write_text(make().text(), encoding="utf-8")
    print(f"wrote {len(CORPUS)} circuits to {out}")


if __name__ == "__main__":
    main()
