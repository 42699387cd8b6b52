"""OpenQASM 2.0 subset: parsing, dependency DAG construction and emission.

Only the gate set the router understands is accepted. Anything else (custom
``gate`` definitions, classical conditionals, 3+-qubit gates) is rejected with
a :class:`QasmError` that carries the line and column of the offending token.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable, Sequence

if TYPE_CHECKING:
    from .router import RoutedCircuit

ONE_QUBIT_GATES = {
    "id": 0, "x": 0, "y": 0, "z": 0, "h": 0, "s": 0, "sdg": 0, "t": 0, "tdg": 0,
    "rx": 1, "ry": 1, "rz": 1, "u1": 1, "u2": 2, "u3": 3,
}
# builtin spellings from the OpenQASM 2.0 grammar
_ALIASES = {"CX": "cx", "U": "u3"}
_MULTI_QUBIT = {"ccx", "cswap", "c3x", "c4x", "rccx", "rc3x", "c3sqrtx"}


class QasmError(ValueError):
    """Raised for any source the parser refuses."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class GateNode:
    id: int
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    clbit: int | None = None

    @property
    def is_two_qubit(self) -> bool:
        return self.name == "cx"

    @property
    def q1(self) -> int:
        return self.qubits[0]

    @property
    def q2(self) -> int:
        return self.qubits[1]


@dataclass
class Circuit:
    num_logical_qubits: int
    gates: list[GateNode] = field(default_factory=list)
    num_classical_bits: int = 0

    def __post_init__(self) -> None:
        for g in self.gates:
            if any(q < 0 or q >= self.num_logical_qubits for q in g.qubits):
                raise ValueError(f"gate {g.id} ({g.name}) uses a qubit outside 0..{self.num_logical_qubits - 1}")
            if g.name == "cx" and (len(g.qubits) != 2 or g.q1 == g.q2):
                raise ValueError(f"cx gate {g.id} needs two distinct qubits")

    @property
    def cx_count(self) -> int:
        return sum(1 for g in self.gates if g.name == "cx")

    def reversed(self) -> Circuit:
        """Same gates in reverse program order (ids renumbered)."""
        gates = [
            GateNode(i, g.name, g.qubits, g.params, g.clbit)
            for i, g in enumerate(reversed(self.gates))
        ]
        return Circuit(self.num_logical_qubits, gates, self.num_classical_bits)


@dataclass
class DependencyDag:
    nodes: list[int]
    edges: list[tuple[int, int]]
    topo_order: list[int]
    preds: dict[int, list[int]]
    succs: dict[int, list[int]]


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<real>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?)
  | (?P<id>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<eq>==)
  | (?P<sym>[;,\[\](){}+\-*/^])
    """,
    re.VERBOSE,
)


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise QasmError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            toks.append(_Tok(kind, m.group(), line, pos - line_start + 1))
        pos = m.end()
    return toks


# ---------------------------------------------------------------------------
# parameter expressions

_BINOPS = {
    ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
    ast.Div: operator.truediv, ast.Pow: operator.pow,
}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp, "ln": math.log, "sqrt": math.sqrt}


def _eval_node(node: ast.AST) -> float:
    if isinstance(node, ast.Expression):
        return _eval_node(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left), _eval_node(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and len(node.args) == 1
        and not node.keywords
    ):
        return _FUNCS[node.func.id](_eval_node(node.args[0]))
    raise ValueError("unsupported expression")


def eval_param(text: str) -> float:
    """Evaluate a QASM real expression (``pi``, arithmetic, sin/cos/...)."""
    return _eval_node(ast.parse(text.replace("^", "**"), mode="eval"))


# ---------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, source: str):
        self.toks = _tokenize(source)
        self.i = 0
        self.qregs: dict[str, tuple[int, int]] = {}
        self.cregs: dict[str, tuple[int, int]] = {}
        self.nq = 0
        self.nc = 0
        self.gates: list[GateNode] = []

    # token helpers
    def _peek(self) -> _Tok | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def _last_pos(self) -> tuple[int, int]:
        if self.toks:
            t = self.toks[min(self.i, len(self.toks)) - 1]
            return t.line, t.col + len(t.text)
        return 1, 1

    def _error(self, msg: str, tok: _Tok | None = None) -> QasmError:
        if tok is None:
            tok = self._peek()
        if tok is None:
            return QasmError(msg + " (unexpected end of input)", *self._last_pos())
        return QasmError(msg, tok.line, tok.col)

    def _next(self) -> _Tok:
        tok = self._peek()
        if tok is None:
            raise self._error("syntax error")
        self.i += 1
        return tok

    def _expect(self, text: str) -> _Tok:
        tok = self._peek()
        if tok is None or tok.text != text:
            got = "end of input" if tok is None else repr(tok.text)
            raise self._error(f"syntax error: expected {text!r}, got {got}")
        self.i += 1
        return tok

    def _expect_kind(self, kind: str, what: str) -> _Tok:
        tok = self._peek()
        if tok is None or tok.kind != kind:
            raise self._error(f"syntax error: expected {what}")
        self.i += 1
        return tok

    def _uint(self) -> int:
        tok = self._expect_kind("real", "integer")
        if not tok.text.isdigit():
            raise self._error("syntax error: expected integer", tok)
        return int(tok.text)

    # grammar
    def parse(self) -> Circuit:
        tok = self._peek()
        if tok is not None and tok.text == "OPENQASM":
            self._next()
            ver = self._expect_kind("real", "version number")
            if ver.text not in ("2.0", "2"):
                raise self._error(f"unsupported OpenQASM version {ver.text}", ver)
            self._expect(";")
        while self._peek() is not None:
            self._statement()
        return Circuit(self.nq, self.gates, self.nc)

    def _statement(self) -> None:
        tok = self._next()
        word = tok.text
        if word == "include":
            self._expect_kind("string", "file name")
            self._expect(";")
        elif word in ("qreg", "creg"):
            name = self._expect_kind("id", "register name").text
            self._expect("[")
            size = self._uint()
            self._expect("]")
            self._expect(";")
            if name in self.qregs or name in self.cregs:
                raise self._error(f"register {name!r} redeclared", tok)
            if word == "qreg":
                self.qregs[name] = (self.nq, size)
                self.nq += size
            else:
                self.cregs[name] = (self.nc, size)
                self.nc += size
        elif word in ("gate", "opaque"):
            raise self._error(f"custom gate definitions are not supported ({word})", tok)
        elif word == "if":
            raise self._error("classical conditionals ('if') are not supported", tok)
        elif word == "reset":
            raise self._error("unsupported operation 'reset'", tok)
        elif word == "measure":
            self._measure(tok)
        elif word == "barrier":
            args = self._arg_list()
            self._expect(";")
            qubits = sorted({q for a in args for q in a})
            self._add("barrier", tuple(qubits))
        elif tok.kind == "id":
            self._gate(tok)
        else:
            raise self._error(f"syntax error: unexpected {word!r}", tok)

    def _argument(self, regs: dict[str, tuple[int, int]], kind: str) -> list[int]:
        name_tok = self._expect_kind("id", f"{kind} register")
        if name_tok.text not in regs:
            raise self._error(f"undeclared {kind} register {name_tok.text!r}", name_tok)
        offset, size = regs[name_tok.text]
        nxt = self._peek()
        if nxt is not None and nxt.text == "[":
            self._next()
            idx_tok = self._peek()
            idx = self._uint()
            self._expect("]")
            if idx >= size:
                raise self._error(f"index {idx} out of range for {name_tok.text}[{size}]", idx_tok)
            return [offset + idx]
        return list(range(offset, offset + size))

    def _arg_list(self) -> list[list[int]]:
        args = [self._argument(self.qregs, "quantum")]
        while self._peek() is not None and self._peek().text == ",":
            self._next()
            args.append(self._argument(self.qregs, "quantum"))
        return args

    def _params(self) -> list[float]:
        if self._peek() is None or self._peek().text != "(":
            return []
        start = self._next()
        params: list[float] = []
        depth, buf = 0, []
        while True:
            tok = self._next()
            if tok.text == "(":
                depth += 1
            elif tok.text == ")":
                if depth == 0:
                    break
                depth -= 1
            elif tok.text == "," and depth == 0:
                params.append(self._eval(buf, start))
                buf = []
                continue
            buf.append(tok)
        if buf or params:
            params.append(self._eval(buf, start))
        return params

    def _eval(self, toks: list[_Tok], start: _Tok) -> float:
        if not toks:
            raise self._error("syntax error: empty parameter", start)
        text = " ".join(t.text for t in toks)
        try:
            return eval_param(text)
        except (ValueError, SyntaxError, ZeroDivisionError, OverflowError):
            raise self._error(f"cannot evaluate parameter {text!r}", toks[0]) from None

    def _measure(self, tok: _Tok) -> None:
        qs = self._argument(self.qregs, "quantum")
        self._expect("->")
        cs = self._argument(self.cregs, "classical")
        self._expect(";")
        if len(qs) != len(cs):
            raise self._error("measure register sizes differ", tok)
        for q, c in zip(qs, cs):
            self._add("measure", (q,), clbit=c)

    def _gate(self, tok: _Tok) -> None:
        name = _ALIASES.get(tok.text, tok.text)
        if name in _MULTI_QUBIT:
            raise self._error(
                f"{name} acts on 3+ qubits; decompose it into cx and one-qubit gates before routing", tok
            )
        if name != "cx" and name not in ONE_QUBIT_GATES:
            raise self._error(f"unsupported gate {tok.text!r}", tok)
        params = self._params()
        nparams = 0 if name == "cx" else ONE_QUBIT_GATES[name]
        if len(params) != nparams:
            raise self._error(f"{name} takes {nparams} parameter(s), got {len(params)}", tok)
        args = self._arg_list()
        self._expect(";")
        arity = 2 if name == "cx" else 1
        if len(args) != arity:
            raise self._error(f"{name} takes {arity} qubit argument(s), got {len(args)}", tok)
        # register broadcasting: full registers expand element-wise
        width = max(len(a) for a in args)
        if any(len(a) not in (1, width) for a in args):
            raise self._error("register size mismatch in broadcast", tok)
        for k in range(width):
            qubits = tuple(a[0] if len(a) == 1 else a[k] for a in args)
            if arity == 2 and qubits[0] == qubits[1]:
                raise self._error("cx control and target must differ", tok)
            self._add(name, qubits, tuple(params))

    def _add(self, name: str, qubits: tuple[int, ...], params: tuple[float, ...] = (), clbit: int | None = None) -> None:
        self.gates.append(GateNode(len(self.gates), name, qubits, params, clbit))


def parse_qasm(source: str) -> Circuit:
    """Parse OpenQASM 2.0 text into a :class:`Circuit`.

    Multiple quantum registers are flattened in declaration order; the same
    holds for classical registers.
    """
    return _Parser(source).parse()


def build_dag(circuit: Circuit) -> DependencyDag:
    """Direct shared-qubit dependencies between gates.

    A barrier joins the frontiers of all its qubits, so every gate after it on
    any of those qubits depends on every last gate before it. Barrier nodes
    themselves are not part of the returned DAG.
    """
    frontier: dict[int, tuple[int, ...]] = {}
    preds: dict[int, list[int]] = {}
    succs: dict[int, list[int]] = {}
    nodes: list[int] = []
    edges: list[tuple[int, int]] = []
    for g in circuit.gates:
        if g.name == "barrier":
            joined = tuple(sorted({p for q in g.qubits for p in frontier.get(q, ())}))
            for q in g.qubits:
                frontier[q] = joined
            continue
        nodes.append(g.id)
        ps = sorted({p for q in g.qubits for p in frontier.get(q, ())})
        preds[g.id] = ps
        succs[g.id] = []
        for p in ps:
            succs[p].append(g.id)
            edges.append((p, g.id))
        for q in g.qubits:
            frontier[q] = (g.id,)
    # program order is already topological: every edge points forward
    return DependencyDag(nodes, edges, list(nodes), preds, succs)


# ---------------------------------------------------------------------------
# emission


def _fmt_param(p: float) -> str:
    return repr(float(p))


def _gate_line(name: str, qubits: Sequence[int], params: Sequence[float] = (), clbit: int | None = None) -> str:
    if name == "measure":
        return f"measure q[{qubits[0]}] -> c[{clbit}];"
    head = name if not params else f"{name}({','.join(_fmt_param(p) for p in params)})"
    return f"{head} {','.join(f'q[{q}]' for q in qubits)};"


def swap_cx(a: int, b: int) -> list[tuple[int, int]]:
    """Three-CNOT SWAP decomposition."""
    return [(a, b), (b, a), (a, b)]


def bridge_cx(c: int, m: int, t: int) -> list[tuple[int, int]]:
    """Four-CNOT Bridge: CNOT from ``c`` to ``t`` through their common neighbour ``m``."""
    return [(m, t), (c, m), (m, t), (c, m)]


def _mapping_str(mapping: Iterable[int | None]) -> str:
    return " ".join(f"q{i}->Q{p}" for i, p in enumerate(mapping) if p is not None)


def _body(num_qubits: int, num_clbits: int, lines: list[str], header: Sequence[str] = ()) -> str:
    out = [*header, "OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{num_qubits}];"]
    if num_clbits:
        out.append(f"creg c[{num_clbits}];")
    out.extend(lines)
    return "\n".join(out) + "\n"


def dump_circuit(circuit: Circuit) -> str:
    """Serialize a (logical or physical) circuit with a single ``q`` register."""
    lines = []
    for g in circuit.gates:
        if g.name == "barrier":
            lines.append(f"barrier {','.join(f'q[{q}]' for q in g.qubits)};")
        else:
            lines.append(_gate_line(g.name, g.qubits, g.params, g.clbit))
    return _body(circuit.num_logical_qubits, circuit.num_classical_bits, lines)


def emit_qasm(routed: RoutedCircuit) -> str:
    """Serialize a routed circuit over physical qubits.

    SWAPs become three ``cx`` and Bridges four. The initial and final
    logical-to-physical mappings are recorded in a leading comment.
    """
    lines: list[str] = []
    for op in routed.ops:
        if op.kind == "swap":
            lines.extend(_gate_line("cx", pair) for pair in swap_cx(*op.qubits))
        elif op.kind == "bridge":
            lines.extend(_gate_line("cx", pair) for pair in bridge_cx(*op.qubits))
        else:
            lines.append(_gate_line(op.name, op.qubits, op.params, op.clbit))
    header = [
        f"// initial mapping: {_mapping_str(routed.initial_mapping)}",
        f"// final mapping: {_mapping_str(routed.final_mapping)}",
    ]
    return _body(routed.num_physical_qubits, routed.num_classical_bits, lines, header)
