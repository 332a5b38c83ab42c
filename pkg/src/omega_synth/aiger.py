#!/usr/bin/env python3
"""
ASCII AIGER circuits.

Reads and writes the ``aag`` format, simulates circuits (one step or a whole
batch of latch/input assignments at once with numpy) and builds new
circuits with structural hashing. Literals follow AIGER: ``2*var`` is the
positive literal of ``var``, ``2*var + 1`` its negation, 0 is false and 1 is
true.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import ParseError, SpecificationError

logger = logging.getLogger(__name__)

CONTROLLABLE_PREFIX = "controllable_"


@dataclass(frozen=True)
class AigCircuit:
    """
    An and-inverter graph with latches.

    ``latches`` holds ``(current literal, next-state literal)`` pairs, all
    latches reset to 0. ``ands`` holds ``(lhs, rhs0, rhs1)`` triples in
    topological order. ``symbols`` maps ``('i'|'l'|'o', position)`` to a name.
    """

    max_var: int
    inputs: Tuple[int, ...] = ()
    latches: Tuple[Tuple[int, int], ...] = ()
    outputs: Tuple[int, ...] = ()
    ands: Tuple[Tuple[int, int, int], ...] = ()
    symbols: Dict[Tuple[str, int], str] = field(default_factory=dict)
    comments: Tuple[str, ...] = ()

    @property
    def num_inputs(self) -> int:
        return len(self.inputs)

    @property
    def num_latches(self) -> int:
        return len(self.latches)

    @property
    def num_outputs(self) -> int:
        return len(self.outputs)

    @property
    def gate_count(self) -> int:
        return len(self.ands)

    def input_names(self) -> List[str]:
        return [self.symbols.get(("i", k), f"i{k}") for k in range(self.num_inputs)]

    def latch_names(self) -> List[str]:
        return [self.symbols.get(("l", k), f"l{k}") for k in range(self.num_latches)]

    def output_names(self) -> List[str]:
        return [self.symbols.get(("o", k), f"o{k}") for k in range(self.num_outputs)]


def _parse_ints(line, lineno, count, what):
    fields = line.split()
    if len(fields) < count:
        raise ParseError(f"{what} line needs {count} numbers, found {len(fields)}", lineno)
    try:
        return [int(f) for f in fields]
    except ValueError:
        raise ParseError(f"malformed {what} line {line!r}", lineno)


def parse_aag(text: str) -> AigCircuit:
    """
    Parse an ASCII AIGER circuit.

    Args:
        text (str): ``aag`` text

    Returns:
        AigCircuit: the circuit with its AND gates in topological order

    Raises:
        ParseError: on malformed input, binary AIGER, non-zero latch resets,
            undefined literals or combinational cycles
    """
    lines = text.split("\n")
    header = lines[0].split() if lines else []
    if not header:
        raise ParseError("empty input, expected an 'aag' header", 1)
    if header[0] == "aig":
        raise ParseError("binary AIGER is not supported; convert to ASCII 'aag' first", 1, 1)
    if header[0] != "aag":
        raise ParseError(f"expected 'aag' header, found {header[0]!r}", 1, 1)
    try:
        counts = [int(f) for f in header[1:]]
    except ValueError:
        raise ParseError("malformed header counts", 1)
    if len(counts) < 5:
        raise ParseError("header needs M I L O A", 1)
    if any(c != 0 for c in counts[5:]):
        raise ParseError("bad-state, constraint, justice and fairness sections are not supported", 1)
    max_var, n_in, n_latch, n_out, n_and = counts[:5]

    position = 1

    def next_line(what):
        nonlocal position
        if position >= len(lines) or not lines[position].strip():
            raise ParseError(f"unexpected end of input, expected {what}", position + 1)
        position += 1
        return lines[position - 1], position

    defined = {0: "constant"}

    def define(var, kind, lineno):
        if var == 0 or var > max_var:
            raise ParseError(f"variable {var} out of range (M = {max_var})", lineno)
        if var in defined:
            raise ParseError(f"variable {var} defined twice", lineno)
        defined[var] = kind

    inputs = []
    for _ in range(n_in):
        line, lineno = next_line("an input")
        lit = _parse_ints(line, lineno, 1, "input")[0]
        if lit & 1:
            raise ParseError(f"input literal {lit} must be even", lineno)
        define(lit >> 1, "input", lineno)
        inputs.append(lit)

    latches = []
    for _ in range(n_latch):
        line, lineno = next_line("a latch")
        fields = _parse_ints(line, lineno, 2, "latch")
        if fields[0] & 1:
            raise ParseError(f"latch literal {fields[0]} must be even", lineno)
        if len(fields) > 2 and fields[2] != 0:
            raise ParseError(f"latch {fields[0]} has non-zero reset value {fields[2]}", lineno)
        define(fields[0] >> 1, "latch", lineno)
        latches.append((fields[0], fields[1], lineno))

    outputs = []
    for _ in range(n_out):
        line, lineno = next_line("an output")
        outputs.append((_parse_ints(line, lineno, 1, "output")[0], lineno))

    ands = []
    for _ in range(n_and):
        line, lineno = next_line("an AND gate")
        lhs, rhs0, rhs1 = _parse_ints(line, lineno, 3, "AND")[:3]
        if lhs & 1:
            raise ParseError(f"AND output literal {lhs} must be even", lineno)
        define(lhs >> 1, "and", lineno)
        ands.append((lhs, rhs0, rhs1, lineno))

    def check_literal(lit, lineno):
        if lit < 0 or lit > 2 * max_var + 1:
            raise ParseError(f"literal {lit} out of range (M = {max_var})", lineno)
        if (lit >> 1) not in defined:
            raise ParseError(f"literal {lit} refers to undefined variable {lit >> 1}", lineno)

    for _, nxt, lineno in latches:
        check_literal(nxt, lineno)
    for lit, lineno in outputs:
        check_literal(lit, lineno)
    graph = nx.DiGraph()
    by_var = {}
    for lhs, rhs0, rhs1, lineno in ands:
        check_literal(rhs0, lineno)
        check_literal(rhs1, lineno)
        by_var[lhs >> 1] = (lhs, rhs0, rhs1)
        graph.add_node(lhs >> 1)
        for rhs in (rhs0, rhs1):
            if defined[rhs >> 1] == "and":
                graph.add_edge(rhs >> 1, lhs >> 1)
    try:
        order = list(nx.lexicographical_topological_sort(graph))
    except nx.NetworkXUnfeasible:
        cycle = nx.find_cycle(graph)
        raise ParseError(f"combinational cycle through AND variables "
                         f"{sorted({u for u, _ in cycle})}")

    symbols = {}
    comments = []
    limits = {"i": n_in, "l": n_latch, "o": n_out}
    while position < len(lines):
        line = lines[position]
        position += 1
        if not line.strip():
            continue
        if line.strip() == "c":
            comments = [l for l in lines[position:]]
            while comments and not comments[-1]:
                comments.pop()
            break
        kind = line[0]
        head, _, name = line.partition(" ")
        if kind not in limits or not head[1:].isdigit() or not name:
            raise ParseError(f"malformed symbol table entry {line!r}", position)
        index = int(head[1:])
        if index >= limits[kind]:
            raise ParseError(f"symbol {head} refers to a missing {kind} entry", position)
        symbols[(kind, index)] = name

    circuit = AigCircuit(
        max_var=max_var,
        inputs=tuple(inputs),
        latches=tuple((lit, nxt) for lit, nxt, _ in latches),
        outputs=tuple(lit for lit, _ in outputs),
        ands=tuple(by_var[v] for v in order),
        symbols=symbols,
        comments=tuple(comments),
    )
    logger.debug("Parsed aag M=%d I=%d L=%d O=%d A=%d", max_var, n_in, n_latch, n_out, n_and)
    return circuit


def print_aag(circuit: AigCircuit) -> str:
    """Render a circuit as ``aag`` text with its symbol table and comments."""
    lines = [f"aag {circuit.max_var} {circuit.num_inputs} {circuit.num_latches} "
             f"{circuit.num_outputs} {circuit.gate_count}"]
    lines += [str(lit) for lit in circuit.inputs]
    lines += [f"{lit} {nxt}" for lit, nxt in circuit.latches]
    lines += [str(lit) for lit in circuit.outputs]
    lines += [f"{lhs} {rhs0} {rhs1}" for lhs, rhs0, rhs1 in circuit.ands]
    order = {"i": 0, "l": 1, "o": 2}
    for (kind, index), name in sorted(circuit.symbols.items(),
                                      key=lambda item: (order[item[0][0]], item[0][1])):
        lines.append(f"{kind}{index} {name}")
    if circuit.comments:
        lines.append("c")
        lines += list(circuit.comments)
    return "\n".join(lines) + "\n"


def _literal(values, lit):
    row = values[lit >> 1]
    return ~row if lit & 1 else row


def evaluate(circuit: AigCircuit, latches, inputs):
    """
    Evaluate a circuit on a batch of assignments.

    Args:
        circuit (AigCircuit): the circuit
        latches: boolean array of shape ``(n, L)`` (or ``(L,)`` for one row)
        inputs: boolean array of shape ``(n, I)`` (or ``(I,)``)

    Returns:
        tuple: ``(outputs, next_latches)`` boolean arrays of shapes
            ``(n, O)`` and ``(n, L)``
    """
    # an empty vector becomes a single row of width 0
    latches = np.atleast_2d(np.asarray(latches, dtype=bool))
    inputs = np.atleast_2d(np.asarray(inputs, dtype=bool))
    rows = max(latches.shape[0], inputs.shape[0])
    if latches.shape[0] == 1 and rows > 1:
        latches = np.repeat(latches, rows, axis=0)
    if inputs.shape[0] == 1 and rows > 1:
        inputs = np.repeat(inputs, rows, axis=0)
    if latches.shape != (rows, circuit.num_latches) or inputs.shape != (rows, circuit.num_inputs):
        raise ValueError(f"expected latch/input arrays of widths {circuit.num_latches}/"
                         f"{circuit.num_inputs}, got {latches.shape}/{inputs.shape}")

    values = np.zeros((circuit.max_var + 1, rows), dtype=bool)
    for k, lit in enumerate(circuit.inputs):
        values[lit >> 1] = inputs[:, k]
    for k, (lit, _) in enumerate(circuit.latches):
        values[lit >> 1] = latches[:, k]
    for lhs, rhs0, rhs1 in circuit.ands:
        values[lhs >> 1] = _literal(values, rhs0) & _literal(values, rhs1)

    outputs = np.zeros((rows, circuit.num_outputs), dtype=bool)
    for k, lit in enumerate(circuit.outputs):
        outputs[:, k] = _literal(values, lit)
    next_latches = np.zeros((rows, circuit.num_latches), dtype=bool)
    for k, (_, nxt) in enumerate(circuit.latches):
        next_latches[:, k] = _literal(values, nxt)
    return outputs, next_latches


def simulate(circuit: AigCircuit, latches: Sequence[bool], inputs: Sequence[bool]):
    """
    One synchronous step.

    Returns:
        tuple: ``(outputs, next_latches)`` as tuples of bools
    """
    outputs, next_latches = evaluate(circuit, [list(latches)], [list(inputs)])
    return tuple(bool(b) for b in outputs[0]), tuple(bool(b) for b in next_latches[0])


@dataclass(frozen=True)
class SafetySpec:
    """
    A safety specification: one ``bad`` output over named inputs.

    ``uncontrollable`` and ``controllable`` hold input positions in circuit order.
    """

    circuit: AigCircuit
    uncontrollable: Tuple[int, ...]
    controllable: Tuple[int, ...]

    @property
    def uncontrollable_names(self) -> Tuple[str, ...]:
        names = self.circuit.input_names()
        return tuple(names[k] for k in self.uncontrollable)

    @property
    def controllable_names(self) -> Tuple[str, ...]:
        names = self.circuit.input_names()
        return tuple(names[k] for k in self.controllable)


def classify_safety_spec(circuit: AigCircuit) -> SafetySpec:
    """
    Split the inputs of a safety specification by the ``controllable_`` prefix.

    Raises:
        SpecificationError: unless the circuit has exactly one output and
            every input is named
    """
    if circuit.num_outputs != 1:
        raise SpecificationError(f"a safety specification needs exactly one output, "
                                 f"found {circuit.num_outputs}")
    unnamed = [k for k in range(circuit.num_inputs) if ("i", k) not in circuit.symbols]
    if unnamed:
        raise SpecificationError(f"inputs {unnamed} have no symbol; cannot tell "
                                 f"controllable from uncontrollable")
    controllable = tuple(k for k in range(circuit.num_inputs)
                         if circuit.symbols[("i", k)].startswith(CONTROLLABLE_PREFIX))
    uncontrollable = tuple(k for k in range(circuit.num_inputs) if k not in controllable)
    if not controllable:
        logger.warning("Safety specification has no controllable inputs")
    return SafetySpec(circuit, uncontrollable, controllable)


class AigBuilder:
    """
    Incremental circuit construction with structural hashing.

    Inputs and latches must be allocated before the first AND gate so that
    variable numbers come out in AIGER order.
    """

    def __init__(self):
        self._next_var = 1
        self._inputs = []
        self._latches = []
        self._outputs = []
        self._ands = []
        self._strash = {}
        self._symbols = {}
        self._comments = []

    def _allocate(self):
        var = self._next_var
        self._next_var += 1
        return 2 * var

    def add_input(self, name: Optional[str] = None) -> int:
        if self._ands:
            raise ValueError("inputs must be allocated before AND gates")
        lit = self._allocate()
        if name is not None:
            self._symbols[("i", len(self._inputs))] = name
        self._inputs.append(lit)
        return lit

    def add_latch(self, name: Optional[str] = None) -> int:
        if self._ands:
            raise ValueError("latches must be allocated before AND gates")
        lit = self._allocate()
        if name is not None:
            self._symbols[("l", len(self._latches))] = name
        self._latches.append([lit, 0])
        return lit

    def set_latch_next(self, latch: int, nxt: int):
        for entry in self._latches:
            if entry[0] == latch:
                entry[1] = nxt
                return
        raise KeyError(f"no latch with literal {latch}")

    def add_output(self, lit: int, name: Optional[str] = None):
        if name is not None:
            self._symbols[("o", len(self._outputs))] = name
        self._outputs.append(lit)

    def add_comment(self, text: str):
        self._comments.append(text)

    @staticmethod
    def negate(lit: int) -> int:
        return lit ^ 1

    def and_(self, a: int, b: int) -> int:
        if a > b:
            a, b = b, a
        if a == 0:
            return 0
        if a == 1:
            return b
        if a == b:
            return a
        if a == b ^ 1:
            return 0
        key = (a, b)
        if key not in self._strash:
            lhs = self._allocate()
            self._ands.append((lhs, b, a))
            self._strash[key] = lhs
        return self._strash[key]

    def or_(self, a: int, b: int) -> int:
        return self.and_(a ^ 1, b ^ 1) ^ 1

    def mux(self, select: int, then: int, otherwise: int) -> int:
        if then == otherwise:
            return then
        if then == 1 and otherwise == 0:
            return select
        if then == 0 and otherwise == 1:
            return select ^ 1
        return self.or_(self.and_(select, then), self.and_(select ^ 1, otherwise))

    def build(self) -> AigCircuit:
        return AigCircuit(
            max_var=self._next_var - 1,
            inputs=tuple(self._inputs),
            latches=tuple((lit, nxt) for lit, nxt in self._latches),
            outputs=tuple(self._outputs),
            ands=tuple(self._ands),
            symbols=dict(self._symbols),
            comments=tuple(self._comments),
        )
