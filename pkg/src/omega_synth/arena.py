#!/usr/bin/env python3
"""
Explicit two-player game arenas.

Builds the game graphs that the solvers work on, either from a normalized
parity automaton or from an AIGER safety specification, and reads/writes
the PGSolver text format. Priorities always follow the min-even
convention: Eve wins a play when the smallest priority seen infinitely
often is even.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum, auto
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from .aiger import SafetySpec, evaluate
from .errors import CapacityError, ParseError, SpecificationError
from .hoa import MAX_EXPLICIT_APS, ParityAutomaton, split_valuations, successor_table

logger = logging.getLogger(__name__)

MAX_SAFETY_LATCHES = 20
MAX_SAFETY_INPUTS = 16


class Player(Enum):
    """The two players: Eve is the system, Adam the environment."""
    EVE = 0
    ADAM = 1

    @property
    def opponent(self) -> "Player":
        return Player.ADAM if self is Player.EVE else Player.EVE

    @staticmethod
    def of_priority(priority: int) -> "Player":
        """The player who wins when ``priority`` is the recurring minimum."""
        return Player.EVE if priority % 2 == 0 else Player.ADAM


class VertexKind(Enum):
    """What a vertex stands for in the source specification."""
    STATE = auto()      # automaton state, Adam picks the input
    CHOICE = auto()     # (state, input valuation), Eve picks the output
    EDGE = auto()       # carries a transition priority towards a state
    LATCH = auto()      # latch state of a safety specification
    SINK = auto()       # losing sink of a safety arena


@dataclass(frozen=True)
class Provenance:
    kind: VertexKind
    state: Optional[int] = None
    valuation: Optional[int] = None


@dataclass(frozen=True)
class GameArena:
    """
    A finite game graph.

    ``edge_labels[v]`` maps each successor of a choice vertex ``v`` to the
    lowest controllable valuation leading there; it is empty for every other
    vertex.
    """

    owners: Tuple[Player, ...]
    priorities: Tuple[int, ...]
    successors: Tuple[Tuple[int, ...], ...]
    initial: int = 0
    backmap: Tuple[Provenance, ...] = ()
    edge_labels: Tuple[Dict[int, int], ...] = ()
    input_names: Tuple[str, ...] = ()
    output_names: Tuple[str, ...] = ()

    def __post_init__(self):
        n = len(self.owners)
        if len(self.priorities) != n or len(self.successors) != n:
            raise SpecificationError("owners, priorities and successors differ in length")
        if n and not 0 <= self.initial < n:
            raise SpecificationError(f"initial vertex {self.initial} out of range")
        for v, succ in enumerate(self.successors):
            if not succ:
                raise SpecificationError(f"vertex {v} has no successor")
            for w in succ:
                if not 0 <= w < n:
                    raise SpecificationError(f"edge {v} -> {w} leaves the arena")
        for v, p in enumerate(self.priorities):
            if p < 0:
                raise SpecificationError(f"vertex {v} has negative priority {p}")

    @property
    def num_vertices(self) -> int:
        return len(self.owners)

    @property
    def vertices(self) -> range:
        return range(len(self.owners))

    @cached_property
    def predecessors(self) -> Tuple[Tuple[int, ...], ...]:
        preds: List[List[int]] = [[] for _ in self.vertices]
        for v, succ in enumerate(self.successors):
            for w in succ:
                preds[w].append(v)
        return tuple(tuple(p) for p in preds)

    def label(self, vertex: int, successor: int) -> int:
        """Controllable valuation for moving from a choice vertex to ``successor``."""
        labels = self.edge_labels[vertex] if self.edge_labels else {}
        if successor not in labels:
            raise KeyError(f"no labelled edge {vertex} -> {successor}")
        return labels[successor]

    def describe(self, vertex: int) -> str:
        if not self.backmap:
            return f"v{vertex}"
        origin = self.backmap[vertex]
        if origin.kind is VertexKind.SINK:
            return "sink"
        if origin.kind is VertexKind.CHOICE:
            return f"choice({origin.state},{origin.valuation})"
        return f"{origin.kind.name.lower()}({origin.state})"


def arena_from_parity_automaton(aut: ParityAutomaton) -> GameArena:
    """
    Build the Adam/Eve round arena of a normalized automaton.

    Adam vertex ``q`` (id ``q``) picks an input valuation ``i`` leading to
    the Eve vertex ``(q, i)``; Eve picks an output valuation, which leads
    through an intermediate vertex carrying the transition priority to the
    Adam vertex of the successor state. Structural vertices carry the
    largest transition priority ``M``; intermediates with priority ``M`` are
    skipped.

    Args:
        aut (ParityAutomaton): normalized automaton

    Returns:
        GameArena: the arena, initial vertex = automaton initial state

    Raises:
        SpecificationError: if the automaton is not normalized
        CapacityError: if inputs or outputs exceed the enumeration cap
    """
    if not aut.normalized:
        raise SpecificationError("arena construction needs a normalized automaton")
    if len(aut.aps) > MAX_EXPLICIT_APS:
        raise CapacityError(f"{len(aut.aps)} atomic propositions exceed the explicit "
                            f"enumeration cap of {MAX_EXPLICIT_APS}")
    targets, priorities = successor_table(aut)
    full = split_valuations(aut)
    n_in, n_out = full.shape
    top = int(priorities.max()) if priorities.size else 0
    n = aut.num_states

    owners = [Player.ADAM] * n + [Player.EVE] * (n * n_in)
    prios = [top] * (n + n * n_in)
    backmap = [Provenance(VertexKind.STATE, q) for q in range(n)]
    backmap += [Provenance(VertexKind.CHOICE, q, i) for q in range(n) for i in range(n_in)]
    successors: List[List[int]] = [[q] for q in range(n)]  # placeholders, replaced below
    labels: List[Dict[int, int]] = [{} for _ in range(n + n * n_in)]
    edge_vertex = {}

    for q in range(n):
        successors[q] = [n + q * n_in + i for i in range(n_in)]
    pending = []
    for q in range(n):
        for i in range(n_in):
            row_targets = targets[q, full[i]]
            row_prios = priorities[q, full[i]]
            choice = {}
            for o in range(n_out):
                choice.setdefault((int(row_prios[o]), int(row_targets[o])), o)
            pending.append(choice)

    for choice in pending:
        for (p, t) in choice:
            if p != top and (p, t) not in edge_vertex:
                edge_vertex[(p, t)] = len(owners)
                owners.append(Player.ADAM)
                prios.append(p)
                backmap.append(Provenance(VertexKind.EDGE, t))
                labels.append({})
    for choice in pending:
        mapping = {}
        for (p, t), o in choice.items():
            succ = t if p == top else edge_vertex[(p, t)]
            if succ not in mapping or o < mapping[succ]:
                mapping[succ] = o
        successors.append(sorted(mapping))
        labels[len(successors) - 1] = mapping
    for (p, t), v in sorted(edge_vertex.items(), key=lambda item: item[1]):
        successors.append([t])

    arena = GameArena(
        owners=tuple(owners),
        priorities=tuple(prios),
        successors=tuple(tuple(s) for s in successors),
        initial=aut.initial,
        backmap=tuple(backmap),
        edge_labels=tuple(labels),
        input_names=aut.input_names,
        output_names=aut.output_names,
    )
    logger.info("Built parity arena with %d vertices (%d automaton states, %d priority vertices)",
                arena.num_vertices, n, len(edge_vertex))
    return arena


def arena_from_safety_spec(spec: SafetySpec) -> GameArena:
    """
    Build the safety arena of an AIGER specification.

    Latch states reachable from the all-zero state become Adam vertices,
    (latch state, uncontrollable valuation) pairs become Eve vertices, and
    every controllable valuation raising ``bad`` leads to one losing sink
    (priority 1, self-loop). All other priorities are 0.

    Raises:
        CapacityError: beyond 20 latches or 16 inputs of either kind
    """
    circuit = spec.circuit
    n_latch = circuit.num_latches
    n_unc, n_ctl = len(spec.uncontrollable), len(spec.controllable)
    if n_latch > MAX_SAFETY_LATCHES:
        raise CapacityError(f"{n_latch} latches exceed the explicit cap of {MAX_SAFETY_LATCHES}; "
                            f"reduce the instance size")
    if n_unc > MAX_SAFETY_INPUTS or n_ctl > MAX_SAFETY_INPUTS:
        raise CapacityError(f"{n_unc} uncontrollable / {n_ctl} controllable inputs exceed "
                            f"the explicit cap of {MAX_SAFETY_INPUTS}")

    outputs = np.arange(1 << n_ctl, dtype=np.int64)
    rows = np.zeros((outputs.size, circuit.num_inputs), dtype=bool)
    for k, pos in enumerate(spec.controllable):
        rows[:, pos] = (outputs >> k) & 1
    weights = 1 << np.arange(n_latch, dtype=np.int64)

    owners: List[Player] = []
    prios: List[int] = []
    successors: List[List[int]] = []
    backmap: List[Provenance] = []
    labels: List[Dict[int, int]] = []
    adam_vertex: Dict[int, int] = {}
    sink = None
    queue = []

    def new_vertex(owner, origin):
        owners.append(owner)
        prios.append(0)
        successors.append([])
        backmap.append(origin)
        labels.append({})
        return len(owners) - 1

    def adam(state):
        if state not in adam_vertex:
            adam_vertex[state] = new_vertex(Player.ADAM, Provenance(VertexKind.LATCH, state))
            queue.append(state)
        return adam_vertex[state]

    def losing_sink():
        nonlocal sink
        if sink is None:
            sink = new_vertex(Player.ADAM, Provenance(VertexKind.SINK))
            prios[sink] = 1
            successors[sink] = [sink]
        return sink

    adam(0)
    head = 0
    while head < len(queue):
        state = queue[head]
        head += 1
        here = adam_vertex[state]
        latch_row = np.array([(state >> k) & 1 for k in range(n_latch)], dtype=bool)
        for i in range(1 << n_unc):
            eve = new_vertex(Player.EVE, Provenance(VertexKind.CHOICE, state, i))
            successors[here].append(eve)
            batch = rows.copy()
            for k, pos in enumerate(spec.uncontrollable):
                batch[:, pos] = (i >> k) & 1
            bad, nxt = evaluate(circuit, latch_row, batch)
            next_states = nxt.astype(np.int64) @ weights if n_latch else np.zeros(outputs.size, np.int64)
            mapping = {}
            for o in range(outputs.size):
                succ = losing_sink() if bad[o, 0] else adam(int(next_states[o]))
                mapping.setdefault(succ, o)
            successors[eve] = sorted(mapping)
            labels[eve] = mapping

    arena = GameArena(
        owners=tuple(owners),
        priorities=tuple(prios),
        successors=tuple(tuple(s) for s in successors),
        initial=0,
        backmap=tuple(backmap),
        edge_labels=tuple(labels),
        input_names=spec.uncontrollable_names,
        output_names=spec.controllable_names,
    )
    logger.info("Built safety arena with %d vertices (%d reachable latch states, sink %s)",
                arena.num_vertices, len(adam_vertex), "present" if sink is not None else "absent")
    return arena


def unsafe_vertices(arena: GameArena) -> frozenset:
    """The losing sinks of a safety arena."""
    return frozenset(v for v in arena.vertices
                     if arena.backmap and arena.backmap[v].kind is VertexKind.SINK)


def print_pgsolver(arena: GameArena) -> str:
    """
    Dump an arena in PGSolver syntax.

    Owner 0 is Eve and 1 is Adam; priorities stay in the min-even convention.
    """
    lines = [f"parity {arena.num_vertices - 1};", f"start {arena.initial};"]
    for v in arena.vertices:
        succ = ",".join(str(w) for w in arena.successors[v])
        lines.append(f'{v} {arena.priorities[v]} {arena.owners[v].value} {succ} '
                     f'"{arena.describe(v)}";')
    return "\n".join(lines) + "\n"


_PG_VERTEX = re.compile(r'^(\d+)\s+(\d+)\s+([01])\s+(\d+(?:\s*,\s*\d+)*)(?:\s+"[^"]*")?\s*;?\s*$')


def parse_pgsolver(text: str) -> GameArena:
    """
    Read a PGSolver game (min-even convention).

    Vertex identifiers are renumbered densely in ascending order; the
    initial vertex is the ``start`` line if present, else the smallest id.

    Raises:
        ParseError: on malformed lines, duplicate or dangling vertices
    """
    entries = {}
    start = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("parity"):
            continue
        if line.startswith("start"):
            match = re.match(r"^start\s+(\d+)\s*;?$", line)
            if not match:
                raise ParseError(f"malformed start line {line!r}", lineno)
            start = int(match.group(1))
            continue
        match = _PG_VERTEX.match(line)
        if not match:
            raise ParseError(f"malformed vertex line {line!r}", lineno)
        vid = int(match.group(1))
        if vid in entries:
            raise ParseError(f"vertex {vid} defined twice", lineno)
        succ = [int(s) for s in match.group(4).split(",")]
        entries[vid] = (int(match.group(2)), Player(int(match.group(3))), succ, lineno)

    if not entries:
        raise ParseError("game has no vertices")
    ids = sorted(entries)
    index = {vid: k for k, vid in enumerate(ids)}
    owners, prios, successors = [], [], []
    for vid in ids:
        priority, owner, succ, lineno = entries[vid]
        for w in succ:
            if w not in index:
                raise ParseError(f"vertex {vid} has an edge to undefined vertex {w}", lineno)
        owners.append(owner)
        prios.append(priority)
        successors.append(tuple(sorted({index[w] for w in succ})))
    if start is not None and start not in index:
        raise ParseError(f"start vertex {start} is not defined")
    return GameArena(
        owners=tuple(owners),
        priorities=tuple(prios),
        successors=tuple(successors),
        initial=index[start] if start is not None else 0,
        backmap=tuple(Provenance(VertexKind.STATE, vid) for vid in ids),
    )
