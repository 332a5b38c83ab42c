#!/usr/bin/env python3
"""
Controller synthesis.

Reads a Mealy machine off Eve's positional strategy and encodes it as an
AIGER circuit: the machine state is binary-encoded in latches and every
output and next-state bit is built by Shannon expansion of its truth table.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .aiger import AigBuilder, AigCircuit
from .arena import GameArena, Player, VertexKind
from .errors import SolverError, SpecificationError, UnrealizableError
from .solver import Solution

logger = logging.getLogger(__name__)

STATE_LATCH_PREFIX = "mealy_state_"


@dataclass(frozen=True)
class MealyMachine:
    """
    A finite transducer with initial state 0.

    ``update[s, i]`` and ``output[s, i]`` give the successor state and the
    output valuation for state ``s`` and input valuation ``i``; bit ``k`` of
    a valuation is the ``k``-th input (output) name.
    """

    update: np.ndarray
    output: np.ndarray
    input_names: Tuple[str, ...] = ()
    output_names: Tuple[str, ...] = ()
    origins: Tuple[int, ...] = ()

    initial = 0

    @property
    def num_states(self) -> int:
        return int(self.update.shape[0])

    @property
    def num_inputs(self) -> int:
        return len(self.input_names)

    @property
    def num_outputs(self) -> int:
        return len(self.output_names)

    def step(self, state: int, inputs: int) -> Tuple[int, int]:
        """Return ``(next state, output valuation)``."""
        return int(self.update[state, inputs]), int(self.output[state, inputs])

    def run(self, inputs: Sequence[int]) -> List[int]:
        state = self.initial
        outputs = []
        for valuation in inputs:
            state, out = self.step(state, valuation)
            outputs.append(out)
        return outputs

    def reachable_states(self) -> List[int]:
        seen = {self.initial}
        queue = deque([self.initial])
        while queue:
            state = queue.popleft()
            for nxt in np.unique(self.update[state]):
                if int(nxt) not in seen:
                    seen.add(int(nxt))
                    queue.append(int(nxt))
        return sorted(seen)


def _next_round_vertex(arena, vertex):
    origin = arena.backmap[vertex].kind
    if origin is VertexKind.EDGE:
        return arena.successors[vertex][0]
    if origin is VertexKind.SINK:
        raise SolverError("Eve strategy leads into the losing sink")
    return vertex


def strategy_to_mealy(arena: GameArena, solution: Solution) -> MealyMachine:
    """
    Build the Mealy machine of Eve's positional strategy.

    Machine states are the round-start (Adam) vertices reachable from the
    initial vertex under Eve's strategy, numbered in breadth-first order.

    Args:
        arena (GameArena): an arena built from a specification
        solution (Solution): a solution of that arena

    Returns:
        MealyMachine: a machine restricted to reachable states

    Raises:
        UnrealizableError: if Adam wins the initial vertex
        SpecificationError: if the arena carries no provenance information
    """
    if solution.winner(arena.initial) is Player.ADAM:
        raise UnrealizableError("Adam wins the initial vertex; no controller exists")
    if not arena.backmap or not arena.edge_labels:
        raise SpecificationError("strategy extraction needs an arena built from a specification")

    num_inputs = 1 << len(arena.input_names)
    index = {arena.initial: 0}
    order = [arena.initial]
    rows_update = []
    rows_output = []
    head = 0
    while head < len(order):
        vertex = order[head]
        head += 1
        update = np.zeros(num_inputs, dtype=np.int64)
        output = np.zeros(num_inputs, dtype=np.int64)
        for choice in arena.successors[vertex]:
            valuation = arena.backmap[choice].valuation
            move = solution.eve_strategy.get(choice)
            if move is None:
                raise SolverError(f"Eve has no strategy entry at choice vertex {choice}")
            nxt = _next_round_vertex(arena, move)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            update[valuation] = index[nxt]
            output[valuation] = arena.label(choice, move)
        rows_update.append(update)
        rows_output.append(output)

    machine = MealyMachine(
        update=np.vstack(rows_update),
        output=np.vstack(rows_output),
        input_names=tuple(arena.input_names),
        output_names=tuple(arena.output_names),
        origins=tuple(order),
    )
    logger.info("Extracted Mealy machine with %d states", machine.num_states)
    return machine


def _shannon(builder, table, literals, memo):
    """Literal computing the Boolean function whose truth table is ``table``."""
    if not table.any():
        return 0
    if table.all():
        return 1
    key = (table.size, table.tobytes())
    if key in memo:
        return memo[key]
    half = table.size // 2
    depth = int(math.log2(table.size)) - 1
    low = _shannon(builder, table[:half], literals, memo)
    high = _shannon(builder, table[half:], literals, memo)
    lit = builder.mux(literals[depth], high, low)
    memo[key] = lit
    return lit


def mealy_to_aiger(machine: MealyMachine) -> AigCircuit:
    """
    Encode a Mealy machine as an AIGER controller.

    ``ceil(log2(states))`` latches hold the binary state number; outputs and
    next-state bits are Shannon-expanded over the latch and input bits with
    structural hashing. Unused state codes are treated as outputting 0.

    Args:
        machine (MealyMachine): machine restricted to reachable states

    Returns:
        AigCircuit: controller with inputs named after the machine inputs and
            outputs named after the machine outputs
    """
    states = machine.num_states
    width = math.ceil(math.log2(states)) if states > 1 else 0
    n_in = machine.num_inputs

    builder = AigBuilder()
    input_lits = [builder.add_input(name) for name in machine.input_names]
    latch_lits = [builder.add_latch(f"{STATE_LATCH_PREFIX}{k}") for k in range(width)]
    literals = latch_lits + input_lits

    # truth table index = state | (inputs << width)
    size = 1 << (width + n_in)
    index = np.arange(size, dtype=np.int64)
    state_of = index & ((1 << width) - 1)
    input_of = index >> width
    valid = state_of < states
    safe_state = np.where(valid, state_of, 0)
    outputs = np.where(valid, machine.output[safe_state, input_of], 0)
    updates = np.where(valid, machine.update[safe_state, input_of], 0)

    memo = {}
    for k, name in enumerate(machine.output_names):
        table = ((outputs >> k) & 1).astype(bool)
        builder.add_output(_shannon(builder, table, literals, memo), name)
    for k, latch in enumerate(latch_lits):
        table = ((updates >> k) & 1).astype(bool)
        builder.set_latch_next(latch, _shannon(builder, table, literals, memo))

    circuit = builder.build()
    logger.info("Encoded %d-state machine with %d latches and %d AND gates",
                states, width, circuit.gate_count)
    return circuit


def gate_count(circuit: AigCircuit) -> int:
    """Number of AND gates."""
    return circuit.gate_count


def quality_score(size: int, ref: int) -> float:
    """
    Quality points of a circuit of ``size`` gates against a reference size.

    Equal sizes earn 2 points, every factor of ten smaller earns one more
    and every factor of ten larger one less, never below 0.
    """
    return max(0.0, 2.0 - math.log10((size + 1) / (ref + 1)))
