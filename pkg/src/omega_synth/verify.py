#!/usr/bin/env python3
"""
Explicit-state model checking of synthesized controllers.

Safety controllers are composed with their specification and checked by
breadth-first reachability; parity controllers are checked on the product
with the automaton by recursive SCC decomposition. Every counterexample is
replayed on the open systems before it is reported.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Union

import networkx as nx
import numpy as np

from .aiger import AigBuilder, AigCircuit, SafetySpec, evaluate, simulate
from .arena import MAX_SAFETY_INPUTS
from .errors import CapacityError, CompositionError, VerificationError
from .hoa import ParityAutomaton, accepts, normalize_acceptance, split_valuations, successor_table

logger = logging.getLogger(__name__)

MAX_VERIFY_LATCHES = 24
MAX_PRODUCT_STATES = 2 ** 24


@dataclass(frozen=True)
class CheckResult:
    """
    Outcome of a model-checking run.

    ``witness`` is a list of uncontrollable valuations for safety failures
    and a ``(prefix, cycle)`` pair of such lists for parity failures.
    """

    passed: bool
    witness: Optional[object] = None
    message: str = ""

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"


def _check_names(controller, inputs, outputs):
    ctl_in = controller.input_names()
    ctl_out = controller.output_names()
    for name in ctl_in:
        if name in outputs:
            raise CompositionError(f"combinational cycle: controller reads {name!r}, "
                                   f"which it drives")
    if sorted(ctl_in) != sorted(inputs):
        raise CompositionError(f"controller inputs {sorted(ctl_in)} do not match the "
                               f"uncontrollable signals {sorted(inputs)}")
    if sorted(ctl_out) != sorted(outputs):
        raise CompositionError(f"controller outputs {sorted(ctl_out)} do not match the "
                               f"controllable signals {sorted(outputs)}")
    return ctl_in, ctl_out


def compose(spec: SafetySpec, controller: AigCircuit) -> AigCircuit:
    """
    Close the loop between a safety specification and a controller.

    The controllable inputs of the specification are driven by the
    controller outputs of the same name; the result has the uncontrollable
    inputs, the latches of both circuits and the single ``bad`` output.

    Raises:
        CompositionError: on name mismatches or when the controller reads a
            signal it drives
    """
    ctl_in, ctl_out = _check_names(controller, spec.uncontrollable_names,
                                   spec.controllable_names)
    circuit = spec.circuit
    builder = AigBuilder()
    by_name = {}
    for name in spec.uncontrollable_names:
        by_name[name] = builder.add_input(name)

    spec_map = {0: 0}
    ctl_map = {0: 0}
    spec_latch = []
    for k, (lit, _) in enumerate(circuit.latches):
        new = builder.add_latch(circuit.latch_names()[k])
        spec_map[lit >> 1] = new
        spec_latch.append(new)
    ctl_latch = []
    for k, (lit, _) in enumerate(controller.latches):
        new = builder.add_latch(f"controller_{controller.latch_names()[k]}")
        ctl_map[lit >> 1] = new
        ctl_latch.append(new)

    def mapped(table, lit):
        return table[lit >> 1] ^ (lit & 1)

    for k, lit in enumerate(controller.inputs):
        ctl_map[lit >> 1] = by_name[ctl_in[k]]
    for lhs, rhs0, rhs1 in controller.ands:
        ctl_map[lhs >> 1] = builder.and_(mapped(ctl_map, rhs0), mapped(ctl_map, rhs1))
    driven = {ctl_out[k]: mapped(ctl_map, lit) for k, lit in enumerate(controller.outputs)}

    names = circuit.input_names()
    for k, lit in enumerate(circuit.inputs):
        spec_map[lit >> 1] = by_name[names[k]] if names[k] in by_name else driven[names[k]]
    for lhs, rhs0, rhs1 in circuit.ands:
        spec_map[lhs >> 1] = builder.and_(mapped(spec_map, rhs0), mapped(spec_map, rhs1))

    builder.add_output(mapped(spec_map, circuit.outputs[0]), "bad")
    for new, (_, nxt) in zip(spec_latch, circuit.latches):
        builder.set_latch_next(new, mapped(spec_map, nxt))
    for new, (_, nxt) in zip(ctl_latch, controller.latches):
        builder.set_latch_next(new, mapped(ctl_map, nxt))
    return builder.build()


def _bits(value, width):
    return [bool(value >> k & 1) for k in range(width)]


def _input_matrix(width):
    valuations = np.arange(1 << width, dtype=np.int64)
    return ((valuations[:, None] >> np.arange(width)) & 1).astype(bool)


def _replay_safety(spec, controller, witness):
    """Run both open systems on ``witness``; True if ``bad`` is raised at the last step."""
    ctl_in = controller.input_names()
    ctl_out = controller.output_names()
    unc = spec.uncontrollable_names
    spec_names = spec.circuit.input_names()
    spec_state = [False] * spec.circuit.num_latches
    ctl_state = [False] * controller.num_latches
    raised = False
    for step, valuation in enumerate(witness):
        env = {name: bool(valuation >> k & 1) for k, name in enumerate(unc)}
        outs, ctl_state = simulate(controller, ctl_state, [env[n] for n in ctl_in])
        env.update(zip(ctl_out, outs))
        (bad,), spec_state = simulate(spec.circuit, spec_state, [env[n] for n in spec_names])
        if bad and step < len(witness) - 1:
            return False
        raised = bad
    return raised


def verify_safety_controller(spec: SafetySpec, controller: AigCircuit) -> CheckResult:
    """
    Check that no input sequence drives the closed loop into ``bad``.

    Returns:
        CheckResult: PASS, or FAIL with a shortest list of uncontrollable
            valuations whose last step raises ``bad``

    Raises:
        CapacityError: beyond 24 joint latches or 16 uncontrollable inputs
        CompositionError: if the controller does not fit the specification
        VerificationError: if a counterexample fails to replay
    """
    closed = compose(spec, controller)
    if closed.num_latches > MAX_VERIFY_LATCHES:
        raise CapacityError(f"{closed.num_latches} joint latches exceed the verification cap "
                            f"of {MAX_VERIFY_LATCHES}")
    if closed.num_inputs > MAX_SAFETY_INPUTS:
        raise CapacityError(f"{closed.num_inputs} uncontrollable inputs exceed the cap "
                            f"of {MAX_SAFETY_INPUTS}")
    inputs = _input_matrix(closed.num_inputs)
    weights = 1 << np.arange(closed.num_latches, dtype=np.int64)
    parent: Dict[int, tuple] = {0: None}
    queue = deque([0])
    while queue:
        state = queue.popleft()
        bad, nxt = evaluate(closed, _bits(state, closed.num_latches), inputs)
        if bad[:, 0].any():
            witness = [int(np.argmax(bad[:, 0]))]
            while parent[state] is not None:
                state, valuation = parent[state]
                witness.append(valuation)
            witness.reverse()
            if not _replay_safety(spec, controller, witness):
                raise VerificationError(f"safety counterexample {witness} does not replay")
            logger.info("Safety controller FAILS after %d steps", len(witness))
            return CheckResult(False, witness, f"bad raised after {len(witness)} steps")
        codes = nxt.astype(np.int64) @ weights if closed.num_latches else np.zeros(len(inputs), np.int64)
        for valuation, code in enumerate(codes.tolist()):
            if code not in parent:
                parent[code] = (state, valuation)
                queue.append(code)
    logger.info("Safety controller PASSES (%d reachable states)", len(parent))
    return CheckResult(True, None, f"{len(parent)} reachable states, bad unreachable")


def _odd_cycle(edges, comp_edges, low):
    """Edge indices of a cycle inside one SCC through an edge of priority ``low``."""
    first = next(e for e in comp_edges if edges[e][3] == low)
    src, dst = edges[first][0], edges[first][1]
    outgoing = {}
    for e in comp_edges:
        outgoing.setdefault(edges[e][0], []).append(e)
    back = {dst: None}
    queue = deque([dst])
    while queue and src not in back:
        node = queue.popleft()
        for e in outgoing.get(node, []):
            nxt = edges[e][1]
            if nxt not in back:
                back[nxt] = e
                queue.append(nxt)
    path = []
    node = src
    while node != dst:
        e = back[node]
        path.append(e)
        node = edges[e][0]
    path.reverse()
    return [first] + path


def _controller_valuations(controller, aut, prefix, cycle):
    """Full automaton valuations produced by the closed loop on a lasso of input valuations."""
    ctl_in = controller.input_names()
    ctl_out = controller.output_names()
    in_pos = {name: k for k, name in enumerate(aut.input_names)}
    out_ap = {name: aut.outputs[k] for k, name in enumerate(aut.output_names)}
    state = [False] * controller.num_latches
    words = []
    marks = []
    for valuation in list(prefix) + list(cycle):
        marks.append(tuple(state))
        outs, state = simulate(controller, state,
                               [bool(valuation >> in_pos[n] & 1) for n in ctl_in])
        full = 0
        for k, ap in enumerate(aut.inputs):
            if valuation >> k & 1:
                full |= 1 << ap
        for name, value in zip(ctl_out, outs):
            if value:
                full |= 1 << out_ap[name]
        words.append(full)
    return words, marks[len(prefix)], tuple(state)


def verify_parity_controller(aut: ParityAutomaton, controller: AigCircuit) -> CheckResult:
    """
    Check that every closed-loop run is accepted by the automaton.

    Explores the product of controller latch states and automaton states,
    one edge per uncontrollable valuation labelled with the transition
    priority, and decomposes it into SCCs: an SCC whose smallest priority is
    odd yields a counterexample lasso, otherwise the edges of that priority
    are removed and its sub-SCCs are examined.

    Returns:
        CheckResult: PASS, or FAIL with a ``(prefix, cycle)`` lasso of
            uncontrollable valuations

    Raises:
        CapacityError: beyond 2**24 product states or 16 inputs
        CompositionError: if controller and automaton names disagree
        VerificationError: if a counterexample fails to replay
    """
    aut = normalize_acceptance(aut)
    ctl_in, ctl_out = _check_names(controller, aut.input_names, aut.output_names)
    if len(aut.inputs) > MAX_SAFETY_INPUTS:
        raise CapacityError(f"{len(aut.inputs)} inputs exceed the cap of {MAX_SAFETY_INPUTS}")
    targets, priorities = successor_table(aut)
    full = split_valuations(aut)
    n_in = full.shape[0]
    in_pos = {name: k for k, name in enumerate(aut.input_names)}
    out_pos = {name: k for k, name in enumerate(aut.output_names)}

    valuations = np.arange(n_in, dtype=np.int64)
    rows = np.zeros((n_in, controller.num_inputs), dtype=bool)
    for j, name in enumerate(ctl_in):
        rows[:, j] = (valuations >> in_pos[name]) & 1
    weights = 1 << np.arange(controller.num_latches, dtype=np.int64)

    start = (0, aut.initial)
    ids = {start: 0}
    nodes = [start]
    parent = {0: None}
    edges = []
    head = 0
    while head < len(nodes):
        latch, state = nodes[head]
        here = head
        head += 1
        outs, nxt = evaluate(controller, _bits(latch, controller.num_latches), rows)
        out_val = np.zeros(n_in, dtype=np.int64)
        for j, name in enumerate(ctl_out):
            out_val |= outs[:, j].astype(np.int64) << out_pos[name]
        codes = nxt.astype(np.int64) @ weights if controller.num_latches else np.zeros(n_in, np.int64)
        letters = full[valuations, out_val]
        for i in range(n_in):
            succ = (int(codes[i]), int(targets[state, letters[i]]))
            if succ not in ids:
                if len(nodes) >= MAX_PRODUCT_STATES:
                    raise CapacityError(f"product exceeds {MAX_PRODUCT_STATES} states")
                ids[succ] = len(nodes)
                nodes.append(succ)
                parent[ids[succ]] = (here, i)
            edges.append((here, ids[succ], i, int(priorities[state, letters[i]])))

    pending = [list(range(len(edges)))]
    while pending:
        current = pending.pop()
        graph = nx.DiGraph()
        graph.add_edges_from((edges[e][0], edges[e][1]) for e in current)
        for component in nx.strongly_connected_components(graph):
            inner = [e for e in current if edges[e][0] in component and edges[e][1] in component]
            if not inner:
                continue
            low = min(edges[e][3] for e in inner)
            if low % 2 == 0:
                remaining = [e for e in inner if edges[e][3] != low]
                if remaining:
                    pending.append(remaining)
                continue
            cycle_edges = _odd_cycle(edges, inner, low)
            node = edges[cycle_edges[0]][0]
            prefix = []
            while parent[node] is not None:
                node, valuation = parent[node]
                prefix.append(valuation)
            prefix.reverse()
            cycle = [edges[e][2] for e in cycle_edges]
            words, before, after = _controller_valuations(controller, aut, prefix, cycle)
            if before != after or accepts(aut, words[:len(prefix)], words[len(prefix):]):
                raise VerificationError(f"parity counterexample {prefix}/{cycle} does not replay")
            logger.info("Parity controller FAILS on a lasso with prefix %d and cycle %d",
                        len(prefix), len(cycle))
            return CheckResult(False, (prefix, cycle),
                               f"run with recurring minimal priority {low} is rejected")
    logger.info("Parity controller PASSES (%d product states)", len(nodes))
    return CheckResult(True, None, f"{len(nodes)} product states, every cycle even")


def verify_controller(spec: Union[SafetySpec, ParityAutomaton], controller: AigCircuit) -> CheckResult:
    """Dispatch on the specification type."""
    if isinstance(spec, SafetySpec):
        return verify_safety_controller(spec, controller)
    return verify_parity_controller(spec, controller)
