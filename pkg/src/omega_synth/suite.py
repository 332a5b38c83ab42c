#!/usr/bin/env python3
"""
Seeded random specifications for desk-scale benchmark suites.
"""

from __future__ import annotations

import logging
import random
from pathlib import Path
from typing import List, Optional

from .aiger import CONTROLLABLE_PREFIX, AigBuilder, AigCircuit, print_aag
from .hoa import Acceptance, Flavor, Guard, ParityAutomaton, Transition, print_ehoa

logger = logging.getLogger(__name__)


def random_safety_spec(rng: random.Random, uncontrollable: int = 1, controllable: int = 1,
                       latches: int = 1, gates: int = 4) -> AigCircuit:
    """
    Sample an AIGER safety specification.

    AND gates pick uniformly among the literals built so far; latch
    next-state functions and the ``bad`` output pick uniformly among all
    literals. Inputs are named ``u<k>`` and ``controllable_c<k>``.
    """
    builder = AigBuilder()
    pool = []
    for k in range(uncontrollable):
        pool.append(builder.add_input(f"u{k}"))
    for k in range(controllable):
        pool.append(builder.add_input(f"{CONTROLLABLE_PREFIX}c{k}"))
    latch_lits = [builder.add_latch(f"l{k}") for k in range(latches)]
    pool += latch_lits
    for _ in range(gates):
        if len(pool) < 2:
            break
        a, b = rng.sample(pool, 2)
        lit = builder.and_(a ^ rng.randint(0, 1), b ^ rng.randint(0, 1))
        if lit > 1 and lit not in pool:
            pool.append(lit)
    for latch in latch_lits:
        builder.set_latch_next(latch, rng.choice(pool) ^ rng.randint(0, 1) if pool else 0)
    bad = rng.choice(pool[-max(1, gates):]) ^ rng.randint(0, 1) if pool else 0
    builder.add_output(bad, "bad")
    return builder.build()


def _random_partition(rng, aps, mask=0, value=0, depth=0):
    """Random cubes partitioning the valuations that extend ``(mask, value)``."""
    free = [ap for ap in aps if not mask >> ap & 1]
    if not free or (depth > 0 and rng.random() < 0.4):
        return [(mask, value)]
    ap = rng.choice(free)
    bit = 1 << ap
    return (_random_partition(rng, aps, mask | bit, value, depth + 1)
            + _random_partition(rng, aps, mask | bit, value | bit, depth + 1))


def random_acceptance(rng: random.Random, max_colors: int = 4) -> Acceptance:
    """Any supported acceptance flavor."""
    flavor = rng.choice([Flavor.PARITY, Flavor.PARITY, Flavor.BUCHI, Flavor.CO_BUCHI])
    if flavor is not Flavor.PARITY:
        return Acceptance(flavor, colors=1)
    return Acceptance(Flavor.PARITY, rng.choice(["min", "max"]), rng.choice(["even", "odd"]),
                      rng.randint(1, max_colors))


def random_parity_automaton(rng: random.Random, states: int = 3, inputs: int = 1,
                            outputs: int = 1, acceptance: Optional[Acceptance] = None,
                            unmarked: float = 0.1, incomplete: float = 0.0) -> ParityAutomaton:
    """
    Sample a deterministic automaton over ``inputs + outputs`` propositions.

    Each state splits the valuation space by a random decision tree; every
    leaf goes to a random target with a random color (unmarked with
    probability ``unmarked``) and is dropped with probability ``incomplete``.
    """
    acceptance = acceptance or random_acceptance(rng)
    aps = tuple([f"i{k}" for k in range(inputs)] + [f"o{k}" for k in range(outputs)])
    colors = acceptance.colors if acceptance.flavor is Flavor.PARITY else 1
    transitions = []
    for _ in range(states):
        edges = {}
        for cube in _random_partition(rng, list(range(len(aps)))):
            if rng.random() < incomplete:
                continue
            if colors == 0 or rng.random() < unmarked:
                priority = None
            else:
                priority = rng.randrange(colors)
            key = (rng.randrange(states), priority)
            edges[key] = edges.get(key, Guard.false()).disjoin(Guard(frozenset({cube})))
        ordered = sorted(edges.items(), key=lambda item: (item[0][0], -1 if item[0][1] is None
                                                          else item[0][1]))
        transitions.append(tuple(Transition(guard, target, priority)
                                 for (target, priority), guard in ordered))
    automaton = ParityAutomaton(
        num_states=states,
        initial=0,
        aps=aps,
        controllable=frozenset(range(inputs, inputs + outputs)),
        transitions=tuple(transitions),
        acceptance=acceptance,
    )
    return automaton


def write_desk_suite(out_dir, seed: int = 0, safety: int = 50, parity: int = 50) -> List[Path]:
    """
    Write a seeded suite of safety and parity instances.

    Also creates an empty ``reference_sizes.csv`` so that quality scores
    fall back to 2 points until reference sizes are filled in.

    Returns:
        list: paths of the instance files written
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)
    written = []
    for k in range(safety):
        circuit = random_safety_spec(rng, uncontrollable=rng.randint(1, 2),
                                     controllable=rng.randint(1, 2), latches=rng.randint(0, 3),
                                     gates=rng.randint(2, 8))
        path = out / f"safety_{k:03d}.aag"
        path.write_text(print_aag(circuit))
        written.append(path)
    for k in range(parity):
        automaton = random_parity_automaton(rng, states=rng.randint(1, 6),
                                            inputs=rng.randint(1, 2), outputs=rng.randint(1, 2),
                                            incomplete=0.1)
        path = out / f"parity_{k:03d}.ehoa"
        path.write_text(print_ehoa(automaton))
        written.append(path)
    (out / "reference_sizes.csv").write_text("instance,ref_gates\n")
    logger.info("Wrote %d safety and %d parity instances to %s", safety, parity, out)
    return written
