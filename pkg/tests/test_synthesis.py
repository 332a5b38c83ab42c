#!/usr/bin/env python3
"""
Tests for Mealy extraction, AIGER encoding and quality scoring.
"""

import math
import os
import random
import sys
import unittest

import numpy as np

# Add the src directory to the path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from omega_synth.aiger import AigBuilder, classify_safety_spec, parse_aag, print_aag, simulate
from omega_synth.arena import Player, arena_from_parity_automaton, arena_from_safety_spec
from omega_synth.errors import UnrealizableError
from omega_synth.hoa import normalize_acceptance, parse_ehoa
from omega_synth.solver import solve_parity_zielonka
from omega_synth.synthesis import (
    MealyMachine, gate_count, mealy_to_aiger, quality_score, strategy_to_mealy
)

BUCHI_ONE = """HOA: v1
States: 1
Start: 0
AP: 1 "i"
controllable-AP:
Acceptance: 1 Inf(0)
acc-name: Buchi
--BODY--
State: 0
[t] 0 {0}
--END--
"""


def cancel_spec():
    builder = AigBuilder()
    u0 = builder.add_input("u0")
    c0 = builder.add_input("controllable_c0")
    latch = builder.add_latch("seen")
    builder.set_latch_next(latch, u0)
    builder.add_output(builder.and_(u0, c0 ^ 1), "bad")
    return classify_safety_spec(builder.build())


def run_circuit(circuit, inputs, num_inputs):
    """Outputs of a controller circuit as valuations, one per input valuation."""
    state = [False] * circuit.num_latches
    outputs = []
    for valuation in inputs:
        bits = [bool(valuation >> k & 1) for k in range(num_inputs)]
        outs, state = simulate(circuit, state, bits)
        outputs.append(sum(1 << k for k, bit in enumerate(outs) if bit))
    return outputs


class TestStrategyToMealy(unittest.TestCase):
    """Reading machines off Eve's strategy."""

    def test_trivial_specification(self):
        arena = arena_from_parity_automaton(normalize_acceptance(parse_ehoa(BUCHI_ONE)))
        machine = strategy_to_mealy(arena, solve_parity_zielonka(arena))
        self.assertEqual(machine.num_states, 1)
        self.assertEqual(machine.input_names, ("i",))
        self.assertEqual(machine.output_names, ())
        circuit = mealy_to_aiger(machine)
        self.assertEqual((circuit.num_latches, circuit.gate_count), (0, 0))

    def test_cancel_input(self):
        arena = arena_from_safety_spec(cancel_spec())
        machine = strategy_to_mealy(arena, solve_parity_zielonka(arena))
        self.assertEqual(machine.input_names, ("u0",))
        self.assertEqual(machine.output_names, ("controllable_c0",))
        for state in machine.reachable_states():
            self.assertEqual(machine.output[state, 1] & 1, 1)

    def test_unrealizable(self):
        spec = classify_safety_spec(
            parse_aag("aag 2 2 0 1 0\n2\n4\n2\ni0 u0\ni1 controllable_c0\n"))
        arena = arena_from_safety_spec(spec)
        solution = solve_parity_zielonka(arena)
        self.assertIs(solution.winner(arena.initial), Player.ADAM)
        with self.assertRaises(UnrealizableError):
            strategy_to_mealy(arena, solution)


class TestMealyToAiger(unittest.TestCase):
    """Shannon-expanded controllers."""

    SEQUENCES = 16 if os.environ.get('CI') == 'true' else 64

    def test_constant_output(self):
        machine = MealyMachine(update=np.zeros((1, 2), dtype=np.int64),
                               output=np.ones((1, 2), dtype=np.int64),
                               input_names=("u0",), output_names=("o0",))
        circuit = mealy_to_aiger(machine)
        self.assertEqual((circuit.num_latches, circuit.gate_count), (0, 0))
        self.assertEqual(circuit.outputs, (1,))

    def test_identity_copier(self):
        machine = MealyMachine(update=np.zeros((1, 2), dtype=np.int64),
                               output=np.array([[0, 1]], dtype=np.int64),
                               input_names=("u0",), output_names=("o0",))
        circuit = mealy_to_aiger(machine)
        self.assertEqual(circuit.gate_count, 0)
        self.assertEqual(circuit.outputs, circuit.inputs)

    def test_toggle(self):
        machine = MealyMachine(update=np.array([[1, 0], [0, 1]], dtype=np.int64),
                               output=np.array([[0, 0], [1, 1]], dtype=np.int64),
                               input_names=("u0",), output_names=("o0",))
        circuit = mealy_to_aiger(machine)
        self.assertEqual(circuit.num_latches, 1)
        self.assertEqual(gate_count(circuit), int(print_aag(circuit).split()[5]))
        rng = random.Random(0)
        for _ in range(self.SEQUENCES):
            inputs = [rng.randrange(2) for _ in range(32)]
            self.assertEqual(run_circuit(circuit, inputs, 1), machine.run(inputs))

    def test_random_machines(self):
        rng = random.Random(12)
        for _ in range(self.SEQUENCES):
            states = rng.randint(1, 6)
            n_in, n_out = rng.randint(0, 2), rng.randint(0, 2)
            machine = MealyMachine(
                update=np.array([[rng.randrange(states) for _ in range(1 << n_in)]
                                 for _ in range(states)], dtype=np.int64),
                output=np.array([[rng.randrange(1 << n_out) for _ in range(1 << n_in)]
                                 for _ in range(states)], dtype=np.int64),
                input_names=tuple(f"u{k}" for k in range(n_in)),
                output_names=tuple(f"o{k}" for k in range(n_out)),
            )
            circuit = mealy_to_aiger(machine)
            self.assertEqual(circuit.num_latches, math.ceil(math.log2(states)) if states > 1 else 0)
            inputs = [rng.randrange(1 << n_in) for _ in range(32)]
            self.assertEqual(run_circuit(circuit, inputs, n_in), machine.run(inputs))


class TestScoring(unittest.TestCase):
    """Gate counts and quality points."""

    def test_gate_count(self):
        self.assertEqual(gate_count(parse_aag("aag 0 0 0 1 0\n0")), 0)
        self.assertEqual(gate_count(parse_aag("aag 3 2 0 1 1\n2\n4\n6\n6 2 4")), 1)

    def test_anchor_points(self):
        self.assertAlmostEqual(quality_score(7, 7), 2.0)
        self.assertAlmostEqual(quality_score(9, 99), 3.0)
        self.assertEqual(quality_score(99, 0), 0.0)
        self.assertEqual(quality_score(10000, 3), 0.0)

    def test_monotone(self):
        for ref in range(0, 40, 3):
            scores = [quality_score(size, ref) for size in range(60)]
            self.assertTrue(all(a >= b for a, b in zip(scores, scores[1:])))
            self.assertTrue(all(s >= 0 for s in scores))
        for size in range(0, 40, 3):
            scores = [quality_score(size, ref) for ref in range(60)]
            self.assertTrue(all(a <= b for a, b in zip(scores, scores[1:])))


if __name__ == '__main__':
    unittest.main()
