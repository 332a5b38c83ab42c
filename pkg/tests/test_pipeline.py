#!/usr/bin/env python3
"""
End-to-end tests: specification file to verified controller.
"""

import os
import random
import sys
import tempfile
import unittest
from pathlib import Path

# Add the src directory to the path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from omega_synth.aiger import classify_safety_spec, parse_aag, print_aag
from omega_synth.arena import GameArena, Player
from omega_synth.errors import SpecificationError
from omega_synth.hoa import parse_ehoa, print_ehoa
from omega_synth.pipeline import (
    build_arena, load_specification, parse_specification, solve, specification_kind, synthesize
)
from omega_synth.solver import (
    MAX_BRUTE_FORCE_DEGREE, MAX_BRUTE_FORCE_VERTICES, brute_force_solve
)
from omega_synth.suite import random_parity_automaton, random_safety_spec, write_desk_suite
from omega_synth.verify import verify_controller


def small_enough(arena):
    return arena.num_vertices <= MAX_BRUTE_FORCE_VERTICES and \
        all(len(s) <= MAX_BRUTE_FORCE_DEGREE for s in arena.successors)


class TestEndToEnd(unittest.TestCase):
    """Synthesize, then model-check, on seeded random instances."""

    COUNT = 50

    def check_instance(self, spec):
        arena = build_arena(spec)
        result = synthesize(spec, "zielonka")
        self.assertEqual(solve(spec, "dfi"), result.realizable)
        if result.realizable:
            self.assertEqual(result.gates, result.controller.gate_count)
            check = verify_controller(spec, parse_aag(print_aag(result.controller)))
            self.assertTrue(check.passed, msg=check.message)
        elif small_enough(arena):
            self.assertIs(brute_force_solve(arena)[arena.initial], Player.ADAM)
        return result.realizable

    def test_safety_instances(self):
        rng = random.Random(2017)
        outcomes = []
        for _ in range(self.COUNT):
            circuit = random_safety_spec(rng, uncontrollable=rng.randint(1, 2),
                                         controllable=rng.randint(1, 2),
                                         latches=rng.randint(0, 3), gates=rng.randint(2, 8))
            spec = classify_safety_spec(parse_aag(print_aag(circuit)))
            outcomes.append(self.check_instance(spec))
        self.assertIn(True, outcomes)

    def test_parity_instances(self):
        rng = random.Random(2022)
        outcomes = []
        for _ in range(self.COUNT):
            aut = random_parity_automaton(rng, states=rng.randint(1, 4), inputs=rng.randint(1, 2),
                                          outputs=rng.randint(1, 2), incomplete=0.1)
            outcomes.append(self.check_instance(parse_ehoa(print_ehoa(aut))))
        self.assertIn(True, outcomes)

    def test_small_parity_against_brute_force(self):
        rng = random.Random(5)
        for _ in range(self.COUNT):
            aut = random_parity_automaton(rng, states=rng.randint(1, 2), inputs=1, outputs=1)
            arena = build_arena(aut)
            if small_enough(arena):
                expected = brute_force_solve(arena)[arena.initial] is Player.EVE
                self.assertEqual(solve(aut), expected)


class TestLoading(unittest.TestCase):
    """Formats chosen by extension."""

    def test_kinds(self):
        self.assertEqual(specification_kind("a/b.ehoa"), "parity")
        self.assertEqual(specification_kind("b.HOA"), "parity")
        self.assertEqual(specification_kind("c.aag"), "safety")
        self.assertEqual(specification_kind("d.pg"), "game")
        with self.assertRaises(SpecificationError):
            specification_kind("e.tlsf")
        with self.assertRaises(ValueError):
            parse_specification("", "ltl")

    def test_desk_suite_loads(self):
        with tempfile.TemporaryDirectory() as tmp:
            written = write_desk_suite(tmp, seed=1, safety=3, parity=3)
            self.assertEqual(len(written), 6)
            self.assertTrue((Path(tmp) / "reference_sizes.csv").exists())
            for path in written:
                spec = load_specification(str(path))
                self.assertIsInstance(solve(spec), bool)

    def test_games_are_not_synthesized(self):
        game = parse_specification("0 0 0 0;\n", "game")
        self.assertIsInstance(game, GameArena)
        self.assertTrue(solve(game))
        with self.assertRaises(SpecificationError):
            synthesize(game)


if __name__ == '__main__':
    unittest.main()
