#!/usr/bin/env python3
"""
Tests for closed-loop composition and controller model checking.
"""

import os
import random
import sys
import unittest
from dataclasses import replace

# Add the src directory to the path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from omega_synth.aiger import AigBuilder, classify_safety_spec, parse_aag, simulate
from omega_synth.errors import CompositionError
from omega_synth.hoa import parse_ehoa
from omega_synth.pipeline import synthesize
from omega_synth.suite import random_safety_spec
from omega_synth.verify import (
    compose, verify_controller, verify_parity_controller, verify_safety_controller
)

STEERING = """HOA: v1
States: 2
Start: 0
AP: 2 "i" "o"
controllable-AP: 1
acc-name: parity min even 2
Acceptance: 2 Inf(0) | Fin(1)
--BODY--
State: 0
[1] 1 {0}
[!1] 0 {1}
State: 1
[t] 1 {0}
--END--
"""

ALWAYS_EVEN = """HOA: v1
States: 1
Start: 0
AP: 2 "i" "o"
controllable-AP: 1
acc-name: Buchi
Acceptance: 1 Inf(0)
--BODY--
State: 0
[t] 0 {0}
--END--
"""

BAD_FALSE = "aag 2 2 0 1 0\n2\n4\n0\ni0 u0\ni1 controllable_c0\n"


def cancel_spec():
    builder = AigBuilder()
    u0 = builder.add_input("u0")
    c0 = builder.add_input("controllable_c0")
    latch = builder.add_latch("seen")
    builder.set_latch_next(latch, u0)
    builder.add_output(builder.and_(u0, c0 ^ 1), "bad")
    return classify_safety_spec(builder.build())


def copier(input_name, output_name, negate=False):
    """Controller driving ``output_name`` with (the negation of) ``input_name``."""
    builder = AigBuilder()
    lit = builder.add_input(input_name)
    builder.add_output(lit ^ 1 if negate else lit, output_name)
    return builder.build()


def constant(input_name, output_name, value):
    builder = AigBuilder()
    builder.add_input(input_name)
    builder.add_output(1 if value else 0, output_name)
    return builder.build()


def toggle(input_name, output_name):
    """Controller whose output alternates 0, 1, 0, ... regardless of its input."""
    builder = AigBuilder()
    builder.add_input(input_name)
    latch = builder.add_latch("phase")
    builder.set_latch_next(latch, latch ^ 1)
    builder.add_output(latch, output_name)
    return builder.build()


def delayed_copy_spec(width, delay, inverted=False):
    """``controllable_c<k>`` must repeat ``u<k>`` from ``delay`` steps back, negated if ``inverted``."""
    builder = AigBuilder()
    inputs = [builder.add_input(f"u{k}") for k in range(width)]
    outputs = [builder.add_input(f"controllable_c{k}") for k in range(width)]
    chains = [[builder.add_latch(f"d{k}_{s}") for s in range(delay)] for k in range(width)]
    bad = 0
    for k, chain in enumerate(chains):
        source = inputs[k]
        for latch in chain:
            builder.set_latch_next(latch, source)
            source = latch
        target = source ^ 1 if inverted else source
        bad = builder.or_(bad, builder.mux(outputs[k], target ^ 1, target))
    builder.add_output(bad, "bad")
    return classify_safety_spec(builder.build())


def random_spec(rng):
    circuit = random_safety_spec(rng, uncontrollable=rng.randint(1, 2),
                                 controllable=rng.randint(1, 2),
                                 latches=rng.randint(0, 3), gates=rng.randint(2, 8))
    return classify_safety_spec(circuit)


def random_controller(rng, spec, latches, gates):
    """Random circuit over the uncontrollable signals of ``spec`` driving its controllable ones."""
    builder = AigBuilder()
    pool = [builder.add_input(name) for name in spec.uncontrollable_names]
    memory = [builder.add_latch(f"m{k}") for k in range(latches)]
    pool += memory
    for _ in range(gates):
        if len(pool) < 2:
            break
        a, b = rng.sample(pool, 2)
        pool.append(builder.and_(a ^ rng.randint(0, 1), b ^ rng.randint(0, 1)))
    choices = pool or [0]
    for latch in memory:
        builder.set_latch_next(latch, rng.choice(choices) ^ rng.randint(0, 1))
    for name in spec.controllable_names:
        builder.add_output(rng.choice(choices) ^ rng.randint(0, 1), name)
    return builder.build()


def negated_outputs(controller):
    """One copy of ``controller`` per output, with that output inverted."""
    for k in range(controller.num_outputs):
        flipped = tuple(lit ^ 1 if j == k else lit for j, lit in enumerate(controller.outputs))
        yield replace(controller, outputs=flipped)


def bad_trace(spec, controller, witness):
    """Value of ``bad`` at each step when the open systems are driven by ``witness``."""
    unc = spec.uncontrollable_names
    ctl_in, ctl_out = controller.input_names(), controller.output_names()
    spec_names = spec.circuit.input_names()
    spec_state = [False] * spec.circuit.num_latches
    ctl_state = [False] * controller.num_latches
    trace = []
    for valuation in witness:
        env = {name: bool(valuation >> k & 1) for k, name in enumerate(unc)}
        outs, ctl_state = simulate(controller, ctl_state, [env[n] for n in ctl_in])
        env.update(zip(ctl_out, outs))
        (bad,), spec_state = simulate(spec.circuit, spec_state, [env[n] for n in spec_names])
        trace.append(bad)
    return trace


def shortest_failure(spec, controller, depth):
    """
    Number of steps of the shortest input sequence that raises ``bad``.

    Every input sequence of at most ``depth`` steps is simulated, merging
    runs that reach the same pair of latch states. None if ``bad`` is never
    raised.
    """
    unc = spec.uncontrollable_names
    ctl_in, ctl_out = controller.input_names(), controller.output_names()
    spec_names = spec.circuit.input_names()
    frontier = {((False,) * spec.circuit.num_latches, (False,) * controller.num_latches)}
    seen = set(frontier)
    for step in range(1, depth + 1):
        following = set()
        for spec_state, ctl_state in frontier:
            for valuation in range(1 << len(unc)):
                env = {name: bool(valuation >> k & 1) for k, name in enumerate(unc)}
                outs, ctl_next = simulate(controller, ctl_state, [env[n] for n in ctl_in])
                env.update(zip(ctl_out, outs))
                (bad,), spec_next = simulate(spec.circuit, spec_state,
                                             [env[n] for n in spec_names])
                if bad:
                    return step
                following.add((spec_next, ctl_next))
        frontier = following - seen
        if not frontier:
            return None
        seen |= frontier
    return None


class TestCompose(unittest.TestCase):
    """Closing the loop."""

    def test_constant_into_bad_false(self):
        spec = classify_safety_spec(parse_aag(BAD_FALSE))
        closed = compose(spec, constant("u0", "controllable_c0", True))
        self.assertEqual(closed.outputs, (0,))
        self.assertEqual(closed.input_names(), ["u0"])

    def test_name_mismatch(self):
        spec = classify_safety_spec(parse_aag(BAD_FALSE))
        with self.assertRaises(CompositionError):
            compose(spec, copier("x", "controllable_c0"))
        with self.assertRaises(CompositionError):
            compose(spec, copier("u0", "controllable_other"))

    def test_reading_driven_signal(self):
        spec = classify_safety_spec(parse_aag(BAD_FALSE))
        with self.assertRaises(CompositionError):
            compose(spec, copier("controllable_c0", "controllable_c0"))

    def test_toggle_cosimulation(self):
        spec = cancel_spec()
        controller = toggle("u0", "controllable_c0")
        closed = compose(spec, controller)
        self.assertEqual(closed.num_latches, 2)
        rng = random.Random(9)
        closed_state = [False, False]
        spec_state, ctl_state = [False], [False]
        for _ in range(64):
            u0 = rng.random() < 0.5
            (c0,), ctl_state = simulate(controller, ctl_state, [u0])
            (bad,), spec_state = simulate(spec.circuit, spec_state, [u0, c0])
            (closed_bad,), closed_state = simulate(closed, closed_state, [u0])
            self.assertEqual(closed_bad, bad)


class TestSafetyVerification(unittest.TestCase):
    """PASS and FAIL verdicts on safety specifications."""

    def test_synthesized_controller_passes(self):
        spec = cancel_spec()
        result = synthesize(spec)
        self.assertTrue(result.realizable)
        check = verify_safety_controller(spec, result.controller)
        self.assertTrue(check.passed)
        self.assertEqual(check.verdict, "PASS")

    def test_negated_controller_fails_in_one_step(self):
        spec = cancel_spec()
        controller = synthesize(spec).controller
        mutant = replace(controller, outputs=tuple(lit ^ 1 for lit in controller.outputs))
        check = verify_safety_controller(spec, mutant)
        self.assertFalse(check.passed)
        self.assertEqual(check.verdict, "FAIL")
        self.assertEqual(check.witness, [1])

    def test_toggle_fails_later(self):
        check = verify_safety_controller(cancel_spec(), toggle("u0", "controllable_c0"))
        self.assertFalse(check.passed)
        self.assertEqual(check.witness, [1])

    def test_bad_false_passes_anything(self):
        spec = classify_safety_spec(parse_aag(BAD_FALSE))
        for controller in (copier("u0", "controllable_c0"), toggle("u0", "controllable_c0"),
                           constant("u0", "controllable_c0", False)):
            self.assertTrue(verify_controller(spec, controller).passed)


class TestParityVerification(unittest.TestCase):
    """PASS and FAIL verdicts on parity automata."""

    def test_synthesized_controller_passes(self):
        aut = parse_ehoa(STEERING)
        result = synthesize(aut)
        self.assertTrue(result.realizable)
        self.assertTrue(verify_parity_controller(aut, result.controller).passed)

    def test_stuck_controller_fails_with_lasso(self):
        check = verify_parity_controller(parse_ehoa(STEERING), constant("i", "o", False))
        self.assertFalse(check.passed)
        prefix, cycle = check.witness
        self.assertEqual(prefix, [])
        self.assertEqual(len(cycle), 1)

    def test_delayed_steering_passes(self):
        self.assertTrue(verify_parity_controller(parse_ehoa(STEERING), toggle("i", "o")).passed)

    def test_all_even_passes(self):
        aut = parse_ehoa(ALWAYS_EVEN)
        for controller in (copier("i", "o"), copier("i", "o", negate=True), toggle("i", "o")):
            self.assertTrue(verify_controller(aut, controller).passed)

    def test_name_mismatch(self):
        with self.assertRaises(CompositionError):
            verify_parity_controller(parse_ehoa(STEERING), copier("i", "x"))


class TestMutationSweep(unittest.TestCase):
    """Synthesized controllers with a single output inverted."""

    SPECS = 40 if os.environ.get('CI') == 'true' else 300

    def check_against_search(self, spec, controller):
        """Verdict, witness length and replay against exhaustive simulation; True on FAIL."""
        check = verify_safety_controller(spec, controller)
        joint = spec.circuit.num_latches + controller.num_latches
        if joint <= 8:
            expected = shortest_failure(spec, controller, 2 ** joint + 1)
            self.assertEqual(check.passed, expected is None, msg=check.message)
            if expected is not None:
                self.assertEqual(len(check.witness), expected)
        if not check.passed:
            steps = len(check.witness)
            self.assertEqual(bad_trace(spec, controller, check.witness),
                             [False] * (steps - 1) + [True])
        return not check.passed

    def test_delayed_copies(self):
        caught = 0
        for width in (1, 2, 3):
            for delay in (0, 1, 2):
                for inverted in (False, True):
                    spec = delayed_copy_spec(width, delay, inverted)
                    result = synthesize(spec)
                    self.assertTrue(result.realizable)
                    self.assertTrue(verify_safety_controller(spec, result.controller).passed)
                    for mutant in negated_outputs(result.controller):
                        self.assertTrue(self.check_against_search(spec, mutant))
                        check = verify_safety_controller(spec, mutant)
                        self.assertEqual(len(check.witness), 1)
                        caught += 1
        self.assertGreaterEqual(caught, 20)

    def test_random_instances(self):
        rng = random.Random(404)
        mutants = 0
        for _ in range(self.SPECS):
            spec = random_spec(rng)
            result = synthesize(spec)
            if not result.realizable:
                continue
            self.assertFalse(self.check_against_search(spec, result.controller))
            for mutant in negated_outputs(result.controller):
                self.check_against_search(spec, mutant)
                mutants += 1
        self.assertGreater(mutants, 0)


class TestExhaustiveAgreement(unittest.TestCase):
    """Model checking against simulation of every input sequence."""

    ROUNDS = 100 if os.environ.get('CI') == 'true' else 1000

    def test_random_controllers(self):
        rng = random.Random(808)
        verdicts = set()
        for _ in range(self.ROUNDS):
            spec = random_spec(rng)
            controller = random_controller(rng, spec, latches=rng.randint(0, 2),
                                           gates=rng.randint(0, 6))
            joint = spec.circuit.num_latches + controller.num_latches
            self.assertLessEqual(joint, 8)
            check = verify_safety_controller(spec, controller)
            expected = shortest_failure(spec, controller, 2 ** joint + 1)
            self.assertEqual(check.passed, expected is None, msg=check.message)
            if expected is not None:
                self.assertEqual(len(check.witness), expected)
                self.assertEqual(bad_trace(spec, controller, check.witness)[-1], True)
            verdicts.add(check.verdict)
        self.assertEqual(verdicts, {"PASS", "FAIL"})


if __name__ == '__main__':
    unittest.main()
